"""Prediction-guided variable fixing for sequential mixed-integer programs."""

__version__ = "0.1.0"
