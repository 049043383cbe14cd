"""Per-instance comparison metrics."""
from __future__ import annotations

from typing import Tuple

import numpy as np

TIME_RESOLUTION = 1e-3


class MetricError(ValueError):
    pass


def opt_gap(z_ref: float, z_hat: float) -> float:
    """Percentage deviation of ``z_hat`` from the reference objective."""
    if z_ref == 0:
        raise MetricError("optimality gap is undefined for a zero reference objective")
    return abs(z_hat - z_ref) / abs(z_ref) * 100.0


def time_improvement(t_base: float, t_new: float) -> Tuple[float, bool]:
    """``t_base / t_new``; returns ``(factor, clamped)`` where ``clamped`` flags a zero ``t_new``."""
    if t_base < 0 or t_new < 0:
        raise MetricError("times must be nonnegative")
    clamped = t_new < TIME_RESOLUTION
    return t_base / max(t_new, TIME_RESOLUTION), clamped


def accuracy(predicted, reference) -> float:
    """Percentage of decision binaries where the rounded prediction equals the reference."""
    p = np.asarray(predicted, dtype=float)
    r = np.asarray(reference, dtype=float)
    if p.shape != r.shape:
        raise MetricError(f"prediction shape {p.shape} does not match reference shape {r.shape}")
    if p.size == 0:
        raise MetricError("no decision variables to compare")
    return float(np.mean((p >= 0.5) == (r >= 0.5)) * 100.0)
