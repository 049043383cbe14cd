from .dataset import DatasetError, build_dataset, load_dataset, save_dataset, scaler_for
from .features import (FeatureScaler, FeatureSeq, PredictionSet, default_scaler, encode_features, extract_labels,
                       feature_dim, label_dim)
from .itemwise import itemwise_predict, sub_instance
from .training import decision_accuracy, fit_predictor
from .predopt import (ConstantPredictor, NetworkPredictor, OraclePredictor, PredOptConfig, PredOptResult,
                      RandomPredictor, confidence_order, predopt_solve, rank_and_fix)

__all__ = [
    "ConstantPredictor", "DatasetError", "FeatureScaler", "FeatureSeq", "NetworkPredictor", "OraclePredictor",
    "PredOptConfig", "PredOptResult", "PredictionSet", "RandomPredictor", "build_dataset", "confidence_order",
    "decision_accuracy", "default_scaler", "encode_features", "extract_labels", "feature_dim", "fit_predictor", "itemwise_predict", "label_dim",
    "load_dataset", "predopt_solve", "rank_and_fix", "save_dataset", "scaler_for", "sub_instance",
]
