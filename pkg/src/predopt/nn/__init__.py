from .seq2seq import CheckpointError, Seq2SeqConfig, Seq2SeqModel, attention_window, smooth_labels
from .tensor import Tensor, no_grad
from .train import AdamState, TrainingDiverged, evaluate_loss, grad_check, stitch_batch, train, train_step

__all__ = [
    "AdamState",
    "CheckpointError",
    "Seq2SeqConfig",
    "Seq2SeqModel",
    "Tensor",
    "TrainingDiverged",
    "attention_window",
    "evaluate_loss",
    "grad_check",
    "no_grad",
    "smooth_labels",
    "stitch_batch",
    "train",
    "train_step",
]
