"""Fitting a sequence model to a labelled dataset and packaging it with its scaler."""
from __future__ import annotations

import logging

import numpy as np

from ..nn import AdamState, Seq2SeqConfig, Seq2SeqModel, train
from .features import FeatureScaler

log = logging.getLogger(__name__)


def fit_predictor(samples, header: dict, hidden: int = 32, window: int = 5, layers: int = 2, epochs: int = 60,
                  lr: float = 0.01, batch_size: int = 32, dropout: float = 0.0, label_smoothing: float = 0.1,
                  seed: int = 0, log_every: int = 1, stitch: float = 0.3, stitch_max_len: int = 0,
                  lr_decay: float = 0.97):
    """Train a fresh model on ``samples``; returns ``(model, losses, meta)`` ready for ``model.save``.

    ``stitch`` is the share of batches built from glued period slices (see
    :func:`predopt.nn.stitch_batch`); without it the recurrences never run
    past the training horizon and predictions on longer instances degrade.
    """
    if not samples:
        raise ValueError("cannot train on an empty dataset")
    cfg = Seq2SeqConfig(header["feature_dim"], header["label_dim"], encoder_hidden=hidden, layers=layers,
                        window=window, dropout=dropout, label_smoothing=label_smoothing)
    model = Seq2SeqModel(cfg, seed=seed)
    losses = train(model, samples, epochs, AdamState(lr=lr), seed=seed, batch_size=batch_size,
                   log_every=log_every, stitch=stitch, stitch_max_len=stitch_max_len, lr_decay=lr_decay)
    meta = {
        "family": header["family"],
        "items": header["items"],
        "periods": header["periods"],
        "resources": header["resources"],
        "eta": header["eta"],
        "scaler": FeatureScaler.from_dict(header["scaler"]).to_dict(),
        "train": {"epochs": epochs, "lr": lr, "lr_decay": lr_decay, "batch_size": batch_size, "seed": seed,
                  "dropout": dropout, "stitch": stitch, "stitch_max_len": stitch_max_len, "samples": len(samples),
                  "final_loss": float(losses[-1]) if losses else None},
    }
    return model, losses, meta


def decision_accuracy(model: Seq2SeqModel, samples, n_items: int) -> float:
    """Mean share of decision labels reproduced by thresholded predictions."""
    hits = []
    for X, Y in samples:
        P = model.predict(X)
        hits.append(np.mean((P[:, :n_items] >= 0.5) == (np.asarray(Y)[:, :n_items] >= 0.5)))
    return float(np.mean(hits) * 100.0)
