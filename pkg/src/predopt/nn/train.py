from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .seq2seq import Seq2SeqConfig, Seq2SeqModel
from .tensor import no_grad

log = logging.getLogger(__name__)


class TrainingDiverged(FloatingPointError):
    pass


@dataclass
class AdamState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def update(self, params, grads: Dict[str, np.ndarray]) -> None:
        self.step += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.step
        c2 = 1.0 - b2 ** self.step
        for name, p in params.items():
            g = grads.get(name)
            if g is None:
                g = np.zeros_like(p.data)
            m = self.m.setdefault(name, np.zeros_like(p.data))
            v = self.v.setdefault(name, np.zeros_like(p.data))
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _clip(grads, max_norm):
    if max_norm is None:
        return grads
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        return {k: g * scale for k, g in grads.items()}
    return grads


def train_step(model: Seq2SeqModel, adam: AdamState, X, Y, rng, clip_norm=5.0) -> float:
    model.zero_grad()
    loss = model.loss(X, Y, rng)
    value = float(loss.data)
    if not np.isfinite(value):
        raise TrainingDiverged(
            f"loss became {value} at optimizer step {adam.step}; lower the learning rate (now {adam.lr})"
        )
    loss.backward()
    grads = {k: p.grad for k, p in model.params.items() if p.grad is not None}
    adam.update(model.params, _clip(grads, clip_norm))
    return value


STITCH_MIN_SEG = 4


def stitch_batch(X: np.ndarray, Y: np.ndarray, rng, batch: int, length: int, min_seg: int = STITCH_MIN_SEG):
    """Sequences of ``length`` periods glued from slices of several same-horizon samples.

    ``X``/``Y`` are ``(N, T, .)`` stacks.  The first slice starts at a real
    horizon start and the last ends at a real horizon end; slices in between
    avoid both ends, so boundary behaviour only shows up where it belongs.
    Every slice keeps its own labels.
    """
    N, T = X.shape[:2]
    if T < min_seg + 2:
        raise ValueError(f"samples of {T} periods are too short to stitch")
    segs, rem = [], length
    while rem > 0:
        seg = min(rem, int(rng.integers(min_seg, T - 1)))
        if 0 < rem - seg < min_seg:
            seg = rem if rem <= T - 2 else rem - min_seg
        segs.append(seg)
        rem -= seg
    xs, ys = [], []
    for k, seg in enumerate(segs):
        rows = rng.integers(0, N, size=batch)
        if k == 0:
            off = np.zeros(batch, dtype=np.int64)
        elif k == len(segs) - 1:
            off = np.full(batch, T - seg)
        else:
            off = rng.integers(1, T - seg, size=batch)
        xs.append(np.stack([X[r, o:o + seg] for r, o in zip(rows, off)]))
        ys.append(np.stack([Y[r, o:o + seg] for r, o in zip(rows, off)]))
    return np.concatenate(xs, axis=1), np.concatenate(ys, axis=1)


def train(model: Seq2SeqModel, dataset: Sequence[Tuple[np.ndarray, np.ndarray]], epochs: int,
          adam: AdamState, seed: int = 0, batch_size: int = 32, clip_norm: float | None = 5.0,
          dropout: bool = True, log_every: int = 0, stitch: float = 0.0, stitch_max_len: int = 0,
          lr_decay: float = 1.0) -> List[float]:
    """Teacher-forced minibatch training; returns the mean loss of each epoch.

    Sequences are grouped by length so every batch is rectangular.  With
    ``stitch > 0`` that share of batches is replaced by sequences longer
    than any sample (up to ``stitch_max_len``, default four horizons) glued
    from slices of the largest length group, so the recurrences learn to run
    past the training horizon.  ``adam.lr`` is multiplied by ``lr_decay``
    after every epoch.
    """
    if not 1 <= batch_size <= 64:
        raise ValueError("batch_size must lie in 1..64")
    cfg = model.config
    by_len = defaultdict(list)
    for k, (X, Y) in enumerate(dataset):
        X, Y = np.asarray(X), np.asarray(Y)
        if X.shape[1] != cfg.input_dim or Y.shape[1] != cfg.output_dim or X.shape[0] != Y.shape[0]:
            raise ValueError(f"sample {k}: feature/label dims {X.shape}/{Y.shape} do not fit the model")
        by_len[X.shape[0]].append(k)
    if not 0.0 <= stitch < 1.0:
        raise ValueError("stitch must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    if stitch:
        T0 = max(by_len, key=lambda T: (len(by_len[T]), T))
        if T0 < STITCH_MIN_SEG + 2:
            log.warning("horizon %d too short to stitch; training on whole samples only", T0)
            stitch = 0.0
    if stitch:
        SX = np.stack([np.asarray(dataset[k][0]) for k in by_len[T0]])
        SY = np.stack([np.asarray(dataset[k][1]) for k in by_len[T0]])
        max_len = stitch_max_len or 4 * T0
    history = []
    for epoch in range(epochs):
        batches = []
        for T in sorted(by_len):
            idx = np.array(by_len[T])
            rng.shuffle(idx)
            batches.extend(idx[s:s + batch_size] for s in range(0, len(idx), batch_size))
        order = rng.permutation(len(batches))
        total, count = 0.0, 0
        for b in order:
            idx = batches[b]
            if stitch and rng.random() < stitch:
                X, Y = stitch_batch(SX, SY, rng, len(idx), int(rng.integers(T0 + 1, max_len + 1)))
            else:
                X = np.stack([dataset[k][0] for k in idx])
                Y = np.stack([dataset[k][1] for k in idx])
            loss = train_step(model, adam, X, Y, rng if dropout else None, clip_norm)
            total += loss * len(idx)
            count += len(idx)
        history.append(total / count)
        adam.lr *= lr_decay
        if log_every and (epoch + 1) % log_every == 0:
            log.info("epoch %d loss %.5f", epoch + 1, history[-1])
    return history


def evaluate_loss(model: Seq2SeqModel, dataset, batch_size: int = 64) -> float:
    total, count = 0.0, 0
    with no_grad():
        for s in range(0, len(dataset), batch_size):
            chunk = dataset[s:s + batch_size]
            lens = {np.shape(x)[0] for x, _ in chunk}
            for T in lens:
                part = [(x, y) for x, y in chunk if np.shape(x)[0] == T]
                X = np.stack([x for x, _ in part])
                Y = np.stack([y for _, y in part])
                total += float(model.loss(X, Y).data) * len(part)
                count += len(part)
    return total / max(count, 1)


def grad_check(config: Seq2SeqConfig, seed: int = 0, T: int = 4, batch: int = 2, step: float = 1e-5,
               tol: float = 1e-3) -> Tuple[float, Dict[str, float]]:
    """Compare backprop gradients with central finite differences on every parameter entry.

    Dropout is disabled.  Returns the overall max relative error and the
    per-block maxima; raises ``AssertionError`` naming the worst block when
    ``tol`` is exceeded.
    """
    model = Seq2SeqModel(config, seed=seed)
    rng = np.random.default_rng(seed + 1)
    X = rng.random((batch, T, config.input_dim))
    Y = (rng.random((batch, T, config.output_dim)) < 0.5).astype(float)
    model.zero_grad()
    model.loss(X, Y).backward()
    analytic = {k: p.grad.copy() for k, p in model.params.items()}
    per_block = {}
    with no_grad():
        for name, p in model.params.items():
            flat = p.data.reshape(-1)
            num = np.empty_like(flat)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + step
                up = float(model.loss(X, Y).data)
                flat[j] = orig - step
                down = float(model.loss(X, Y).data)
                flat[j] = orig
                num[j] = (up - down) / (2 * step)
            a = analytic[name].reshape(-1)
            denom = np.maximum(np.maximum(np.abs(a), np.abs(num)), 1e-6)
            per_block[name] = float(np.max(np.abs(a - num) / denom))
    worst = max(per_block, key=per_block.get)
    if per_block[worst] >= tol:
        raise AssertionError(f"gradient mismatch in block {worst}: relative error {per_block[worst]:.3e}")
    return per_block[worst], per_block
