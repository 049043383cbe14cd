"""Bidirectional-LSTM encoder, LSTM decoder with local windowed attention, sigmoid multi-label head."""
from __future__ import annotations

import io
import json
import zipfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .tensor import Tensor, bce_with_logits, concat, lstm_cell, no_grad, parameter, stack

CHECKPOINT_FORMAT = "predopt-seq2seq"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class Seq2SeqConfig:
    input_dim: int
    output_dim: int
    encoder_hidden: int = 32
    layers: int = 2
    window: int = 5
    dropout: float = 0.25
    label_smoothing: float = 0.1

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1 or self.encoder_hidden < 1 or self.layers < 1:
            raise ValueError("dimensions and layer count must be >= 1")
        if self.window < 0:
            raise ValueError("attention window must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if not 0.0 <= self.label_smoothing < 0.5:
            raise ValueError("label smoothing must lie in [0, 0.5)")

    @property
    def decoder_hidden(self) -> int:
        return 2 * self.encoder_hidden


def smooth_labels(y, eps):
    return np.asarray(y, dtype=np.float64) * (1.0 - eps) + 0.5 * eps


def attention_window(t: int, T: int, D: int):
    """0-based half-open window ``[lo, hi)`` of encoder periods attended at step ``t``."""
    if not 0 <= t < T:
        raise ValueError(f"period {t} outside horizon of length {T}")
    return max(0, t - D), min(T, t + D + 1)


class Seq2SeqModel:
    def __init__(self, config: Seq2SeqConfig, seed: int = 0):
        self.config = config
        self.params: Dict[str, Tensor] = {}
        rng = np.random.default_rng(seed)
        H, Hd = config.encoder_hidden, config.decoder_hidden
        for direction in ("fwd", "bwd"):
            for layer in range(config.layers):
                fan = config.input_dim if layer == 0 else H
                self._lstm_params(rng, f"enc_{direction}{layer}", fan, H)
        for layer in range(config.layers):
            fan = config.output_dim if layer == 0 else Hd
            self._lstm_params(rng, f"dec{layer}", fan, Hd)
        self._uniform(rng, "attn_W", (Hd, 2 * H), 2 * H)
        self._uniform(rng, "comb_W", (2 * H + Hd, Hd), 2 * H + Hd)
        self._uniform(rng, "comb_b", (Hd,), 2 * H + Hd)
        self._uniform(rng, "out_W", (Hd, config.output_dim), Hd)
        self._uniform(rng, "out_b", (config.output_dim,), Hd)

    def _uniform(self, rng, name, shape, fan_in):
        k = 1.0 / np.sqrt(fan_in)
        self.params[name] = parameter(rng.uniform(-k, k, size=shape))

    def _lstm_params(self, rng, prefix, n_in, n_hidden):
        self._uniform(rng, f"{prefix}.Wx", (n_in, 4 * n_hidden), n_hidden)
        self._uniform(rng, f"{prefix}.Wh", (n_hidden, 4 * n_hidden), n_hidden)
        self._uniform(rng, f"{prefix}.b", (4 * n_hidden,), n_hidden)

    # ---- forward pieces ----
    def _dropout(self, t: Tensor, rng) -> Tensor:
        p = self.config.dropout
        if rng is None or p == 0.0:
            return t
        mask = (rng.random(t.shape) >= p) / (1.0 - p)
        return t * mask

    def _run_stack(self, prefix, inputs: List[Tensor], rng) -> List[Tensor]:
        H = self.config.encoder_hidden
        seq = inputs
        B = inputs[0].shape[0]
        for layer in range(self.config.layers):
            if layer > 0:
                seq = [self._dropout(s, rng) for s in seq]
            P = self.params
            Wx, Wh, b = P[f"{prefix}{layer}.Wx"], P[f"{prefix}{layer}.Wh"], P[f"{prefix}{layer}.b"]
            h = Tensor(np.zeros((B, H)))
            c = Tensor(np.zeros((B, H)))
            out = []
            for x in seq:
                hc = lstm_cell(x, h, c, Wx, Wh, b)
                h, c = hc[:, :H], hc[:, H:]
                out.append(h)
            seq = out
        return seq

    def encode(self, features, rng=None):
        """Top-layer forward and backward states, each a list of ``T`` tensors of shape ``(B, H)``.

        ``features`` has shape ``(T, input_dim)`` or ``(B, T, input_dim)``.
        """
        X = np.asarray(features, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[2] != self.config.input_dim:
            raise ValueError(f"expected features (B, T, {self.config.input_dim}), got {X.shape}")
        T = X.shape[1]
        steps = [Tensor(X[:, t, :]) for t in range(T)]
        fwd = self._run_stack("enc_fwd", steps, rng)
        bwd = self._run_stack("enc_bwd", steps[::-1], rng)[::-1]
        return fwd, bwd

    def encoder_forward(self, features):
        """Numpy view of the encoder: arrays ``(T, H)`` for a single unbatched sequence."""
        with no_grad():
            fwd, bwd = self.encode(features)
        return np.stack([h.data[0] for h in fwd]), np.stack([h.data[0] for h in bwd])

    def init_decoder_state(self, batch: int):
        Hd = self.config.decoder_hidden
        z = np.zeros((batch, Hd))
        return [(Tensor(z), Tensor(z)) for _ in range(self.config.layers)]

    def decoder_step(self, y_prev, state, memory: Tensor, t: int, rng=None):
        """One decoding period.

        ``memory`` stacks ``[h_fwd; h_bwd]`` as ``(B, T, 2H)``.  Returns
        ``(logits, new_state, attention_weights)``.
        """
        cfg = self.config
        Hd = cfg.decoder_hidden
        B, T, _ = memory.shape
        lo, hi = attention_window(t, T, cfg.window)
        inp = y_prev if isinstance(y_prev, Tensor) else Tensor(np.asarray(y_prev, dtype=np.float64))
        new_state = []
        for layer in range(cfg.layers):
            if layer > 0:
                inp = self._dropout(inp, rng)
            h, c = state[layer]
            P = self.params
            hc = lstm_cell(inp, h, c, P[f"dec{layer}.Wx"], P[f"dec{layer}.Wh"], P[f"dec{layer}.b"])
            h, c = hc[:, :Hd], hc[:, Hd:]
            new_state.append((h, c))
            inp = h
        h_d = inp
        win = memory[:, lo:hi, :]
        query = h_d @ self.params["attn_W"]
        scores = (win * query.reshape(B, 1, -1)).sum(axis=2)
        weights = scores.softmax(axis=-1)
        context = (win * weights.reshape(B, hi - lo, 1)).sum(axis=1)
        combined = (concat([context, h_d], axis=-1) @ self.params["comb_W"] + self.params["comb_b"]).tanh()
        logits = combined @ self.params["out_W"] + self.params["out_b"]
        return logits, new_state, weights

    def decoder_attend_predict(self, y_prev, state, encoder_states, t: int):
        """Single inference step on numpy inputs; returns ``(probs, state, weights)``."""
        fwd, bwd = encoder_states
        memory = Tensor(np.concatenate([np.asarray(fwd), np.asarray(bwd)], axis=-1)[None])
        with no_grad():
            logits, state, w = self.decoder_step(np.asarray(y_prev, dtype=np.float64).reshape(1, -1), state,
                                                 memory, t)
        return logits.sigmoid().data[0], state, w.data[0]

    def _memory(self, fwd, bwd):
        return stack([concat([f, b], axis=-1) for f, b in zip(fwd, bwd)], axis=1)

    def forward_teacher(self, features, labels, rng=None) -> Tensor:
        """Logits ``(B, T, out)`` with the ground-truth previous label row fed to the decoder."""
        Y = np.asarray(labels, dtype=np.float64)
        if Y.ndim == 2:
            Y = Y[None]
        fwd, bwd = self.encode(features, rng)
        memory = self._memory(fwd, bwd)
        B, T, _ = memory.shape
        state = self.init_decoder_state(B)
        prev = np.zeros((B, self.config.output_dim))
        out = []
        for t in range(T):
            logits, state, _ = self.decoder_step(prev, state, memory, t, rng)
            out.append(logits)
            prev = Y[:, t, :]
        return stack(out, axis=1)

    def loss(self, features, labels, rng=None) -> Tensor:
        logits = self.forward_teacher(features, labels, rng)
        return bce_with_logits(logits, smooth_labels(labels if np.ndim(labels) == 3 else [labels],
                                                     self.config.label_smoothing))

    def predict(self, features, return_attention: bool = False):
        """Free-running inference: the thresholded previous prediction feeds the decoder.

        Returns probabilities ``(T, out)`` for one sequence or ``(B, T, out)`` for a batch.
        """
        X = np.asarray(features, dtype=np.float64)
        single = X.ndim == 2
        with no_grad():
            fwd, bwd = self.encode(X)
            memory = self._memory(fwd, bwd)
            B, T, _ = memory.shape
            state = self.init_decoder_state(B)
            prev = np.zeros((B, self.config.output_dim))
            probs, attn = [], []
            for t in range(T):
                logits, state, w = self.decoder_step(prev, state, memory, t)
                p = logits.sigmoid().data
                probs.append(p)
                attn.append(w.data)
                prev = (p >= 0.5).astype(np.float64)
        P = np.stack(probs, axis=1)
        P = P[0] if single else P
        if return_attention:
            return P, [a[0] if single else a for a in attn]
        return P

    # ---- parameters and checkpoints ----
    def parameters(self):
        return list(self.params.values())

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.params.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        if set(state) != set(self.params):
            raise CheckpointError("parameter block names do not match the architecture")
        for k, arr in state.items():
            if arr.shape != self.params[k].shape:
                raise CheckpointError(f"block {k}: shape {arr.shape} != expected {self.params[k].shape}")
            self.params[k].data = np.array(arr, dtype=np.float64)

    def save(self, path, meta: Optional[dict] = None) -> Path:
        """Write a versioned checkpoint: JSON header plus named float64 blocks."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": asdict(self.config),
            "blocks": {k: list(v.shape) for k, v in self.params.items()},
            "meta": meta or {},
        }
        arrays = {"__header__": np.array(json.dumps(header, sort_keys=True))}
        arrays.update((f"p:{k}", v.data) for k, v in self.params.items())
        # fixed entry timestamps keep identical weights byte-identical on disk
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
            for name, arr in arrays.items():
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.asarray(arr), allow_pickle=False)
                zf.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0)), buf.getvalue())
        return path

    @classmethod
    def load(cls, path, expected: Optional[Seq2SeqConfig] = None):
        """Load a checkpoint; returns ``(model, meta)``."""
        with np.load(Path(path), allow_pickle=False) as z:
            if "__header__" not in z:
                raise CheckpointError(f"{path}: missing header block")
            header = json.loads(str(z["__header__"]))
            if header.get("format") != CHECKPOINT_FORMAT or header.get("version") != CHECKPOINT_VERSION:
                raise CheckpointError(f"{path}: unsupported checkpoint format/version")
            try:
                config = Seq2SeqConfig(**header["config"])
            except TypeError as exc:
                raise CheckpointError(f"{path}: bad config header: {exc}") from exc
            if expected is not None and config != expected:
                raise CheckpointError(f"{path}: config {config} does not match expected {expected}")
            state = {k[2:]: z[k] for k in z.files if k.startswith("p:")}
        for k, shape in header["blocks"].items():
            if k not in state or list(state[k].shape) != shape:
                raise CheckpointError(f"{path}: block {k} missing or shape mismatch")
        model = cls(config)
        model.load_state_dict(state)
        return model, header.get("meta", {})
