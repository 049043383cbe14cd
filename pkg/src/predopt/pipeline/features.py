"""Encoding instances as per-period feature rows and optimal solutions as label rows."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..instances import (DEMAND_RANGE, HOLD_COST_RANGE, MSMK_CAP_FRACTION, MSMK_VALUE_RANGE, PROD_COST_RANGE,
                         GenConfig, KnapsackInstance, LotSizingInstance)
from ..milp import MilpModel, Solution, build_model, label_tight

MCLSP_CHANNELS = ("demand", "prod_cost", "setup_cost", "hold_cost", "capacity")
MSMK_CHANNELS = ("profit", "bonus", "weight", "capacity")


@dataclass(frozen=True)
class FeatureScaler:
    """Per-channel min-max bounds; ``None`` bounds mean "use the observed range"."""

    family: str
    bounds: Dict[str, Optional[Tuple[float, float]]]

    @classmethod
    def from_config(cls, cfg: GenConfig) -> "FeatureScaler":
        if cfg.family == "mclsp":
            lo_d, hi_d = DEMAND_RANGE
            lo_h, hi_h = HOLD_COST_RANGE
            return cls("mclsp", {
                "demand": (lo_d, hi_d),
                "prod_cost": PROD_COST_RANGE,
                "setup_cost": (0.9 * cfg.setup_to_hold * lo_h, 1.1 * cfg.setup_to_hold * hi_h),
                "hold_cost": (lo_h, hi_h),
                "capacity": (0.8 * cfg.cap_ratio * lo_d, 1.2 * cfg.cap_ratio * hi_d),
            })
        lo_f, hi_f = MSMK_CAP_FRACTION
        lo_v, hi_v = MSMK_VALUE_RANGE
        return cls("msmk", {
            "profit": (lo_v, hi_v),
            "bonus": (lo_v, hi_v),
            "weight": (lo_v, hi_v),
            "capacity": (lo_f * cfg.items * lo_v, hi_f * cfg.items * hi_v),
        })

    def to_dict(self) -> dict:
        return {"family": self.family, "bounds": {k: (list(v) if v else None) for k, v in self.bounds.items()}}

    @classmethod
    def from_dict(cls, doc) -> "FeatureScaler":
        return cls(doc["family"], {k: (tuple(v) if v else None) for k, v in doc["bounds"].items()})


@dataclass
class FeatureSeq:
    rows: np.ndarray  # (T, features)
    scaler: FeatureScaler
    warnings: list = field(default_factory=list)

    @property
    def shape(self):
        return self.rows.shape


def _scale(name, values, scaler: FeatureScaler, warnings):
    v = np.asarray(values, dtype=np.float64)
    b = scaler.bounds.get(name)
    if b is None:
        lo, hi = float(v.min()), float(v.max())
        warnings.append(f"{name}: no generator bounds, used observed range")
    else:
        lo, hi = b
    span = hi - lo if hi > lo else 1.0
    out = (v - lo) / span
    if out.size and (out.min() < -1e-12 or out.max() > 1 + 1e-12):
        warnings.append(f"{name}: values outside bounds [{lo}, {hi}] were clipped")
        out = np.clip(out, 0.0, 1.0)
    return out


def default_scaler(inst) -> FeatureScaler:
    if isinstance(inst, LotSizingInstance):
        return FeatureScaler("mclsp", {k: None for k in MCLSP_CHANNELS})
    return FeatureScaler("msmk", {k: None for k in MSMK_CHANNELS})


def encode_features(inst, scaler: Optional[FeatureScaler] = None) -> FeatureSeq:
    """Rows ``[d, p, f, h, c]`` (MCLSP, ``4I+1`` wide) or ``[p, b, w, cap]`` (MSMK, ``2I+IJ+J`` wide)."""
    scaler = scaler or default_scaler(inst)
    warns = []
    if isinstance(inst, LotSizingInstance):
        if scaler.family != "mclsp":
            raise ValueError("scaler family does not match instance")
        T = inst.n_periods
        parts = [
            _scale("demand", inst.demand, scaler, warns).T,
            _scale("prod_cost", inst.prod_cost, scaler, warns).T,
            _scale("setup_cost", inst.setup_cost, scaler, warns).T,
            _scale("hold_cost", inst.hold_cost, scaler, warns).T,
            _scale("capacity", inst.capacity, scaler, warns).reshape(T, 1),
        ]
        return FeatureSeq(np.ascontiguousarray(np.hstack(parts)), scaler, warns)
    if isinstance(inst, KnapsackInstance):
        if scaler.family != "msmk":
            raise ValueError("scaler family does not match instance")
        I, T, J = inst.n_items, inst.n_periods, inst.n_resources
        b_scaled = _scale("bonus", inst.bonus, scaler, warns) if T > 1 else np.zeros((I, 0))
        b_full = np.zeros((I, T))
        b_full[:, :T - 1] = b_scaled
        w = _scale("weight", inst.weight, scaler, warns)  # (I, J, T)
        parts = [
            _scale("profit", inst.profit, scaler, warns).T,
            b_full.T,
            w.transpose(2, 0, 1).reshape(T, I * J),
            _scale("capacity", inst.capacity, scaler, warns).T,
        ]
        return FeatureSeq(np.ascontiguousarray(np.hstack(parts)), scaler, warns)
    raise TypeError(f"unsupported instance type {type(inst).__name__}")


def feature_dim(family: str, I: int, J: int = 1) -> int:
    return 4 * I + 1 if family == "mclsp" else 2 * I + I * J + J


def label_dim(family: str, I: int, J: int = 1) -> int:
    return 2 * I + 1 if family == "mclsp" else I + J


def extract_labels(inst, optimal: Solution, eta: float, model: Optional[MilpModel] = None) -> np.ndarray:
    """Label rows ``[y, tight(setupLink), tight(capacity)]`` (MCLSP) or ``[x, tight(knapsack)]`` (MSMK)."""
    model = model or build_model(inst)
    tight = label_tight(model, optimal, eta).labels
    v = optimal.values
    if isinstance(inst, LotSizingInstance):
        I, T = inst.n_items, inst.n_periods
        out = np.zeros((T, 2 * I + 1))
        out[:, :I] = np.round(v[model.groups["y"]]).T
        for i in range(I):
            for t in range(T):
                out[t, I + i] = tight[("setupLink", (i, t))]
        for t in range(T):
            out[t, 2 * I] = tight[("capacity", (t,))]
        return out
    I, T, J = inst.n_items, inst.n_periods, inst.n_resources
    out = np.zeros((T, I + J))
    out[:, :I] = np.round(v[model.groups["x"]]).T
    for j in range(J):
        for t in range(T):
            out[t, I + j] = tight[("knapsack", (j, t))]
    return out


@dataclass
class PredictionSet:
    """Per-period probabilities in label-row layout."""

    probs: np.ndarray  # (T, label_dim)
    family: str
    n_items: int
    n_resources: int = 1

    @property
    def decision_probs(self) -> np.ndarray:
        """``(I, T)`` probabilities of the decision block."""
        return self.probs[:, :self.n_items].T

    @property
    def tight_probs(self) -> np.ndarray:
        return self.probs[:, self.n_items:]

    def tight_labels(self, threshold: float = 0.5) -> Dict[tuple, bool]:
        """Map labelable constraint tags to predicted tightness."""
        I = self.n_items
        T = self.probs.shape[0]
        tp = self.tight_probs
        out = {}
        if self.family == "mclsp":
            for i in range(I):
                for t in range(T):
                    out[("setupLink", (i, t))] = bool(tp[t, i] >= threshold)
            for t in range(T):
                out[("capacity", (t,))] = bool(tp[t, I] >= threshold)
        else:
            for j in range(self.n_resources):
                for t in range(T):
                    out[("knapsack", (j, t))] = bool(tp[t, j] >= threshold)
        return out
