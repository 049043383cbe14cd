"""Prediction, confidence-ranked fixing and the two-loop feasibility/resolution procedure."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..instances import KnapsackInstance, LotSizingInstance
from ..milp import Solution, Status, TightLabels, build_model, build_relaxation, fix_variables, labelable_tags
from ..nn import Seq2SeqModel
from ..solver import NumericalFailure, SolverOptions
from .features import FeatureScaler, PredictionSet, encode_features, extract_labels


@dataclass(frozen=True)
class PredOptConfig:
    init_pred_level: float = 0.80
    reduce_level: float = 0.05
    eta: float = 0.95
    tight_threshold: float = 0.5
    feasibility_opts: SolverOptions = field(default_factory=lambda: SolverOptions(feasibility_only=True))
    resolve_opts: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not 0.0 <= self.init_pred_level <= 1.0:
            raise ValueError("init_pred_level must lie in [0, 1]")
        if not 0.0 < self.reduce_level <= 1.0:
            raise ValueError("reduce_level must lie in (0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")

    @classmethod
    def for_family(cls, family: str, **kw) -> "PredOptConfig":
        kw.setdefault("init_pred_level", 0.80 if family == "mclsp" else 0.60)
        return cls(**kw)


@dataclass
class PredOptResult:
    final_pred_level: float
    feasibility_iterations: int
    resolution_iterations: int
    solution: Solution
    prediction_time: float
    feasibility_time: float
    resolve_time: float
    predictions: Optional[PredictionSet] = None
    fixed: Dict[int, int] = field(default_factory=dict)

    @property
    def total_time(self) -> float:
        return self.prediction_time + self.feasibility_time + self.resolve_time

    def to_dict(self) -> dict:
        return {
            "final_pred_level": self.final_pred_level,
            "feasibility_iterations": self.feasibility_iterations,
            "resolution_iterations": self.resolution_iterations,
            "status": self.solution.status.value,
            "objective": None if not np.isfinite(self.solution.objective) else self.solution.objective,
            "values": None if self.solution.values is None else self.solution.values.tolist(),
            "prediction_time": self.prediction_time,
            "feasibility_time": self.feasibility_time,
            "resolve_time": self.resolve_time,
        }


# ---- predictors ----

class NetworkPredictor:
    """Wraps a trained sequence model and the feature scaler it was trained with."""

    def __init__(self, model: Seq2SeqModel, scaler: FeatureScaler):
        self.model = model
        self.scaler = scaler

    def predict(self, inst) -> PredictionSet:
        feats = encode_features(inst, self.scaler)
        probs = self.model.predict(feats.rows)
        J = inst.n_resources if isinstance(inst, KnapsackInstance) else 1
        return PredictionSet(probs, inst.family, inst.n_items, J)


class OraclePredictor:
    """Emits the exact optimal label rows (probabilities in {0, 1})."""

    def __init__(self, solver, eta: float = 0.95):
        self.solver = solver
        self.eta = eta

    def predict(self, inst) -> PredictionSet:
        model = build_model(inst)
        res = self.solver.solve(model, SolverOptions())
        if res.status != Status.OPTIMAL:
            raise RuntimeError(f"oracle predictor needs an optimal solve, got {res.status}")
        labels = extract_labels(inst, res.solution, self.eta, model)
        J = inst.n_resources if isinstance(inst, KnapsackInstance) else 1
        return PredictionSet(labels.astype(float), inst.family, inst.n_items, J)


class RandomPredictor:
    """Uniform random probabilities; a seeded stress test for the feasibility loops."""

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def predict(self, inst) -> PredictionSet:
        if isinstance(inst, LotSizingInstance):
            width, J = 2 * inst.n_items + 1, 1
        else:
            J = inst.n_resources
            width = inst.n_items + J
        return PredictionSet(self.rng.random((inst.n_periods, width)), inst.family, inst.n_items, J)


class ConstantPredictor:
    """Same probability for every output; handy for adversarial tests."""

    def __init__(self, decision: float, tight: float = 1.0):
        self.decision = decision
        self.tight = tight

    def predict(self, inst) -> PredictionSet:
        I = inst.n_items
        J = inst.n_resources if isinstance(inst, KnapsackInstance) else 1
        width = 2 * I + 1 if isinstance(inst, LotSizingInstance) else I + J
        probs = np.full((inst.n_periods, width), float(self.tight))
        probs[:, :I] = self.decision
        return PredictionSet(probs, inst.family, I, J)


# ---- fixing ----

def confidence_order(decision_probs) -> np.ndarray:
    """Flat indices sorted by ``max(p, 1-p)`` descending; ties keep the lower index first."""
    p = np.asarray(decision_probs, dtype=float).reshape(-1)
    conf = np.maximum(p, 1.0 - p)
    return np.argsort(-conf, kind="stable")


def rank_and_fix(decision_probs, pred_level: float, var_ids=None) -> Dict[int, int]:
    """Fix the ``floor(pred_level * N)`` most confident decisions to their rounded value.

    Keys are flat ``(i, t)`` positions, or variable ids when ``var_ids`` (same
    shape as ``decision_probs``) is given.  0.5 rounds to 1.
    """
    if not 0.0 <= pred_level <= 1.0:
        raise ValueError("pred_level must lie in [0, 1]")
    p = np.asarray(decision_probs, dtype=float).reshape(-1)
    n_fix = math.floor(pred_level * p.size + 1e-9)
    chosen = confidence_order(p)[:n_fix]
    ids = None if var_ids is None else np.asarray(var_ids).reshape(-1)
    return {int(k if ids is None else ids[k]): int(p[k] >= 0.5) for k in chosen}


def _step_down(level, reduce):
    return max(0.0, round(level - reduce, 12))


def predopt_solve(inst, predictor, config: PredOptConfig, solver,
                  predictions: Optional[PredictionSet] = None) -> PredOptResult:
    """Run the feasibility loop on the predicted relaxation, then the resolution loop on the full model.

    ``predictor`` is anything with ``predict(instance) -> PredictionSet``; a
    bare :class:`Seq2SeqModel` is not accepted since it needs its scaler.
    Precomputed ``predictions`` skip the prediction step.
    """
    t0 = time.perf_counter()
    preds = predictions if predictions is not None else predictor.predict(inst)
    model = build_model(inst)
    if preds.probs.shape[0] != inst.n_periods or preds.n_items != inst.n_items:
        raise ValueError("prediction dimensions do not match the instance")
    dec = preds.decision_probs
    var_ids = model.decision_ids
    tags = preds.tight_labels(config.tight_threshold)
    relaxed = build_relaxation(model, TightLabels({tag: tags[tuple(tag)] for tag in labelable_tags(model)},
                                                  config.eta))
    t1 = time.perf_counter()

    level = config.init_pred_level
    loop1 = 0
    while True:
        loop1 += 1
        fixed = rank_and_fix(dec, level, var_ids)
        res = solver.solve(fix_variables(relaxed, fixed), config.feasibility_opts)
        if res.status == Status.NUMERICAL_FAILURE:
            raise NumericalFailure("solver broke down in the feasibility loop")
        if res.found_solution or level == 0.0:
            break
        level = _step_down(level, config.reduce_level)
    t2 = time.perf_counter()

    loop2 = 0
    while True:
        loop2 += 1
        fixed = rank_and_fix(dec, level, var_ids)
        res = solver.solve(fix_variables(model, fixed), config.resolve_opts)
        if res.status == Status.NUMERICAL_FAILURE:
            raise NumericalFailure("solver broke down in the resolution loop")
        if res.found_solution or level == 0.0:
            break
        level = _step_down(level, config.reduce_level)
    t3 = time.perf_counter()
    sol = res.solution
    if sol.status == Status.OPTIMAL and fixed:
        # optimal for the restricted model only
        sol = Solution(sol.values, sol.objective, Status.FEASIBLE)
    return PredOptResult(level, loop1, loop2, sol, t1 - t0, t2 - t1, t3 - t2, preds, fixed)

