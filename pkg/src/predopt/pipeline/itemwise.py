"""Predicting instances with more items than the model was trained on by averaging over item subsets."""
from __future__ import annotations

import numpy as np

from ..instances import KnapsackInstance, LotSizingInstance
from .features import PredictionSet


def sub_instance(inst, items):
    """Restrict ``inst`` to ``items`` and scale capacities by the subset's share of demand / weight."""
    items = np.asarray(items)
    if isinstance(inst, LotSizingInstance):
        total = inst.demand.sum(axis=0).astype(float)
        part = inst.demand[items].sum(axis=0).astype(float)
        share = np.divide(part, total, out=np.ones_like(total), where=total > 0)
        return LotSizingInstance(inst.demand[items], inst.prod_cost[items], inst.setup_cost[items],
                                 inst.hold_cost[items], inst.capacity * share, seed=inst.seed)
    total = inst.weight.sum(axis=0).astype(float)  # (J, T)
    part = inst.weight[items].sum(axis=0).astype(float)
    share = np.divide(part, total, out=np.ones_like(total), where=total > 0)
    return KnapsackInstance(inst.profit[items], inst.bonus[items], inst.weight[items], inst.capacity * share,
                            seed=inst.seed)


def itemwise_predict(predictor, inst, model_items: int, delta: int = 10, seed: int = 0,
                     return_counts: bool = False):
    """Average sub-instance predictions until every item has been predicted more than ``delta`` times.

    Item-specific outputs (decisions, and setup-link tightness for MCLSP) are
    averaged over the passes that included the item; shared outputs
    (capacity or knapsack tightness) are averaged over all passes.  Running
    means are used, so identical passes reproduce their value exactly.
    """
    I = inst.n_items
    if I < model_items:
        raise ValueError(f"instance has {I} items but the model expects at least {model_items}")
    rng = np.random.default_rng(seed)
    T = inst.n_periods
    mclsp = isinstance(inst, LotSizingInstance)
    J = 1 if mclsp else inst.n_resources
    dec = np.zeros((T, I))
    link = np.zeros((T, I))
    shared = np.zeros((T, 1 if mclsp else J))
    gamma = np.zeros(I, dtype=np.int64)
    passes = 0
    M = model_items
    while np.any(gamma <= delta):
        S = np.sort(rng.choice(I, size=M, replace=False))
        probs = predictor.predict(sub_instance(inst, S)).probs
        gamma[S] += 1
        passes += 1
        k = gamma[S].astype(float)
        dec[:, S] += (probs[:, :M] - dec[:, S]) / k
        if mclsp:
            link[:, S] += (probs[:, M:2 * M] - link[:, S]) / k
            shared += (probs[:, 2 * M:2 * M + 1] - shared) / passes
        else:
            shared += (probs[:, M:M + J] - shared) / passes
    out = np.hstack([dec, link, shared]) if mclsp else np.hstack([dec, shared])
    pred = PredictionSet(out, inst.family, I, J)
    if return_counts:
        return pred, gamma
    return pred
