"""One-sided Wilcoxon signed-rank test (alternative: median difference > 0)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

EXACT_MAX_N = 25


@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    statistic: float  # W+, the rank sum of positive differences
    n: int  # nonzero differences used
    method: str  # "exact", "normal" or "degenerate"

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


def _exact_upper_tail(ranks2: np.ndarray, w2: int) -> float:
    """P(sum of a random subset of the doubled ranks >= w2) with each rank included w.p. 1/2."""
    total = int(ranks2.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in ranks2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return float(counts[w2:].sum() / counts.sum())


def wilcoxon_one_sided(diffs) -> WilcoxonResult:
    d = np.asarray(diffs, dtype=float).reshape(-1)
    if not np.all(np.isfinite(d)):
        raise ValueError("differences must be finite")
    d = d[d != 0]
    n = d.size
    if n == 0:
        return WilcoxonResult(1.0, 0.0, 0, "degenerate")
    ranks = rankdata(np.abs(d))  # average ranks on ties
    w_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_N:
        ranks2 = np.rint(2 * ranks).astype(np.int64)
        w2 = int(round(2 * w_plus))
        return WilcoxonResult(_exact_upper_tail(ranks2, w2), w_plus, n, "exact")
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    z = (w_plus - mean - 0.5) / math.sqrt(var)
    return WilcoxonResult(0.5 * math.erfc(z / math.sqrt(2)), w_plus, n, "normal")
