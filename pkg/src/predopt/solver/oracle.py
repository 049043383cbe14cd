"""Exhaustive enumeration oracle for small models.

Every binary assignment is tried.  Pure-binary models are checked in
vectorized chunks; with continuous variables the remainder LP is handed to
SciPy's HiGHS so the oracle shares no code with the bundled simplex.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..milp import FEAS_TOL, MilpModel, Solution, Status

CHUNK = 1 << 15


class OracleRefused(ValueError):
    pass


def _patterns(start, stop, nb):
    k = np.arange(start, stop, dtype=np.int64)
    return ((k[:, None] >> np.arange(nb)) & 1).astype(float)


def _row_ok(lhs, senses, rhs):
    tol = FEAS_TOL * (1.0 + np.abs(rhs))
    ok = np.ones(lhs.shape[0], dtype=bool)
    for r, s in enumerate(senses):
        d = lhs[:, r] - rhs[r]
        if s == "<=":
            ok &= d <= tol[r]
        elif s == ">=":
            ok &= d >= -tol[r]
        else:
            ok &= np.abs(d) <= tol[r]
    return ok


def brute_force(model: MilpModel, max_binaries: int = 25) -> Solution:
    bins = model.binary_ids
    nb = len(bins)
    if nb > max_binaries:
        raise OracleRefused(f"{nb} binaries exceeds the enumeration limit of {max_binaries}")
    sign = 1.0 if model.sense == "min" else -1.0
    cont = np.flatnonzero(~model.is_binary)
    A, b, senses = model.matrix, model.rhs, model.senses
    lo_b, hi_b = model.lower[bins], model.upper[bins]
    best_z, best_x = np.inf, None
    total = 1 << nb

    if cont.size == 0:
        Ab = A[:, bins]
        cb = sign * model.objective[bins]
        for start in range(0, total, CHUNK):
            P = _patterns(start, min(total, start + CHUNK), nb)
            ok = np.all((P >= lo_b - 1e-9) & (P <= hi_b + 1e-9), axis=1)
            if A.shape[0]:
                ok &= _row_ok(P @ Ab.T, senses, b)
            if not ok.any():
                continue
            z = P[ok] @ cb
            k = int(np.argmin(z))
            if z[k] < best_z - 1e-12:
                best_z, best_x = float(z[k]), P[ok][k]
        if best_x is None:
            return Solution(None, np.nan, Status.INFEASIBLE)
        values = np.zeros(model.n_vars)
        values[bins] = best_x
        return Solution(values, sign * best_z, Status.OPTIMAL)

    Ab, Ac = A[:, bins], A[:, cont]
    cc = sign * model.objective[cont]
    cb = sign * model.objective[bins]
    le = [r for r, s in enumerate(senses) if s == "<="]
    ge = [r for r, s in enumerate(senses) if s == ">="]
    eq = [r for r, s in enumerate(senses) if s == "="]
    A_ub = np.vstack([Ac[le], -Ac[ge]]) if (le or ge) else None
    A_eq = Ac[eq] if eq else None
    bounds = list(zip(model.lower[cont], [None if not np.isfinite(u) else u for u in model.upper[cont]]))
    for start in range(0, total, CHUNK):
        P = _patterns(start, min(total, start + CHUNK), nb)
        ok = np.all((P >= lo_b - 1e-9) & (P <= hi_b + 1e-9), axis=1)
        for p in P[ok]:
            rest = b - Ab @ p
            b_ub = np.concatenate([rest[le], -rest[ge]]) if A_ub is not None else None
            res = linprog(cc, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=rest[eq] if eq else None,
                          bounds=bounds, method="highs")
            if res.status != 0:
                continue
            z = float(cb @ p + res.fun)
            if z < best_z - 1e-9 * (1.0 + abs(z)):
                values = np.zeros(model.n_vars)
                values[bins] = p
                values[cont] = res.x
                best_z, best_x = z, values
    if best_x is None:
        return Solution(None, np.nan, Status.INFEASIBLE)
    return Solution(best_x, sign * best_z, Status.OPTIMAL)
