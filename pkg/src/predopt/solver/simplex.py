"""Dense two-phase tableau simplex.

Dantzig pricing is used until a streak of degenerate pivots is seen, after
which Bland's rule takes over for the rest of the phase, which rules out
cycling.
"""
from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
DEGENERATE_STREAK = 25

OPTIMAL, INFEASIBLE, UNBOUNDED, FAILED = "optimal", "infeasible", "unbounded", "failed"


class _Tableau:
    def __init__(self, T, basis, d, n_iter_cap):
        self.T = T  # m x (ncol + 1), last column rhs
        self.basis = basis
        self.d = d  # reduced costs, last entry is -objective
        self.iters = 0
        self.cap = n_iter_cap

    def pivot(self, r, q):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.d -= self.d[q] * T[r]
        self.basis[r] = q

    def run(self, allowed):
        """Iterate to optimality over columns where ``allowed`` is true."""
        bland = False
        streak = 0
        T = self.T
        ncol = T.shape[1] - 1
        scale = max(1.0, float(np.max(np.abs(self.d[:ncol][allowed]), initial=0.0)))
        tol = COST_TOL * scale
        while True:
            if self.iters >= self.cap:
                return FAILED
            rc = np.where(allowed, self.d[:ncol], 0.0)
            cand = np.flatnonzero(rc < -tol)
            if cand.size == 0:
                return OPTIMAL
            q = int(cand[0]) if bland else int(cand[np.argmin(rc[cand])])
            colq = T[:, q]
            rows = np.flatnonzero(colq > PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / colq[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            if bland or ties.size == 1:
                r = int(ties[np.argmin(self.basis[ties])]) if ties.size > 1 else int(ties[0])
            else:
                r = int(ties[np.argmax(colq[ties])])
            if best <= 1e-12:
                streak += 1
                if streak >= DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
            self.pivot(r, q)
            self.iters += 1
            # rhs should stay nonnegative; clip roundoff
            neg = T[:, -1] < 0
            if neg.any():
                if T[neg, -1].min() < -1e-7:
                    return FAILED
                T[neg, -1] = 0.0


def solve_standard(c, A, senses, b, lb, ub, max_iter=None):
    """Minimize ``c @ x`` subject to ``A x (senses) b`` and ``lb <= x <= ub``.

    Returns ``(status, x, objective, iterations)``; ``x`` is None unless optimal.
    Lower bounds must be finite.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, len(c))
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = len(c)
    if np.any(~np.isfinite(lb)):
        raise ValueError("simplex needs finite lower bounds")
    if np.any(ub < lb - 1e-12):
        return INFEASIBLE, None, np.nan, 0

    fixed = ub - lb <= 1e-12
    free = np.flatnonzero(~fixed)
    x_full = lb.copy()
    b_shift = b - A @ lb
    Af = A[:, free]
    cf = c[free]
    width = ub[free] - lb[free]

    rows, sense_list, rhs = [], [], []
    for r in range(A.shape[0]):
        row = Af[r]
        nz = np.abs(row) > 0
        if not nz.any():
            v = b_shift[r]
            tol = 1e-9 * (1.0 + abs(b[r]))
            s = senses[r]
            if (s == "<=" and v < -tol) or (s == ">=" and v > tol) or (s == "=" and abs(v) > tol):
                return INFEASIBLE, None, np.nan, 0
            continue
        m = np.max(np.abs(row))
        rows.append(row / m)
        sense_list.append(senses[r])
        rhs.append(b_shift[r] / m)
    for k in np.flatnonzero(np.isfinite(width)):
        e = np.zeros(len(free))
        e[k] = 1.0
        rows.append(e)
        sense_list.append("<=")
        rhs.append(width[k])

    nf = len(free)
    if not rows:
        # only bounds: each free var sits at whichever bound minimizes cost
        if np.any(cf < -COST_TOL):
            bad = cf < -COST_TOL
            if np.any(~np.isfinite(width[bad])):
                return UNBOUNDED, None, -np.inf, 0
        xf = np.where(cf < 0, width, 0.0)
        x_full[free] = lb[free] + xf
        return OPTIMAL, x_full, float(c @ x_full), 0

    M = np.array(rows)
    bb = np.array(rhs)
    sen = list(sense_list)
    for r in range(len(bb)):
        if bb[r] < 0:
            M[r] = -M[r]
            bb[r] = -bb[r]
            sen[r] = {"<=": ">=", ">=": "<=", "=": "="}[sen[r]]
    m = len(bb)
    n_slack = sum(1 for s in sen if s != "=")
    n_art = sum(1 for s in sen if s != "<=")
    ncol = nf + n_slack + n_art
    T = np.zeros((m, ncol + 1))
    T[:, :nf] = M
    T[:, -1] = bb
    basis = np.empty(m, dtype=np.int64)
    is_art = np.zeros(ncol, dtype=bool)
    ks, ka = nf, nf + n_slack
    for r, s in enumerate(sen):
        if s == "<=":
            T[r, ks] = 1.0
            basis[r] = ks
            ks += 1
        elif s == ">=":
            T[r, ks] = -1.0
            ks += 1
            T[r, ka] = 1.0
            basis[r] = ka
            is_art[ka] = True
            ka += 1
        else:
            T[r, ka] = 1.0
            basis[r] = ka
            is_art[ka] = True
            ka += 1

    cap = max_iter if max_iter is not None else 50 * (m + ncol) + 1000
    tab = None
    if n_art:
        cost1 = np.zeros(ncol + 1)
        cost1[:ncol][is_art] = 1.0
        d = cost1.copy()
        for r in range(m):
            if is_art[basis[r]]:
                d -= T[r]
        tab = _Tableau(T, basis, d, cap)
        st = tab.run(np.ones(ncol, dtype=bool))
        if st == FAILED:
            return FAILED, None, np.nan, tab.iters
        phase1 = -tab.d[-1]
        if phase1 > 1e-8 * max(1.0, float(bb.max(initial=0.0))):
            return INFEASIBLE, None, np.nan, tab.iters
        # drive zero-level artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if is_art[tab.basis[r]]:
                cand = np.flatnonzero((~is_art) & (np.abs(tab.T[r, :ncol]) > 1e-9))
                if cand.size:
                    tab.pivot(r, int(cand[np.argmax(np.abs(tab.T[r, cand]))]))
                else:
                    keep[r] = False
        T = tab.T[keep]
        basis = tab.basis[keep]
        iters = tab.iters
    else:
        iters = 0

    cols = np.flatnonzero(~is_art)
    colmap = -np.ones(ncol, dtype=np.int64)
    colmap[cols] = np.arange(len(cols))
    T = np.hstack([T[:, cols], T[:, -1:]])
    basis = colmap[basis]
    ncol2 = len(cols)
    cost2 = np.zeros(ncol2 + 1)
    cost2[:nf] = cf
    d = cost2.copy()
    for r in range(T.shape[0]):
        d -= cost2[basis[r]] * T[r]
    tab = _Tableau(T, basis, d, cap)
    tab.iters = iters
    st = tab.run(np.ones(ncol2, dtype=bool))
    if st != OPTIMAL:
        return st, None, (-np.inf if st == UNBOUNDED else np.nan), tab.iters
    xf = np.zeros(ncol2)
    xf[tab.basis] = tab.T[:, -1]
    x_full[free] = lb[free] + xf[:nf]
    return OPTIMAL, x_full, float(c @ x_full), tab.iters
