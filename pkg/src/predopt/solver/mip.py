"""Bundled LP and branch-and-bound MIP solver."""
from __future__ import annotations

import heapq
import time

import numpy as np

from ..milp import FEAS_TOL, MilpModel, Solution, Status
from . import simplex
from .base import SolveResult, SolverOptions

INT_TOL = 1e-6


def _min_form(model: MilpModel):
    sign = 1.0 if model.sense == "min" else -1.0
    return sign, sign * model.objective


def _lp(model, c, lb, ub):
    return simplex.solve_standard(c, model.matrix, model.senses, model.rhs, lb, ub)


def solve_lp(model: MilpModel) -> SolveResult:
    """Solve the continuous relaxation of ``model`` (binaries treated as [0, 1])."""
    start = time.perf_counter()
    sign, c = _min_form(model)
    st, x, z, _ = _lp(model, c, model.lower, model.upper)
    elapsed = time.perf_counter() - start
    if st == simplex.OPTIMAL:
        if model.violation(x, integrality=False) > FEAS_TOL:
            sol = Solution(None, np.nan, Status.NUMERICAL_FAILURE)
            return SolveResult(sol, np.nan, 0, elapsed)
        obj = sign * z
        return SolveResult(Solution(x, obj, Status.OPTIMAL), obj, 0, elapsed)
    status = {
        simplex.INFEASIBLE: Status.INFEASIBLE,
        simplex.UNBOUNDED: Status.UNBOUNDED,
        simplex.FAILED: Status.NUMERICAL_FAILURE,
    }[st]
    bound = -sign * np.inf if st == simplex.UNBOUNDED else np.nan
    return SolveResult(Solution(None, np.nan, status), bound, 0, elapsed)


class BranchAndBound:
    """Best-bound branch-and-bound over LP relaxations.

    Until the first incumbent is found the search plunges depth-first,
    following the rounding direction of the branching variable.  Branching
    picks the most fractional binary; ties go to the lowest variable id.
    """

    name = "bundled-bnb"

    def solve(self, model: MilpModel, opts: SolverOptions = SolverOptions()) -> SolveResult:
        start = time.perf_counter()

        def elapsed():
            return time.perf_counter() - start

        sign, c = _min_form(model)
        bins = model.binary_ids
        lb0, ub0 = model.lower.copy(), model.upper.copy()
        inc_x, inc_z = None, np.inf
        trace = []
        nodes = 0
        counter = 0
        heap = []  # (bound, seq, lb, ub)
        dive = (-np.inf, lb0, ub0)
        status = None
        open_bound = -np.inf

        def prune_tol(z):
            return max(1e-9, opts.rel_gap_tol * abs(z)) if np.isfinite(z) else 0.0

        def gap_closed():
            if inc_x is None:
                return False
            lo = min([h[0] for h in heap] + ([dive[0]] if dive is not None else []), default=inc_z)
            return inc_z - lo <= opts.rel_gap_tol * max(abs(inc_z), 1e-10)

        while True:
            if opts.time_limit is not None and elapsed() >= opts.time_limit:
                status = Status.TIME_LIMIT
                break
            if opts.node_limit is not None and nodes >= opts.node_limit:
                status = Status.TIME_LIMIT
                break
            if dive is not None:
                bound, lb, ub = dive
                dive = None
            elif heap:
                bound, _, lb, ub = heapq.heappop(heap)
            else:
                break
            if bound >= inc_z - prune_tol(inc_z):
                continue
            st, x, z, _ = simplex.solve_standard(c, model.matrix, model.senses, model.rhs, lb, ub)
            nodes += 1
            if st == simplex.INFEASIBLE:
                continue
            if st == simplex.UNBOUNDED:
                status = Status.UNBOUNDED
                break
            if st == simplex.FAILED:
                status = Status.NUMERICAL_FAILURE
                break
            if z >= inc_z - prune_tol(inc_z):
                continue
            xb = x[bins]
            dist = np.abs(xb - np.round(xb))
            worst = dist.max(initial=0.0)
            if worst <= INT_TOL:
                cand = self._polish(model, c, x, bins, lb, ub)
                if cand is not None and cand[1] < inc_z - prune_tol(inc_z):
                    inc_x, inc_z = cand
                    trace.append((elapsed(), sign * inc_z))
                    if opts.feasibility_only:
                        status = Status.FEASIBLE
                        break
                    if gap_closed():
                        break
                continue
            k = int(np.flatnonzero(dist >= worst - 1e-12)[0])
            j = bins[k]
            down_ub = ub.copy()
            down_ub[j] = 0.0
            up_lb = lb.copy()
            up_lb[j] = 1.0
            down = (z, lb, down_ub)
            up = (z, up_lb, ub)
            if inc_x is None:
                first, second = (up, down) if x[j] >= 0.5 else (down, up)
                dive = first
                counter += 1
                heapq.heappush(heap, (second[0], counter, second[1], second[2]))
            else:
                for child in (down, up):
                    counter += 1
                    heapq.heappush(heap, (child[0], counter, child[1], child[2]))
            if gap_closed():
                break

        if status in (Status.TIME_LIMIT,):
            open_bound = min([h[0] for h in heap] + ([dive[0]] if dive is not None else []), default=inc_z)
        if status == Status.NUMERICAL_FAILURE:
            sol = Solution(None, np.nan, Status.NUMERICAL_FAILURE)
            return SolveResult(sol, np.nan, nodes, elapsed(), trace)
        if status == Status.UNBOUNDED:
            return SolveResult(Solution(None, sign * -np.inf, Status.UNBOUNDED), sign * -np.inf, nodes, elapsed(),
                               trace)
        if status is None:
            if inc_x is None:
                return SolveResult(Solution(None, np.nan, Status.INFEASIBLE), np.nan, nodes, elapsed(), trace)
            lo = min([h[0] for h in heap], default=inc_z)
            return SolveResult(Solution(inc_x, sign * inc_z, Status.OPTIMAL), sign * min(lo, inc_z), nodes,
                               elapsed(), trace)
        if status == Status.FEASIBLE:
            return SolveResult(Solution(inc_x, sign * inc_z, Status.FEASIBLE), np.nan, nodes, elapsed(), trace)
        # time or node limit
        bound = sign * min(open_bound, inc_z)
        if inc_x is None:
            return SolveResult(Solution(None, np.nan, Status.TIME_LIMIT), bound, nodes, elapsed(), trace)
        return SolveResult(Solution(inc_x, sign * inc_z, Status.TIME_LIMIT), bound, nodes, elapsed(), trace)

    @staticmethod
    def _polish(model, c, x, bins, lb, ub):
        """Snap near-integral binaries to 0/1 and re-optimize the continuous part if needed."""
        xb = np.round(x[bins])
        if np.array_equal(xb, x[bins]):
            return x, float(c @ x)
        lb2, ub2 = lb.copy(), ub.copy()
        lb2[bins] = xb
        ub2[bins] = xb
        st, x2, z2, _ = simplex.solve_standard(c, model.matrix, model.senses, model.rhs, lb2, ub2)
        if st != simplex.OPTIMAL or model.violation(x2) > FEAS_TOL:
            return None
        return x2, z2


def solve_mip(model: MilpModel, opts: SolverOptions = SolverOptions()) -> SolveResult:
    return BranchAndBound().solve(model, opts)
