"""Adapter exposing SciPy's HiGHS MILP solver through the :class:`Solver` contract."""
from __future__ import annotations

import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ..milp import FEAS_TOL, MilpModel, Solution, Status
from .base import SolveResult, SolverOptions


class HighsSolver:
    """External backend.  HiGHS does not report intermediate incumbents through
    SciPy, so the trace holds only the final incumbent."""

    name = "scipy-highs"

    def solve(self, model: MilpModel, opts: SolverOptions = SolverOptions()) -> SolveResult:
        start = time.perf_counter()
        sign = 1.0 if model.sense == "min" else -1.0
        c = sign * model.objective
        cons = []
        if model.constraints:
            lo = np.where([s == "<=" for s in model.senses], -np.inf, model.rhs)
            hi = np.where([s == ">=" for s in model.senses], np.inf, model.rhs)
            cons.append(LinearConstraint(model.matrix, lo, hi))
        options = {"disp": False, "mip_rel_gap": opts.rel_gap_tol}
        if opts.feasibility_only:
            options["mip_rel_gap"] = 1e30
        if opts.time_limit is not None:
            options["time_limit"] = max(float(opts.time_limit), 1e-3)
        if opts.node_limit is not None:
            options["node_limit"] = int(opts.node_limit)
        res = milp(c, constraints=cons, integrality=model.is_binary.astype(int),
                   bounds=Bounds(model.lower, model.upper), options=options)
        wall = time.perf_counter() - start
        x = None if res.x is None else np.asarray(res.x, dtype=float)
        if x is not None:
            bins = model.binary_ids
            x[bins] = np.round(x[bins])
            if model.violation(x) > FEAS_TOL:
                x = None
        dual = getattr(res, "mip_dual_bound", None)
        if dual is None and res.status == 0 and res.fun is not None:
            dual = res.fun  # pure LP or bound not reported: the optimum is its own bound
        bound = sign * dual if dual is not None and res.status in (0, 1) else np.nan
        if res.status == 0 and x is not None:
            obj = sign * float(c @ x)
            status = Status.FEASIBLE if opts.feasibility_only else Status.OPTIMAL
            return SolveResult(Solution(x, obj, status), bound, 0, wall, [(wall, obj)])
        if res.status == 1:
            obj = sign * float(c @ x) if x is not None else np.nan
            trace = [(wall, obj)] if x is not None else []
            return SolveResult(Solution(x, obj, Status.TIME_LIMIT), bound, 0, wall, trace)
        if res.status == 2:
            return SolveResult(Solution(None, np.nan, Status.INFEASIBLE), np.nan, 0, wall)
        if res.status == 3:
            return SolveResult(Solution(None, -sign * np.inf, Status.UNBOUNDED), np.nan, 0, wall)
        return SolveResult(Solution(None, np.nan, Status.NUMERICAL_FAILURE), np.nan, 0, wall)
