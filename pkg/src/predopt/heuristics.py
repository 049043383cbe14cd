"""Baseline heuristics: rolling-window relax-and-fix for lot sizing, LP-guided fixing for knapsack."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .instances import KnapsackInstance, LotSizingInstance
from .milp import FEAS_TOL, Solution, Status, build_model, fix_variables, relax_integrality
from .solver import SolverOptions

FEASIBLE = "Feasible"
FAILURE = "Failure"
INTEGRAL_TOL = 1e-6


@dataclass
class HeuristicResult:
    solution: Solution
    wall_time: float
    iterations: int
    status: str  # FEASIBLE or FAILURE
    reason: str = ""

    @property
    def objective(self) -> float:
        return self.solution.objective

    def to_dict(self) -> dict:
        sol = self.solution
        return {
            "status": self.status,
            "objective": float(sol.objective) if np.isfinite(sol.objective) else None,
            "values": None if sol.values is None else sol.values.tolist(),
            "wall_time": self.wall_time,
            "iterations": self.iterations,
            "reason": self.reason,
        }


def _failure(t0, iters, reason):
    return HeuristicResult(Solution(None, math.nan, Status.INFEASIBLE), time.perf_counter() - t0, iters, FAILURE,
                           reason)


def rf_window(T: int):
    """``(width, step)`` of the relax-and-fix window."""
    return max(1, math.ceil(T / 10)), max(1, math.ceil(T / 20))


def relax_and_fix(inst: LotSizingInstance, solver, opts: SolverOptions = SolverOptions()) -> HeuristicResult:
    """Slide an integral window over the setup variables, freezing its leading periods after each solve."""
    if not isinstance(inst, LotSizingInstance):
        raise TypeError("relax_and_fix expects a LotSizingInstance")
    t0 = time.perf_counter()
    model = build_model(inst)
    T = inst.n_periods
    y = model.groups["y"]
    w, k = rf_window(T)
    fixed = {}
    start, iters = 0, 0
    while True:
        end = min(T, start + w)
        sub = relax_integrality(fix_variables(model, fixed), y[:, end:].reshape(-1))
        res = solver.solve(sub, opts)
        iters += 1
        if not res.found_solution:
            return _failure(t0, iters, f"window starting at period {start} is {res.status.value}")
        if end >= T:
            break
        vals = res.solution.values
        for vid in y[:, start:start + k].reshape(-1):
            fixed[int(vid)] = int(round(vals[vid]))
        start += k
    sol = res.solution
    if not model.is_feasible(sol.values, tol=FEAS_TOL):
        return _failure(t0, iters, "final solution failed the feasibility re-check")
    return HeuristicResult(Solution(sol.values, model.evaluate(sol.values), Status.FEASIBLE),
                           time.perf_counter() - t0, iters, FEASIBLE)


def _stability(x: np.ndarray) -> np.ndarray:
    """Best ``y`` for a fixed ``x``: the bonus is collected exactly when consecutive decisions agree."""
    return (x[:, 1:] == x[:, :-1]).astype(float)


def adaptive_fixing(inst: KnapsackInstance, solver, opts: SolverOptions = SolverOptions()) -> HeuristicResult:
    """Repeatedly solve the LP relaxation and permanently fix item decisions it settles."""
    if not isinstance(inst, KnapsackInstance):
        raise TypeError("adaptive_fixing expects a KnapsackInstance")
    t0 = time.perf_counter()
    model = build_model(inst)
    xs = model.groups["x"]
    ids = [int(v) for v in xs.reshape(-1)]
    fixed = {}
    iters = 0
    while len(fixed) < len(ids):
        res = solver.solve(relax_integrality(fix_variables(model, fixed)), opts)
        iters += 1
        if not res.found_solution:
            return _failure(t0, iters, f"LP relaxation is {res.status.value}")
        vals = res.solution.values
        free = [v for v in ids if v not in fixed]
        settled = False
        for v in free:
            if vals[v] >= 1 - INTEGRAL_TOL:
                fixed[v] = 1
                settled = True
            elif vals[v] <= INTEGRAL_TOL:
                fixed[v] = 0
                settled = True
        if settled:
            continue
        # nothing integral: round the largest fractional value (lowest id on ties)
        v = max(free, key=lambda u: (vals[u], -u))
        trial = dict(fixed)
        trial[v] = 1
        probe = solver.solve(relax_integrality(fix_variables(model, trial)), opts)
        iters += 1
        fixed[v] = 1 if probe.found_solution else 0
    x = np.zeros(xs.shape)
    for (i, t), vid in np.ndenumerate(xs):
        x[i, t] = fixed[int(vid)]
    values = np.zeros(model.n_vars)
    values[xs] = x
    if inst.n_periods > 1:
        values[model.groups["y"]] = _stability(x)
    if not model.is_feasible(values, tol=FEAS_TOL):
        return _failure(t0, iters, "rounded solution failed the feasibility re-check")
    return HeuristicResult(Solution(values, model.evaluate(values), Status.FEASIBLE), time.perf_counter() - t0,
                           iters, FEASIBLE)


def run_heuristic(inst, solver, opts: SolverOptions = SolverOptions()) -> HeuristicResult:
    if isinstance(inst, LotSizingInstance):
        return relax_and_fix(inst, solver, opts)
    return adaptive_fixing(inst, solver, opts)
