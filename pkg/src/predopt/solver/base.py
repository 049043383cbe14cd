from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Protocol, Tuple

from ..milp import MilpModel, Solution, Status


@dataclass(frozen=True)
class SolverOptions:
    time_limit: Optional[float] = None
    rel_gap_tol: float = 1e-6
    node_limit: Optional[int] = None
    seed: int = 0
    feasibility_only: bool = False

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        if self.rel_gap_tol < 0:
            raise ValueError("rel_gap_tol must be >= 0")


@dataclass
class SolveResult:
    solution: Solution
    best_bound: float
    nodes: int = 0
    wall_time: float = 0.0
    trace: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def status(self) -> Status:
        return self.solution.status

    @property
    def objective(self) -> float:
        return self.solution.objective

    @property
    def found_solution(self) -> bool:
        return self.solution.values is not None


class Solver(Protocol):
    """Any backend that can take a model and options and return a :class:`SolveResult`."""

    name: str

    def solve(self, model: MilpModel, opts: SolverOptions = SolverOptions()) -> SolveResult:
        ...


class NumericalFailure(RuntimeError):
    """Raised by callers that cannot continue after a solver reports a numerical breakdown."""


def write_trace_csv(trace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["elapsed_s", "incumbent"])
        for elapsed, inc in trace:
            w.writerow([f"{elapsed:.6f}", repr(float(inc))])
    return path


def read_trace_csv(path) -> list:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return [(float(r["elapsed_s"]), float(r["incumbent"])) for r in rows]
