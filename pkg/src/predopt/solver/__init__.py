from .base import NumericalFailure, SolveResult, Solver, SolverOptions, read_trace_csv, write_trace_csv
from .highs import HighsSolver
from .mip import BranchAndBound, solve_lp, solve_mip
from .oracle import OracleRefused, brute_force


def get_solver(name: str = "bundled"):
    if name in ("bundled", BranchAndBound.name):
        return BranchAndBound()
    if name in ("highs", HighsSolver.name):
        return HighsSolver()
    raise ValueError(f"unknown solver backend {name!r}")


__all__ = [
    "BranchAndBound",
    "HighsSolver",
    "NumericalFailure",
    "OracleRefused",
    "SolveResult",
    "Solver",
    "SolverOptions",
    "brute_force",
    "get_solver",
    "read_trace_csv",
    "solve_lp",
    "solve_mip",
    "write_trace_csv",
]
