"""Presolve, LP relaxation and branch-and-bound engine."""

from tampkit.solver.bnb import (LpResult, Solution, SolveOptions, SolveStats,
                                SolverError, branch_and_bound, presolve,
                                solve_lp)
from tampkit.solver.pivot import get_kernel, kernel_name

__all__ = [
    "LpResult",
    "Solution",
    "SolveOptions",
    "SolveStats",
    "SolverError",
    "branch_and_bound",
    "presolve",
    "solve_lp",
    "get_kernel",
    "kernel_name",
]
