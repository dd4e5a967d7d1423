"""Self-contained LP and SOCP solvers."""
from .lp import LinearProgram, solve_lp
from .report import INFEASIBLE, MAX_ITER, OPTIMAL, UNBOUNDED, SolveReport, SolverError
from .socp import FREE, NONNEG, SOC, ConeProgram, solve_socp

__all__ = ["LinearProgram", "ConeProgram", "SolveReport", "SolverError", "solve_lp",
           "solve_socp", "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "MAX_ITER", "FREE",
           "NONNEG", "SOC"]
