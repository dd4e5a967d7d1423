from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITER = "max-iter"


class SolverError(RuntimeError):
    """A solve did not reach an optimal point when the caller needed one."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass
class SolveReport:
    status: str
    value: float = np.nan
    x: np.ndarray = None
    y: np.ndarray = None
    z: np.ndarray = None
    dual_value: float = np.nan
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    gap: float = np.nan
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == OPTIMAL

    def require_optimal(self, what="solve"):
        if not self.ok:
            raise SolverError(f"{what} ended with status {self.status!r}", self)
        return self
