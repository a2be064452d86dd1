import math
from dataclasses import dataclass, replace
from typing import Optional

from inexact_pgm.oracle.certificate import majorize_amgm


class ScheduleError(Exception):
    pass


@dataclass(frozen=True)
class ScheduleConfig:
    """
    Step sizes alpha_k = step_scale / ((L_k + q rho)(k + 1)^zeta) and accuracies
    delta_k = delta0 / (k + 1)^(beta (2 - q) / 2).

    L_k is the constant L unless lipschitz_from_oracle is set, in which case the solvers
    use the Lipschitz constant certified by the oracle at every iteration.
    """
    L: float
    rho: float
    degree: float
    delta0: float
    beta: float = 0.0
    zeta: float = 0.0
    max_iters: int = 1000
    step_scale: float = 1.0
    lipschitz_from_oracle: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0.0):
            raise ScheduleError(f"L must be positive, got {self.L}")
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ScheduleError(f"rho must be positive, got {self.rho}")
        if not (0.0 <= self.degree < 2.0):
            raise ScheduleError(f"Degree must lie in [0, 2), got {self.degree}")
        if not (math.isfinite(self.delta0) and self.delta0 >= 0.0):
            raise ScheduleError(f"Base accuracy must be nonnegative, got {self.delta0}")
        if not (0.0 <= self.beta < 1.0) or not (0.0 <= self.zeta < 1.0):
            raise ScheduleError(f"beta and zeta must lie in [0, 1), got {self.beta} and {self.zeta}")
        if self.max_iters < 1:
            raise ScheduleError(f"max_iters must be positive, got {self.max_iters}")
        if not (0.0 < self.step_scale <= 1.0):
            raise ScheduleError(f"step_scale must lie in (0, 1], got {self.step_scale}")

    def step(self, k: int, lipschitz: Optional[float] = None, rho: Optional[float] = None) -> float:
        lipschitz = self.L if lipschitz is None else lipschitz
        rho = self.rho if rho is None else rho
        return self.step_scale / ((lipschitz + self.degree * rho) * (k + 1) ** self.zeta)

    def accuracy(self, k: int) -> float:
        return self.delta0 / (k + 1) ** (self.beta * (2.0 - self.degree) / 2.0)

    def additive(self, k: int, rho: Optional[float] = None) -> float:
        """Constant of the majorized descent inequality at iteration k."""
        return majorize_amgm(self.accuracy(k), self.degree, self.rho if rho is None else rho)[1]

    def with_rho(self, rho: float) -> "ScheduleConfig":
        return replace(self, rho=rho)
