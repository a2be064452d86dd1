"""
Weakly smooth objectives: subgradients that are Hölder continuous with exponent nu.

Such an F admits, for every delta > 0 and degree q < 1 + nu, an exact-subgradient oracle
whose Lipschitz constant L(delta) grows as delta shrinks.
"""
from dataclasses import dataclass

import numpy as np

from inexact_pgm.oracle.certificate import OracleCertificate, OracleEval
from inexact_pgm.problems.objective import check_dimension


class HolderParameterError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class HolderFunction:
    """F(x) = sum_i |x_i - c_i|^(1 + nu) / (1 + nu) with Hölder constant H_nu of its subgradient."""
    exponent: float
    holder_constant: float
    centers: np.ndarray

    def __post_init__(self):
        if not (0.0 <= self.exponent <= 1.0):
            raise HolderParameterError(f"Hölder exponent must lie in [0, 1], got {self.exponent}")
        if not self.holder_constant > 0.0:
            raise HolderParameterError(f"Hölder constant must be positive, got {self.holder_constant}")

    @property
    def dim(self) -> int:
        return self.centers.shape[0]

    @property
    def convex(self) -> bool:
        return True

    @property
    def lipschitz(self) -> float:
        # Only a gradient Lipschitz constant when the exponent is 1
        return self.holder_constant

    @property
    def minimizer(self) -> np.ndarray:
        return self.centers

    @property
    def optimal_value(self) -> float:
        return 0.0

    @property
    def lower_bound(self) -> float:
        return 0.0

    def value(self, x: np.ndarray) -> float:
        check_dimension(x, self.dim)
        power = 1.0 + self.exponent
        return float(np.sum(np.abs(x - self.centers) ** power)) / power

    def gradient(self, x: np.ndarray) -> np.ndarray:
        check_dimension(x, self.dim)
        shifted = x - self.centers
        return np.sign(shifted) * np.abs(shifted) ** self.exponent

    def distance_to_minimizer(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(x - self.centers))


def check_holder_args(holder_constant: float, exponent: float, degree: float):
    if not holder_constant > 0.0:
        raise HolderParameterError(f"Hölder constant must be positive, got {holder_constant}")
    if not (0.0 <= exponent <= 1.0):
        raise HolderParameterError(f"Hölder exponent must lie in [0, 1], got {exponent}")
    if not (0.0 <= degree < min(1.0 + exponent, 2.0)):
        raise HolderParameterError(f"Degree must lie in [0, 1 + nu) and below 2, got {degree} for nu={exponent}")


def holder_smoothing_constant(holder_constant: float, exponent: float, degree: float, delta: float) -> float:
    """
    Smallest L such that (H / (1 + nu)) r^(1 + nu) <= (L / 2) r^2 + delta r^q for all r >= 0.

    With lam = (1 + nu - q) / (2 - q) the weighted AM-GM split gives
    L = 2 lam (H / (1 + nu))^(1 / lam) ((1 - lam) / delta)^((1 - lam) / lam).
    For nu = 1 the delta factor is raised to the power 0 and L = H.
    """
    check_holder_args(holder_constant, exponent, degree)
    if exponent == 1.0:
        return float(holder_constant)
    if not delta > 0.0:
        raise HolderParameterError(f"Accuracy must be positive when nu < 1, got {delta}")
    lam = (1.0 + exponent - degree) / (2.0 - degree)
    scale = holder_constant / (1.0 + exponent)
    return 2.0 * lam * scale ** (1.0 / lam) * ((1.0 - lam) / delta) ** ((1.0 - lam) / lam)


def holder_smoothing_coefficient(holder_constant: float, exponent: float, degree: float) -> float:
    """C such that L(delta) = C delta^(-(1 - nu) / (1 + nu - q))."""
    return holder_smoothing_constant(holder_constant, exponent, degree, 1.0)


def eval_holder(holder: HolderFunction, x: np.ndarray, degree: float, delta: float) -> OracleEval:
    lipschitz = holder_smoothing_constant(holder.holder_constant, holder.exponent, degree, delta)
    return OracleEval(point=x,
                      value=holder.value(x),
                      gradient=holder.gradient(x),
                      certificate=OracleCertificate(delta, lipschitz, degree, convex_lower_bound=holder.convex))
