from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from inexact_pgm.problems.objective import ProblemSpecError, check_dimension


@dataclass(frozen=True, eq=False)
class QuadraticProblem:
    """Least squares F(x) = ||M x - b||^2 / 2 with a stored minimizer and optimal value."""
    operator: np.ndarray
    offset: np.ndarray
    minimizer: np.ndarray
    optimal_value: float
    radius: float = 4.0
    lipschitz: float = field(init=False)

    def __post_init__(self):
        if self.operator.ndim != 2 or self.offset.shape != (self.operator.shape[0],):
            raise ProblemSpecError(
                f"Operator of shape {self.operator.shape} doesn't match offset of shape {self.offset.shape}")
        object.__setattr__(self, "lipschitz", float(np.max(np.linalg.eigvalsh(self.normal_matrix))))

    @classmethod
    def from_operator(cls, operator: np.ndarray, offset: np.ndarray, radius: float = 4.0) -> "QuadraticProblem":
        operator = np.atleast_2d(np.asarray(operator, dtype=float))
        offset = np.asarray(offset, dtype=float)
        minimizer = np.linalg.lstsq(operator, offset, rcond=None)[0]
        residual = operator @ minimizer - offset
        return cls(operator, offset, minimizer, 0.5 * float(residual @ residual), radius)

    @property
    def dim(self) -> int:
        return self.operator.shape[1]

    @property
    def normal_matrix(self) -> np.ndarray:
        return self.operator.T @ self.operator

    @property
    def lower_bound(self) -> float:
        return self.optimal_value

    def value(self, x: np.ndarray) -> float:
        check_dimension(x, self.dim)
        residual = self.operator @ x - self.offset
        return 0.5 * float(residual @ residual)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        check_dimension(x, self.dim)
        return self.operator.T @ (self.operator @ x - self.offset)

    def distance_to_minimizer(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(x - self.minimizer))


def generate_quadratic_instance(n: int,
                                conditioning: float = 10.0,
                                seed: int = 0,
                                radius: float = 4.0,
                                minimizer: Optional[np.ndarray] = None) -> QuadraticProblem:
    """
    Random least squares with singular values log-spaced between 1 and 1 / conditioning,
    so the normal matrix has condition number conditioning^2 and L = 1.
    """
    if n < 1:
        raise ProblemSpecError(f"Invalid dimension n={n}")
    if not conditioning >= 1.0:
        raise ProblemSpecError(f"Conditioning must be at least 1, got {conditioning}")
    rng = np.random.default_rng(seed)
    left, _ = np.linalg.qr(rng.standard_normal((n, n)))
    right, _ = np.linalg.qr(rng.standard_normal((n, n)))
    singular_values = np.geomspace(1.0, 1.0 / conditioning, n)
    operator = left @ np.diag(singular_values) @ right.T
    if minimizer is None:
        minimizer = rng.standard_normal(n) / np.sqrt(n)
    offset = operator @ minimizer
    return QuadraticProblem(operator, offset, np.asarray(minimizer, dtype=float), 0.0, radius)
