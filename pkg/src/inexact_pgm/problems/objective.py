"""
Objective handles consumed by the oracles and the solvers.

An objective exposes its exact value and gradient together with the constant L_F
of its gradient.
"""
from dataclasses import dataclass
from typing import Protocol

import numpy as np


class ProblemSpecError(Exception):
    pass


class SmoothObjective(Protocol):
    dim: int
    lipschitz: float

    def value(self, x: np.ndarray) -> float:
        """Exact value F(x)."""
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Exact gradient (or a subgradient) of F at x."""
        raise NotImplementedError


def check_dimension(x: np.ndarray, dim: int):
    if x.ndim != 1 or x.shape[0] != dim:
        raise ProblemSpecError(f"Expected a vector of dimension {dim}, got shape {x.shape}")


@dataclass(frozen=True)
class ConstantObjective:
    dim: int
    level: float = 0.0
    lipschitz: float = 1.0

    def value(self, x: np.ndarray) -> float:
        check_dimension(x, self.dim)
        return float(self.level)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        check_dimension(x, self.dim)
        return np.zeros(self.dim)


@dataclass(frozen=True, eq=False)
class LinearObjective:
    """F(x) = <coefficients, x> + offset, used as a finite-sum component."""
    coefficients: np.ndarray
    offset: float = 0.0
    lipschitz: float = 0.0

    @property
    def dim(self) -> int:
        return self.coefficients.shape[0]

    def value(self, x: np.ndarray) -> float:
        check_dimension(x, self.dim)
        return float(self.coefficients @ x) + self.offset

    def gradient(self, x: np.ndarray) -> np.ndarray:
        check_dimension(x, self.dim)
        return np.array(self.coefficients, dtype=float, copy=True)
