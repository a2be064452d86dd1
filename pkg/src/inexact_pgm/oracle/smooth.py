"""
Constructive degree-1 oracles for smooth objectives: additive gradient noise,
gradients at shifted points, mini-batches of a finite sum and approximate
inner maximization of a saddle representation.
"""
import math
from dataclasses import dataclass
from enum import Enum, auto
from functools import cached_property
from typing import Sequence

import numpy as np

from inexact_pgm.oracle.certificate import OracleCertificate, OracleEval
from inexact_pgm.problems.objective import ProblemSpecError, SmoothObjective, check_dimension


class OracleInputError(Exception):
    pass


class MinibatchScaling(Enum):
    MEAN = auto()
    SUM = auto()


def bounded_noise(rng: np.random.Generator, dim: int, bound: float) -> np.ndarray:
    """
    Gaussian direction scaled to norm exactly `bound` with probability 1/2,
    otherwise to a uniformly distributed point strictly inside the ball.
    """
    direction = rng.standard_normal(dim)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        return np.zeros(dim)
    if rng.random() < 0.5:
        radius = bound
    else:
        radius = bound * rng.random() ** (1.0 / dim)
    return direction * (radius / norm)


def check_bound(bound: float, name: str):
    if not (math.isfinite(bound) and bound >= 0.0):
        raise OracleInputError(f"{name} must be a finite nonnegative number, got {bound}")


def eval_noisy_gradient(problem: SmoothObjective,
                        x: np.ndarray,
                        noise_norm_bound: float,
                        rng: np.random.Generator) -> OracleEval:
    check_bound(noise_norm_bound, "Noise bound")
    gradient = problem.gradient(x)
    if noise_norm_bound > 0.0:
        gradient = gradient + bounded_noise(rng, x.shape[0], noise_norm_bound)
    return OracleEval(point=x,
                      value=problem.value(x),
                      gradient=gradient,
                      certificate=OracleCertificate(noise_norm_bound, problem.lipschitz, 1.0))


def eval_shifted_point(problem: SmoothObjective,
                       x: np.ndarray,
                       shift_bound: float,
                       rng: np.random.Generator) -> OracleEval:
    check_bound(shift_bound, "Shift bound")
    shifted = x
    if shift_bound > 0.0:
        shifted = x + bounded_noise(rng, x.shape[0], shift_bound)
    return OracleEval(point=x,
                      value=problem.value(x),
                      gradient=problem.gradient(shifted),
                      certificate=OracleCertificate(problem.lipschitz * shift_bound, problem.lipschitz, 1.0))


def eval_minibatch(components: Sequence[SmoothObjective],
                   x: np.ndarray,
                   batch: Sequence[int],
                   claimed: OracleCertificate,
                   scaling: MinibatchScaling = MinibatchScaling.MEAN) -> OracleEval:
    """
    Average of the component gradients over the batch.

    Under MEAN scaling F is read as the mean of the components, under SUM as their sum,
    and both the value and the gradient follow that reading. The certificate is the caller's claim.
    """
    if len(batch) == 0:
        raise OracleInputError("Batch is empty")
    for index in batch:
        if not 0 <= index < len(components):
            raise OracleInputError(f"Batch index {index} is out of range for {len(components)} components")
    gradient = np.sum([components[index].gradient(x) for index in batch], axis=0) / len(batch)
    value = math.fsum(component.value(x) for component in components)
    if scaling is MinibatchScaling.SUM:
        gradient = gradient * len(components)
    else:
        value = value / len(components)
    return OracleEval(point=x, value=value, gradient=gradient, certificate=claimed)


@dataclass(frozen=True, eq=False)
class SaddleProblem:
    """
    F(x) = max_u G(u) + <A u, x> with G(u) = -(kappa / 2) ||u - c||^2.

    The operator A has shape (n, m): it maps the inner variable u in R^m to the x-space R^n.
    """
    operator: np.ndarray
    concave_center: np.ndarray
    concavity: float
    inner_iterations: int = 1

    def __post_init__(self):
        if not self.concavity > 0.0:
            raise OracleInputError(f"Concavity must be positive, got {self.concavity}")
        if self.operator.ndim != 2 or self.concave_center.shape != (self.operator.shape[1],):
            raise OracleInputError(
                f"Operator of shape {self.operator.shape} doesn't match center of shape {self.concave_center.shape}")
        if self.inner_iterations < 1:
            raise OracleInputError(f"Inner iterations must be positive, got {self.inner_iterations}")
        if not np.all(np.isfinite(self.operator)) or not np.any(self.operator):
            raise ProblemSpecError("Operator must be finite and nonzero, F is linear otherwise")

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @cached_property
    def spectral_norm(self) -> float:
        return spectral_norm(self.operator)

    @property
    def lipschitz(self) -> float:
        return self.spectral_norm ** 2 / self.concavity

    def inner_value(self, x: np.ndarray, u: np.ndarray) -> float:
        deviation = u - self.concave_center
        return -0.5 * self.concavity * float(deviation @ deviation) + float((self.operator @ u) @ x)

    def maximizer(self, x: np.ndarray) -> np.ndarray:
        # Gradient ascent with step 1 / kappa from c; the first step lands on c + A^T x / kappa
        check_dimension(x, self.dim)
        pull = self.operator.T @ x
        u = self.concave_center
        for _ in range(self.inner_iterations):
            u = u + (pull - self.concavity * (u - self.concave_center)) / self.concavity
        return u

    def value(self, x: np.ndarray) -> float:
        return self.inner_value(x, self.maximizer(x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.operator @ self.maximizer(x)


def spectral_norm(operator: np.ndarray, iterations: int = 200, tolerance: float = 1e-10) -> float:
    """Largest singular value by power iteration on A^T A from the normalized all-ones vector."""
    vector = np.ones(operator.shape[1]) / math.sqrt(operator.shape[1])
    estimate = 0.0
    for _ in range(iterations):
        image = operator.T @ (operator @ vector)
        norm = float(np.linalg.norm(image))
        if norm == 0.0:
            return 0.0
        vector = image / norm
        previous, estimate = estimate, math.sqrt(norm)
        if abs(estimate - previous) <= tolerance * estimate:
            break
    return estimate


def eval_saddle(saddle: SaddleProblem,
                x: np.ndarray,
                inner_accuracy: float,
                rng: np.random.Generator) -> OracleEval:
    check_bound(inner_accuracy, "Inner accuracy")
    exact = saddle.maximizer(x)
    approximate = exact
    if inner_accuracy > 0.0:
        approximate = exact + bounded_noise(rng, exact.shape[0], inner_accuracy)
    norm = saddle.spectral_norm
    return OracleEval(point=x,
                      value=saddle.inner_value(x, exact),
                      gradient=saddle.operator @ approximate,
                      certificate=OracleCertificate(inner_accuracy * norm, saddle.lipschitz, 1.0))
