"""
Oracle handles driven by the solvers.

A handle maps a requested certificate accuracy delta to the inexactness parameter of its
oracle family, so the schedules of the solvers never need to know which family they run.
Handles hold no mutable state; randomness comes from the generator passed to evaluate.
"""
from abc import ABC, abstractmethod
from enum import Enum, auto
from typing import Optional, Sequence

import numpy as np

from inexact_pgm.oracle.certificate import OracleCertificate, OracleEval, restrict_to_ball
from inexact_pgm.oracle.holder import HolderFunction, eval_holder, holder_smoothing_constant
from inexact_pgm.oracle.smooth import (MinibatchScaling, OracleInputError, SaddleProblem, eval_minibatch,
                                       eval_noisy_gradient, eval_saddle, eval_shifted_point)
from inexact_pgm.problems.objective import SmoothObjective


class OracleKind(Enum):
    EXACT = auto()
    NOISY_GRADIENT = auto()
    SHIFTED_POINT = auto()
    MINIBATCH = auto()
    SADDLE = auto()
    HOLDER = auto()


class InexactOracle(ABC):
    kind: OracleKind
    degree: float

    @abstractmethod
    def evaluate(self, x: np.ndarray, delta: float, rng: np.random.Generator) -> OracleEval:
        """
        :param delta: accuracy of the certificate the caller needs at this point
        :param rng: generator owning all randomness of this call
        """
        pass

    def claimed_lipschitz(self, delta: float) -> Optional[float]:
        """Lipschitz constant certified at accuracy delta, if it doesn't depend on the query point."""
        return None


class ExactOracle(InexactOracle):
    kind = OracleKind.EXACT

    def __init__(self, problem: SmoothObjective, degree: float = 1.0, convex: bool = False):
        self.problem = problem
        self.degree = degree
        self.convex = convex

    def evaluate(self, x, delta, rng):
        return OracleEval(point=x,
                          value=self.problem.value(x),
                          gradient=self.problem.gradient(x),
                          certificate=OracleCertificate(delta, self.problem.lipschitz, self.degree,
                                                        convex_lower_bound=self.convex))

    def claimed_lipschitz(self, delta):
        return self.problem.lipschitz


class NoisyGradientOracle(InexactOracle):
    """
    Gradient plus bounded noise.

    Without a ball radius the handle is the plain degree-1 oracle and the noise bound equals delta.
    With a radius the iterates are assumed to stay in an l1 ball of that radius, any degree
    q in [0, 1] is allowed and the noise bound is delta / (2R)^(1 - q).
    """
    kind = OracleKind.NOISY_GRADIENT

    def __init__(self, problem: SmoothObjective, degree: float = 1.0, ball_radius: Optional[float] = None):
        if ball_radius is None and degree != 1.0:
            raise OracleInputError(f"Noisy gradients have degree 1 unless restricted to a ball, got {degree}")
        if ball_radius is not None and not (0.0 <= degree <= 1.0):
            raise OracleInputError(f"Ball restriction supports degrees in [0, 1], got {degree}")
        self.problem = problem
        self.degree = degree
        self.ball_radius = ball_radius

    def noise_bound(self, delta: float) -> float:
        if self.ball_radius is None:
            return delta
        return delta / (2.0 * self.ball_radius) ** (1.0 - self.degree)

    def evaluate(self, x, delta, rng):
        evaluation = eval_noisy_gradient(self.problem, x, self.noise_bound(delta), rng)
        if self.ball_radius is None:
            return evaluation
        return OracleEval(point=evaluation.point,
                          value=evaluation.value,
                          gradient=evaluation.gradient,
                          certificate=restrict_to_ball(evaluation.certificate, self.ball_radius, self.degree))

    def claimed_lipschitz(self, delta):
        return self.problem.lipschitz


class ShiftedPointOracle(InexactOracle):
    kind = OracleKind.SHIFTED_POINT
    degree = 1.0

    def __init__(self, problem: SmoothObjective):
        self.problem = problem

    def evaluate(self, x, delta, rng):
        return eval_shifted_point(self.problem, x, delta / self.problem.lipschitz, rng)

    def claimed_lipschitz(self, delta):
        return self.problem.lipschitz


class SaddleOracle(InexactOracle):
    kind = OracleKind.SADDLE
    degree = 1.0

    def __init__(self, saddle: SaddleProblem):
        self.saddle = saddle

    def evaluate(self, x, delta, rng):
        norm = self.saddle.spectral_norm
        return eval_saddle(self.saddle, x, delta / norm if norm > 0.0 else 0.0, rng)

    def claimed_lipschitz(self, delta):
        return self.saddle.lipschitz


class HolderOracle(InexactOracle):
    kind = OracleKind.HOLDER

    def __init__(self, holder: HolderFunction, degree: float):
        self.holder = holder
        self.degree = degree

    def evaluate(self, x, delta, rng):
        return eval_holder(self.holder, x, self.degree, delta)

    def claimed_lipschitz(self, delta):
        return holder_smoothing_constant(self.holder.holder_constant, self.holder.exponent, self.degree, delta)


class MinibatchOracle(InexactOracle):
    """Sampled mini-batch gradients; delta is recorded in the certificate but not guaranteed."""
    kind = OracleKind.MINIBATCH
    degree = 1.0

    def __init__(self,
                 components: Sequence[SmoothObjective],
                 batch_size: int,
                 lipschitz: float,
                 scaling: MinibatchScaling = MinibatchScaling.MEAN):
        if not 1 <= batch_size <= len(components):
            raise OracleInputError(f"Batch size must lie in [1, {len(components)}], got {batch_size}")
        self.components = components
        self.batch_size = batch_size
        self.lipschitz = lipschitz
        self.scaling = scaling

    def evaluate(self, x, delta, rng):
        batch = rng.choice(len(self.components), size=self.batch_size, replace=False)
        return eval_minibatch(self.components, x, [int(index) for index in batch],
                              OracleCertificate(delta, self.lipschitz, 1.0), self.scaling)

    def claimed_lipschitz(self, delta):
        return self.lipschitz
