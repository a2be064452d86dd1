import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from inexact_pgm.problems.objective import ProblemSpecError, check_dimension


@dataclass(frozen=True, eq=False)
class LogSumProblem:
    """
    F(x) = sum_i log((a_i^T x - b_i)^2 + 1) over the l1 ball of the given radius.

    Rows hold the N vectors a_i of dimension n. F >= 0, so 0 is a valid lower bound.
    """
    rows: np.ndarray
    targets: np.ndarray
    radius: float
    ground_truth: Optional[np.ndarray] = None
    lipschitz: float = field(init=False)

    def __post_init__(self):
        if self.rows.ndim != 2 or self.targets.shape != (self.rows.shape[0],):
            raise ProblemSpecError(
                f"Rows of shape {self.rows.shape} don't match targets of shape {self.targets.shape}")
        if not self.radius > 0.0:
            raise ProblemSpecError(f"Radius must be positive, got {self.radius}")
        object.__setattr__(self, "lipschitz", float(np.sum(self.rows ** 2)))

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @property
    def lower_bound(self) -> float:
        return 0.0

    def value(self, x: np.ndarray) -> float:
        return evaluate(self, x)[0]

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return evaluate(self, x)[1]

    def components(self) -> List["LogSumProblem"]:
        """Single-row problems whose sum is this problem."""
        return [LogSumProblem(self.rows[i:i + 1], self.targets[i:i + 1], self.radius)
                for i in range(self.size)]


def evaluate(problem: LogSumProblem, x: np.ndarray) -> Tuple[float, np.ndarray]:
    check_dimension(x, problem.dim)
    residuals = problem.rows @ x - problem.targets
    squared = residuals ** 2
    value = float(np.sum(np.log1p(squared)))
    gradient = problem.rows.T @ (2.0 * residuals / (squared + 1.0))
    return value, gradient


def sample_l1_ball(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    # Normalized exponentials over dim + 1 slots are uniform on the simplex; dropping the slack
    # slot and attaching random signs gives a uniform point of the l1 ball
    weights = rng.exponential(size=dim + 1)
    magnitudes = radius * weights[:dim] / np.sum(weights)
    signs = rng.choice(np.array([-1.0, 1.0]), size=dim)
    return signs * magnitudes


def generate_logsum_instance(n: int,
                             N: int,
                             radius: float = 4.0,
                             noise_level: Optional[float] = None,
                             seed: int = 0) -> LogSumProblem:
    """
    Synthetic stand-in for the deblurring experiment.

    :param noise_level: standard deviation of the additive noise in b, 0.01 ||A x_true|| / sqrt(N) by default
    """
    if n < 1 or N < 1:
        raise ProblemSpecError(f"Invalid dimensions n={n}, N={N}")
    if not radius > 0.0:
        raise ProblemSpecError(f"Radius must be positive, got {radius}")
    if noise_level is not None and noise_level < 0.0:
        raise ProblemSpecError(f"Noise level must be nonnegative, got {noise_level}")
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((N, n)) / math.sqrt(n)
    ground_truth = sample_l1_ball(rng, n, radius)
    clean = rows @ ground_truth
    if noise_level is None:
        noise_level = 0.01 * float(np.linalg.norm(clean)) / math.sqrt(N)
    targets = clean + noise_level * rng.standard_normal(N)
    return LogSumProblem(rows, targets, radius, ground_truth=ground_truth)
