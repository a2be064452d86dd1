"""Empirical check of oracle certificates on sampled point pairs."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from inexact_pgm.oracle.certificate import OracleEval
from inexact_pgm.oracle.holder import HolderFunction

log = logging.getLogger(__name__)

PointPair = Tuple[np.ndarray, np.ndarray]


class CertificationInputError(Exception):
    pass


@dataclass
class CertificationReport:
    certified: bool
    pairs: int
    max_violation: float
    min_lower_gap: Optional[float] = None
    violating_pair: Optional[PointPair] = None


class L1BallPairSampler:
    """Independent uniform points of the l1 ball: Laplace directions with radius R u^(1/n)."""

    def __init__(self, dim: int, radius: float, seed: int = 0):
        self.dim = dim
        self.radius = radius
        self.rng = np.random.default_rng(seed)

    def point(self) -> np.ndarray:
        direction = self.rng.laplace(size=self.dim)
        scale = self.radius * self.rng.random() ** (1.0 / self.dim)
        return direction * (scale / np.sum(np.abs(direction)))

    def __call__(self) -> PointPair:
        return self.point(), self.point()


class BoxPairSampler:
    def __init__(self, dim: int, half_width: float, seed: int = 0):
        self.dim = dim
        self.half_width = half_width
        self.rng = np.random.default_rng(seed)

    def __call__(self) -> PointPair:
        return (self.rng.uniform(-self.half_width, self.half_width, self.dim),
                self.rng.uniform(-self.half_width, self.half_width, self.dim))


def certify_oracle(oracle: Callable[[np.ndarray], OracleEval],
                   exact_value: Callable[[np.ndarray], float],
                   domain_sampler: Callable[[], PointPair],
                   pairs: int,
                   tolerance: float = 1e-7) -> CertificationReport:
    """
    Test the claimed certificate of `oracle` at y against the exact value at x
    for `pairs` sampled pairs (x, y).

    :return: the largest excess over the upper model, the smallest linearization gap when a
    convex lower bound is claimed, and the worst pair if either side fails
    """
    if pairs < 1:
        raise CertificationInputError(f"Number of pairs must be positive, got {pairs}")
    max_violation = -math.inf
    min_lower_gap = math.inf
    lower_bound_claimed = False
    upper_pair: Optional[PointPair] = None
    lower_pair: Optional[PointPair] = None
    for _ in range(pairs):
        x, y = domain_sampler()
        evaluation = oracle(y)
        certificate = evaluation.certificate
        gap = exact_value(x) - evaluation.value - float(evaluation.gradient @ (x - y))
        violation = gap - certificate.upper_model(float(np.linalg.norm(x - y)))
        if violation > max_violation:
            max_violation = violation
            upper_pair = (x, y)
        if certificate.convex_lower_bound:
            lower_bound_claimed = True
            if gap < min_lower_gap:
                min_lower_gap = gap
                lower_pair = (x, y)

    upper_holds = max_violation <= tolerance
    lower_holds = not lower_bound_claimed or min_lower_gap >= -tolerance
    violating_pair = None
    if not upper_holds:
        violating_pair = upper_pair
    elif not lower_holds:
        violating_pair = lower_pair
    if violating_pair is not None:
        log.warning("Certificate refuted, max violation %.3e, min lower gap %s",
                    max_violation, min_lower_gap if lower_bound_claimed else "n/a")
    return CertificationReport(certified=upper_holds and lower_holds,
                               pairs=pairs,
                               max_violation=max_violation,
                               min_lower_gap=min_lower_gap if lower_bound_claimed else None,
                               violating_pair=violating_pair)


def certify_holder_condition(holder: HolderFunction,
                             domain_sampler: Callable[[], PointPair],
                             pairs: int,
                             tolerance: float = 1e-7) -> CertificationReport:
    """Check ||g(x) - g(y)|| <= H ||x - y||^nu on sampled pairs."""
    if pairs < 1:
        raise CertificationInputError(f"Number of pairs must be positive, got {pairs}")
    max_violation = -math.inf
    worst: Optional[PointPair] = None
    for _ in range(pairs):
        x, y = domain_sampler()
        change = float(np.linalg.norm(holder.gradient(x) - holder.gradient(y)))
        violation = change - holder.holder_constant * float(np.linalg.norm(x - y)) ** holder.exponent
        if violation > max_violation:
            max_violation = violation
            worst = (x, y)
    certified = max_violation <= tolerance
    return CertificationReport(certified=certified,
                               pairs=pairs,
                               max_violation=max_violation,
                               violating_pair=None if certified else worst)
