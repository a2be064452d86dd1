import math
from dataclasses import dataclass
from enum import Enum, auto

import numpy as np


class ProxInputError(Exception):
    pass


class InconsistentProxError(Exception):
    pass


class ProxKind(Enum):
    ZERO = auto()
    L1_NORM = auto()
    L1_BALL = auto()


@dataclass(frozen=True)
class ProxFunction:
    """
    Simple convex term h of the composite objective F + h.

    ZERO is h = 0, L1_NORM is h = weight * ||x||_1 and L1_BALL is the indicator of {||x||_1 <= radius}.
    """
    kind: ProxKind
    weight: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind is ProxKind.L1_NORM and not self.weight > 0.0:
            raise ProxInputError(f"l1 norm weight must be positive, got {self.weight}")
        if self.kind is ProxKind.L1_BALL and not self.radius > 0.0:
            raise ProxInputError(f"l1 ball radius must be positive, got {self.radius}")

    @classmethod
    def zero(cls) -> "ProxFunction":
        return cls(ProxKind.ZERO)

    @classmethod
    def l1_norm(cls, weight: float) -> "ProxFunction":
        return cls(ProxKind.L1_NORM, weight=weight)

    @classmethod
    def l1_ball(cls, radius: float) -> "ProxFunction":
        return cls(ProxKind.L1_BALL, radius=radius)

    def contains(self, x: np.ndarray, tolerance: float = 1e-9) -> bool:
        if self.kind is ProxKind.L1_BALL:
            return float(np.sum(np.abs(x))) <= self.radius + tolerance * max(1.0, self.radius)
        return True

    def value(self, x: np.ndarray) -> float:
        if self.kind is ProxKind.L1_NORM:
            return self.weight * float(np.sum(np.abs(x)))
        if self.kind is ProxKind.L1_BALL:
            return 0.0 if self.contains(x) else math.inf
        return 0.0

    def prox(self, gamma: float, x: np.ndarray) -> np.ndarray:
        return prox_apply(self, gamma, x)


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def project_l1_ball(x: np.ndarray, radius: float) -> np.ndarray:
    """
    Euclidean projection onto {y : ||y||_1 <= radius} by sorting the magnitudes
    and locating the soft-threshold level.
    """
    magnitudes = np.abs(x)
    if float(np.sum(magnitudes)) <= radius:
        return np.array(x, dtype=float, copy=True)
    decreasing = np.sort(magnitudes)[::-1]
    levels = (np.cumsum(decreasing) - radius) / np.arange(1, decreasing.size + 1)
    last_active = np.max(np.argwhere(decreasing - levels > 0).ravel())
    return soft_threshold(x, levels[last_active])


def prox_apply(h: ProxFunction, gamma: float, x: np.ndarray) -> np.ndarray:
    """Unique minimizer of h(y) + ||x - y||^2 / (2 gamma)."""
    if not gamma > 0.0:
        raise ProxInputError(f"Prox parameter must be positive, got {gamma}")
    if h.kind is ProxKind.L1_NORM:
        return soft_threshold(x, gamma * h.weight)
    if h.kind is ProxKind.L1_BALL:
        return project_l1_ball(x, h.radius)
    return np.array(x, dtype=float, copy=True)


def implied_subgradient(h: ProxFunction,
                        gamma: float,
                        pre_prox: np.ndarray,
                        post_prox: np.ndarray,
                        check: bool = True,
                        tolerance: float = 1e-8) -> np.ndarray:
    """
    Subgradient p of h at post_prox read off the prox optimality condition pre - post = gamma * p.

    :param check: re-apply the prox to pre_prox and reject inputs that disagree with post_prox
    """
    if not gamma > 0.0:
        raise ProxInputError(f"Prox parameter must be positive, got {gamma}")
    if check:
        recomputed = prox_apply(h, gamma, pre_prox)
        mismatch = float(np.max(np.abs(recomputed - post_prox), initial=0.0))
        if mismatch > tolerance * (1.0 + float(np.max(np.abs(pre_prox), initial=0.0))):
            raise InconsistentProxError(f"post_prox is not the prox of pre_prox, mismatch: {mismatch}")
    return (pre_prox - post_prox) / gamma
