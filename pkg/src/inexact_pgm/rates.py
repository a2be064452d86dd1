"""
Closed-form convergence bounds and optimal parameter choices for the inexact proximal
gradient methods, evaluated numerically so runs can be compared against theory.

Every evaluator accepts a real iteration counter k so curves can be sampled densely.
"""
import csv
import math
import os
from dataclasses import dataclass, field
from enum import Enum, auto
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from inexact_pgm.oracle.holder import HolderParameterError, holder_smoothing_coefficient


class RateParameterError(Exception):
    pass


def check_degree(q: float, upper: float = 2.0):
    if not (0.0 <= q < upper):
        raise RateParameterError(f"Degree must lie in [0, {upper}), got {q}")


def check_positive(name: str, value: float):
    if not (math.isfinite(value) and value > 0.0):
        raise RateParameterError(f"{name} must be positive, got {value}")


def check_nonnegative(name: str, value: float):
    if not (math.isfinite(value) and value >= 0.0):
        raise RateParameterError(f"{name} must be nonnegative, got {value}")


def check_iteration(k: float, minimum: float = 0.0):
    if not (math.isfinite(k) and k >= minimum):
        raise RateParameterError(f"Iteration counter must be at least {minimum}, got {k}")


def bound_thm2(L: float, rho: float, q: float, delta: float, beta: float, zeta: float,
               delta0_gap: float, k: float) -> float:
    """Bound on min_{j<=k} ||g_j + p_{j+1}||^2 for the decaying schedules of I-PGM."""
    check_positive("L", L)
    check_positive("rho", rho)
    check_degree(q)
    check_nonnegative("delta", delta)
    check_nonnegative("delta0_gap", delta0_gap)
    check_iteration(k)
    if not (0.0 <= beta < 1.0) or not (0.0 <= zeta < 1.0):
        raise RateParameterError(f"beta and zeta must lie in [0, 1), got {beta} and {zeta}")
    curvature = L + q * rho
    first = 2.0 * curvature * delta0_gap / ((1.0 - zeta) * (k + 1.0) ** (1.0 - zeta))
    second = ((2.0 - q) * curvature * delta ** (2.0 / (2.0 - q))
              / ((1.0 - zeta) * (1.0 - beta) * rho ** (q / (2.0 - q)) * (k + 1.0) ** (beta - zeta)))
    return first + second


def plateau_cor1(L: float, q: float, delta: float) -> float:
    """Limit of bound_cor1_const as k grows."""
    check_positive("L", L)
    check_degree(q)
    check_nonnegative("delta", delta)
    return (q + 1.0) * (2.0 - q) * L ** ((2.0 - 2.0 * q) / (2.0 - q)) * delta ** (2.0 / (2.0 - q))


def bound_cor1_const(L: float, q: float, delta: float, delta0_gap: float, k: float) -> float:
    """Constant schedules with rho = L: 2(q+1) L Delta0 / (k+1) plus the plateau."""
    check_nonnegative("delta0_gap", delta0_gap)
    check_iteration(k)
    return 2.0 * (q + 1.0) * L * delta0_gap / (k + 1.0) + plateau_cor1(L, q, delta)


def rho_opt_fixed_horizon(L: float, q: float, delta: float, delta0_gap: float, horizon: float) -> float:
    check_positive("L", L)
    check_degree(q)
    if q < 1.0:
        raise RateParameterError(f"The fixed-horizon choice of rho needs q in [1, 2), got {q}")
    check_positive("delta", delta)
    check_positive("delta0_gap", delta0_gap)
    check_iteration(horizon)
    power = (2.0 - q) / 2.0
    return L ** power * delta * (horizon + 1.0) ** power / (2.0 * delta0_gap) ** power


def bound_cor1_fixed_horizon(L: float, q: float, delta: float, delta0_gap: float, k: float) -> float:
    """
    bound_thm2 with beta = zeta = 0 evaluated at rho = rho_opt_fixed_horizon(..., k).

    The rho-dependent part of the first term contributes q L^((2-q)/2) (2 Delta0)^(q/2) delta / (k+1)^(q/2).
    """
    check_positive("L", L)
    check_degree(q)
    if q < 1.0:
        raise RateParameterError(f"The fixed-horizon bound needs q in [1, 2), got {q}")
    check_nonnegative("delta", delta)
    check_positive("delta0_gap", delta0_gap)
    check_iteration(k)
    steps = k + 1.0
    gap = 2.0 * delta0_gap
    exact = 2.0 * L * delta0_gap / steps
    if delta == 0.0:
        return exact
    middle = (q * L ** ((2.0 - q) / 2.0) * gap ** (q / 2.0) * delta
              + (2.0 - q) * delta * L ** (1.0 - q / 2.0) * gap ** (q / 2.0)) / steps ** (q / 2.0)
    last = q * (2.0 - q) * delta ** 2 * L ** (1.0 - q) * gap ** (q - 1.0) / steps ** (q - 1.0)
    return exact + middle + last


def rho_opt_q1(L: float, delta: float, delta0_gap: float, beta: float, k: float) -> float:
    """Minimizer over rho of the degree-1 bound with accuracies decaying at rate beta."""
    check_positive("L", L)
    check_positive("delta", delta)
    check_positive("delta0_gap", delta0_gap)
    check_iteration(k)
    if not (0.0 <= beta < 1.0):
        raise RateParameterError(f"beta must lie in [0, 1), got {beta}")
    return delta * math.sqrt(L) * (k + 1.0) ** ((1.0 - beta) / 2.0) / math.sqrt(2.0 * delta0_gap * (1.0 - beta))


def rho_opt_convex(q: float, delta: float, R: float, k: float) -> float:
    check_degree(q)
    check_positive("delta", delta)
    check_positive("R", R)
    check_iteration(k, 1.0)
    return delta * k ** ((2.0 - q) / 2.0) / R ** (2.0 - q)


def bound_convex_ipgm(L: float, q: float, delta: float, R: float, k: float, rho: Optional[float] = None) -> float:
    """
    f(x_hat_k) - f* for convex F and the ergodic average of I-PGM.

    Without rho the optimal choice is substituted and the result is reported in the
    form LR^2/(2k) + delta (2 + q) R^q / (2 k^(q/2)), which dominates the exact substitution.
    """
    check_positive("L", L)
    check_degree(q)
    check_nonnegative("delta", delta)
    check_positive("R", R)
    check_iteration(k, 1.0)
    if rho is None:
        return L * R ** 2 / (2.0 * k) + delta * (2.0 + q) * R ** q / (2.0 * k ** (q / 2.0))
    check_positive("rho", rho)
    additive = (2.0 - q) * delta ** (2.0 / (2.0 - q)) / (2.0 * rho ** (q / (2.0 - q)))
    return (L + q * rho) * R ** 2 / (2.0 * k) + additive


def rho_opt_fipgm(q: float, delta: float, R: float, k: float) -> float:
    check_degree(q)
    check_positive("delta", delta)
    check_positive("R", R)
    check_iteration(k)
    power = (2.0 - q) / 2.0
    return ((k + 1.0) * (k + 2.0) * (k + 3.0)) ** power / (8.0 * R ** 2) ** power * delta


def bound_fipgm(L: float, q: float, delta: float, R: float, k: float, rho: Optional[float] = None) -> float:
    """f(y_k) - f* for FI-PGM; the delta term accumulates linearly in k unless q > 2/3."""
    check_positive("L", L)
    check_degree(q)
    check_nonnegative("delta", delta)
    check_positive("R", R)
    check_iteration(k)
    accelerated = 4.0 * R ** 2 / ((k + 1.0) * (k + 2.0))
    if rho is None:
        product = (k + 1.0) * (k + 2.0) * (k + 3.0)
        return L * accelerated + 8.0 ** (q / 2.0) * R ** q * (k + 3.0) * delta / product ** (q / 2.0)
    check_positive("rho", rho)
    additive = (2.0 - q) * delta ** (2.0 / (2.0 - q)) / (2.0 * rho ** (q / (2.0 - q)))
    return (L + q * rho) * accelerated + (k + 3.0) * additive


def fipgm_delta_exponent(q: float) -> float:
    """Exponent of k in the delta term of the optimal-rho FI-PGM bound."""
    check_degree(q)
    return 1.0 - 1.5 * q


def holder_delta_opt(holder_constant: float, nu: float, q: float, delta0_gap: float, k: float) -> Tuple[float, float]:
    """
    Accuracy minimizing the constant-schedule bound when L = L(delta) comes from Hölder smoothness.

    With C = L(1), the bound reads C1 delta^(-a) / (k+1) + C2 delta^b where
    C1 = 2(q+1) Delta0 C, C2 = (q+1)(2-q) C^((2-2q)/(2-q)), a = (1-nu)/(1+nu-q), b = 2nu/(1+nu-q).

    :return: (delta, bound); for nu = 1 the accuracy plays no role and (0, C1 / (k+1)) is returned
    """
    check_positive("holder_constant", holder_constant)
    if not (0.0 < nu <= 1.0):
        raise RateParameterError(f"Hölder exponent must lie in (0, 1], got {nu}")
    check_degree(q, min(1.0 + nu, 2.0))
    check_positive("delta0_gap", delta0_gap)
    check_iteration(k)
    try:
        coefficient = holder_smoothing_coefficient(holder_constant, nu, q)
    except HolderParameterError as error:
        raise RateParameterError(str(error)) from error
    c1 = 2.0 * (q + 1.0) * delta0_gap * coefficient
    if nu == 1.0:
        return 0.0, c1 / (k + 1.0)
    c2 = (q + 1.0) * (2.0 - q) * coefficient ** ((2.0 - 2.0 * q) / (2.0 - q))
    a = (1.0 - nu) / (1.0 + nu - q)
    b = 2.0 * nu / (1.0 + nu - q)
    delta = (a * c1 / (b * c2 * (k + 1.0))) ** ((1.0 + nu - q) / (1.0 + nu))
    return delta, c1 * delta ** (-a) / (k + 1.0) + c2 * delta ** b


class CurveKind(Enum):
    THM2_NONCONVEX = auto()
    COR1_CONST = auto()
    COR1_FIXED_HORIZON = auto()
    CONVEX_IPGM = auto()
    CONVEX_IPGM_OPT_RHO = auto()
    FIPGM = auto()
    FIPGM_OPT_RHO = auto()
    HOLDER_RATE = auto()


CURVE_PARAMETERS = {
    CurveKind.THM2_NONCONVEX: ("L", "rho", "q", "delta", "beta", "zeta", "delta0_gap"),
    CurveKind.COR1_CONST: ("L", "q", "delta", "delta0_gap"),
    CurveKind.COR1_FIXED_HORIZON: ("L", "q", "delta", "delta0_gap"),
    CurveKind.CONVEX_IPGM: ("L", "q", "delta", "R", "rho"),
    CurveKind.CONVEX_IPGM_OPT_RHO: ("L", "q", "delta", "R"),
    CurveKind.FIPGM: ("L", "q", "delta", "R", "rho"),
    CurveKind.FIPGM_OPT_RHO: ("L", "q", "delta", "R"),
    CurveKind.HOLDER_RATE: ("H", "nu", "q", "delta0_gap"),
}


@dataclass
class BoundCurve:
    kind: CurveKind
    parameters: Dict[str, float]
    samples: List[Tuple[float, float]] = field(default_factory=list)

    def ks(self) -> List[float]:
        return [k for k, _ in self.samples]

    def values(self) -> List[float]:
        return [value for _, value in self.samples]


def evaluate_curve(kind: CurveKind, p: Dict[str, float], k: float) -> float:
    if kind is CurveKind.THM2_NONCONVEX:
        return bound_thm2(p["L"], p["rho"], p["q"], p["delta"], p["beta"], p["zeta"], p["delta0_gap"], k)
    if kind is CurveKind.COR1_CONST:
        return bound_cor1_const(p["L"], p["q"], p["delta"], p["delta0_gap"], k)
    if kind is CurveKind.COR1_FIXED_HORIZON:
        return bound_cor1_fixed_horizon(p["L"], p["q"], p["delta"], p["delta0_gap"], k)
    if kind is CurveKind.CONVEX_IPGM:
        return bound_convex_ipgm(p["L"], p["q"], p["delta"], p["R"], k, p["rho"])
    if kind is CurveKind.CONVEX_IPGM_OPT_RHO:
        return bound_convex_ipgm(p["L"], p["q"], p["delta"], p["R"], k)
    if kind is CurveKind.FIPGM:
        return bound_fipgm(p["L"], p["q"], p["delta"], p["R"], k, p["rho"])
    if kind is CurveKind.FIPGM_OPT_RHO:
        return bound_fipgm(p["L"], p["q"], p["delta"], p["R"], k)
    return holder_delta_opt(p["H"], p["nu"], p["q"], p["delta0_gap"], k)[1]


def sample_curve(kind: CurveKind, parameters: Dict[str, float], ks: Iterable[float]) -> BoundCurve:
    missing = [name for name in CURVE_PARAMETERS[kind] if name not in parameters]
    if missing:
        raise RateParameterError(f"Curve {kind.name.lower()} misses parameters {', '.join(missing)}")
    curve = BoundCurve(kind, dict(parameters))
    for k in ks:
        value = evaluate_curve(kind, parameters, float(k))
        if not math.isfinite(value):
            raise RateParameterError(f"Curve {kind.name.lower()} is not finite at k={k}")
        curve.samples.append((float(k), value))
    return curve


def monotone_onset(curve: BoundCurve) -> Optional[float]:
    """Smallest sampled k from which the curve never increases, None if it increases at the end."""
    values = curve.values()
    if len(values) >= 2 and values[-1] > values[-2]:
        return None
    onset = len(values) - 1
    while onset > 0 and values[onset - 1] >= values[onset]:
        onset -= 1
    return curve.samples[onset][0] if values else None


def write_curve_csv(curve: BoundCurve, path: Union[str, os.PathLike]):
    with open(Path(path), "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["k", "bound"])
        for k, value in curve.samples:
            writer.writerow([repr(k), repr(value)])
