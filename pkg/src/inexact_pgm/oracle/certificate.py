import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np


class InvalidCertificateError(Exception):
    pass


class NonFiniteOracleOutput(Exception):
    pass


@dataclass(frozen=True)
class OracleCertificate:
    """
    Claimed (delta, L, q) triple of an inexact first-order oracle.

    The claim reads F(x) - F(y) - <g(y), x - y> <= (L/2)||x - y||^2 + delta ||x - y||^q
    for every feasible x. With convex_lower_bound the left side is also claimed to be >= 0.
    """
    delta: float
    lipschitz: float
    degree: float
    convex_lower_bound: bool = False

    def __post_init__(self):
        if not (0.0 <= self.degree < 2.0):
            raise InvalidCertificateError(f"Degree must lie in [0, 2), got {self.degree}")
        if not (math.isfinite(self.delta) and self.delta >= 0.0):
            raise InvalidCertificateError(f"Accuracy must be a finite nonnegative number, got {self.delta}")
        if not (math.isfinite(self.lipschitz) and self.lipschitz > 0.0):
            raise InvalidCertificateError(f"Lipschitz constant must be positive, got {self.lipschitz}")

    def upper_model(self, distance: float) -> float:
        # 0 ** 0 == 1, so a degree-0 claim keeps the constant delta at distance 0
        return 0.5 * self.lipschitz * distance ** 2 + self.delta * distance ** self.degree


@dataclass(frozen=True, eq=False)
class OracleEval:
    point: np.ndarray
    value: float
    gradient: np.ndarray
    certificate: OracleCertificate

    def __post_init__(self):
        if self.gradient.shape != self.point.shape:
            raise NonFiniteOracleOutput(
                f"Gradient shape {self.gradient.shape} doesn't match the point shape {self.point.shape}")
        if not math.isfinite(self.value) or not np.all(np.isfinite(self.gradient)):
            raise NonFiniteOracleOutput(f"Oracle produced a non-finite output, value: {self.value}")


def check_majorization_args(degree: float, rho: float):
    if not (0.0 <= degree < 2.0):
        raise InvalidCertificateError(f"Degree must lie in [0, 2), got {degree}")
    if not rho > 0.0:
        raise InvalidCertificateError(f"Majorization parameter must be positive, got {rho}")


def majorize_amgm(delta: float, degree: float, rho: float) -> Tuple[float, float]:
    """
    Split delta * r^q into a quadratic and a constant with the weighted AM-GM inequality.

    :return: (q * rho / 2, (2 - q) delta^(2 / (2 - q)) / (2 rho^(q / (2 - q))))
    """
    check_majorization_args(degree, rho)
    if delta < 0.0:
        raise InvalidCertificateError(f"Accuracy must be nonnegative, got {delta}")
    if degree == 0.0:
        return 0.0, float(delta)
    additive = (2.0 - degree) * delta ** (2.0 / (2.0 - degree)) / (2.0 * rho ** (degree / (2.0 - degree)))
    return 0.5 * degree * rho, additive


def majorized_constants(certificate: OracleCertificate, rho: float) -> Tuple[float, float]:
    """Constants (L + q rho, additive) of the quadratic upper model implied by a certificate."""
    quad_coeff, additive = majorize_amgm(certificate.delta, certificate.degree, rho)
    return certificate.lipschitz + 2.0 * quad_coeff, additive


def restrict_to_ball(certificate: OracleCertificate, radius: float, degree: float) -> OracleCertificate:
    """
    A degree-1 certificate on a set of diameter at most 2 * radius is also a degree-q certificate
    for q in [0, 1], with delta scaled by (2 * radius)^(1 - q).
    """
    if certificate.degree != 1.0:
        raise InvalidCertificateError("Only degree-1 certificates can be restricted to a ball")
    if not (0.0 <= degree <= 1.0):
        raise InvalidCertificateError(f"Restricted degree must lie in [0, 1], got {degree}")
    if not radius > 0.0:
        raise InvalidCertificateError(f"Radius must be positive, got {radius}")
    return OracleCertificate(delta=certificate.delta * (2.0 * radius) ** (1.0 - degree),
                             lipschitz=certificate.lipschitz,
                             degree=degree,
                             convex_lower_bound=certificate.convex_lower_bound)


def dual_certificate_shifted(lipschitz: float, shift_bound: float) -> OracleCertificate:
    """
    Degree-0 certificate of the shifted-point oracle for a convex F, the (L_F shift^2, 2 L_F)
    pair known from the classical (delta, L)-oracle analysis.
    """
    if shift_bound < 0.0:
        raise InvalidCertificateError(f"Shift bound must be nonnegative, got {shift_bound}")
    return OracleCertificate(delta=lipschitz * shift_bound ** 2, lipschitz=2.0 * lipschitz, degree=0.0)
