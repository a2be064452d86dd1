"""Fast inexact proximal gradient method for convex F."""
import logging
import math
from dataclasses import replace
from enum import Enum, auto
from typing import Optional

import numpy as np

from inexact_pgm.oracle.handles import InexactOracle
from inexact_pgm.problems.objective import SmoothObjective
from inexact_pgm.prox import ProxFunction, implied_subgradient, prox_apply
from inexact_pgm.solver.ipgm import ProxStep, check_start, composite_value, divergence_guard, evaluate_oracle, \
    make_record
from inexact_pgm.solver.schedule import ScheduleConfig, ScheduleError
from inexact_pgm.solver.trace import RunTrace

log = logging.getLogger(__name__)

THETA_TOLERANCE = 1e-12


class ThetaRuleError(Exception):
    pass


class ThetaRule(Enum):
    EQUALITY_ROOT = auto()
    HALF_LINEAR = auto()


def theta_next(A_prev: float, L_next: float, rule: ThetaRule, index: Optional[int] = None) -> float:
    """
    Next weight theta_{k+1} with theta_{k+1}^2 / L_{k+1} <= A_{k+1} = A_k + theta_{k+1} / L_{k+1}.

    :param index: k + 1, needed by the half-linear rule theta_i = (i + 1) / 2
    """
    if not (math.isfinite(L_next) and L_next > 0.0):
        raise ThetaRuleError(f"Lipschitz constant must be positive, got {L_next}")
    if not A_prev >= 0.0:
        raise ThetaRuleError(f"Accumulated weight must be nonnegative, got {A_prev}")
    if rule is ThetaRule.EQUALITY_ROOT:
        return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * L_next * A_prev))
    if index is None or index < 0:
        raise ThetaRuleError(f"Half-linear weights need a nonnegative index, got {index}")
    return 0.5 * (index + 1.0)


def default_theta0(rule: ThetaRule) -> float:
    return 1.0 if rule is ThetaRule.EQUALITY_ROOT else 0.5


def fipgm_run(objective: SmoothObjective,
              oracle: InexactOracle,
              h: ProxFunction,
              config: ScheduleConfig,
              x0: np.ndarray,
              theta_rule: ThetaRule = ThetaRule.EQUALITY_ROOT,
              seed: int = 0,
              theta0: Optional[float] = None) -> RunTrace:
    """
    Run FI-PGM for config.max_iters iterations.

    Iteration k computes y_k = prox_{alpha_k h}(x_k - alpha_k g_k), the minimizer
    z_k = prox_{A_k h}(x0 - sum_{i<=k} (theta_i / L_i) g_i) of the accumulated linear model,
    and x_{k+1} = tau_k z_k + (1 - tau_k) y_k with tau_k = theta_{k+1} / (A_{k+1} L_{k+1}).
    Both the step alpha_k = 1 / L_k and the weights use L_k = (L + q rho) / step_scale; with
    lipschitz_from_oracle the oracle's constant at accuracy delta_k replaces L. zeta plays no role.
    The trace reports f(y_k) and the gradient mapping measured at y_k.
    """
    theta = default_theta0(theta_rule) if theta0 is None else theta0
    if not 0.0 < theta <= 1.0:
        raise ThetaRuleError(f"theta_0 must lie in (0, 1], got {theta}")
    x0 = np.asarray(x0, dtype=float)
    f0 = check_start(objective, oracle, h, config, x0)
    trace = RunTrace("fipgm", config.degree, oracle.kind, x0, f0)
    log.info("FI-PGM start: q=%s, delta0=%s, iterations=%d, rule=%s",
             config.degree, config.delta0, config.max_iters, theta_rule.name.lower())

    def curvature(k: int) -> float:
        if not config.lipschitz_from_oracle:
            return (config.L + config.degree * config.rho) / config.step_scale
        lipschitz = oracle.claimed_lipschitz(config.accuracy(k))
        if lipschitz is None:
            raise ScheduleError(f"{type(oracle).__name__} can't report its Lipschitz constant ahead of a query")
        return (lipschitz + config.degree * config.rho) / config.step_scale

    x, f = x0, f0
    L_k = curvature(0)
    A = theta / L_k
    weighted_gradients = np.zeros_like(x0)
    previous = None
    for k in range(config.max_iters):
        delta = config.accuracy(k)
        evaluation = evaluate_oracle(oracle, x, delta, np.random.default_rng([seed, k, 0]), k)
        if k == 0 and not evaluation.certificate.convex_lower_bound:
            log.warning("FI-PGM oracle doesn't claim the convex lower bound, the accelerated rate isn't guaranteed")
        alpha = 1.0 / L_k
        pre = x - alpha * evaluation.gradient
        post = prox_apply(h, alpha, pre)
        step = ProxStep(alpha, post, implied_subgradient(h, alpha, pre, post, check=False), evaluation)
        weighted_gradients += (theta / L_k) * evaluation.gradient
        z = prox_apply(h, A, x0 - weighted_gradients)

        L_next = curvature(k + 1)
        theta_following = theta_next(A, L_next, theta_rule, k + 1)
        A_next = A + theta_following / L_next
        if theta_following ** 2 / L_next > A_next * (1.0 + THETA_TOLERANCE):
            raise ThetaRuleError(f"Weight condition fails at iteration {k + 1}: "
                                 f"theta^2/L={theta_following ** 2 / L_next}, A={A_next}")
        tau = theta_following / (A_next * L_next)
        if not 0.0 < tau <= 1.0 + THETA_TOLERANCE:
            raise ThetaRuleError(f"Momentum weight tau={tau} left (0, 1] at iteration {k}")
        tau = min(tau, 1.0)
        x_next = tau * z + (1.0 - tau) * step.post

        f_y = composite_value(objective, h, step.post)
        divergence_guard(k, f0, f_y)
        f_next = composite_value(objective, h, x_next)
        divergence_guard(k, f0, f_next)
        record = make_record(k, x, step, f, f_next, delta, previous)
        previous = replace(record, x_next=x_next, y=step.post, y_objective=f_y, z=z, theta=theta, A=A, tau=tau)
        trace.append(previous)

        x, f = x_next, f_next
        theta, A, L_k = theta_following, A_next, L_next
    log.info("FI-PGM done: f(y)=%.6e, min gm_sq=%.6e", previous.y_objective, previous.min_gm_sq)
    return trace
