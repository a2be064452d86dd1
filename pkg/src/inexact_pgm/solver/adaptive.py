"""
I-PGM for an unknown lower bound f_inf.

The fixed-horizon choice of rho needs Delta0 = f(x0) - f_inf. The run replaces it by
f(x0) - f_best^k with f_best^k = min_{j<=k} f(x_j) - eps_k, doubling eps_k whenever a new
iterate falls below f_best^k and halving it after every accepted iterate.
"""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from inexact_pgm.oracle.handles import InexactOracle
from inexact_pgm.problems.objective import SmoothObjective
from inexact_pgm.prox import ProxFunction
from inexact_pgm.rates import rho_opt_fixed_horizon
from inexact_pgm.solver.ipgm import (check_start, composite_value, divergence_guard, evaluate_oracle, make_record,
                                     prox_step)
from inexact_pgm.solver.schedule import ScheduleConfig, ScheduleError
from inexact_pgm.solver.trace import RunTrace

log = logging.getLogger(__name__)

RETRY_LIMIT = 64


class RetryLimitError(Exception):
    def __init__(self, iteration: int, epsilon: float):
        super().__init__(f"Lower bound estimate still above the new iterate after {RETRY_LIMIT} doublings "
                         f"at iteration {iteration}, eps={epsilon}")
        self.iteration = iteration
        self.epsilon = epsilon


@dataclass(frozen=True)
class AdaptiveState:
    """State at the accepted iterate x_{k+1}; epsilon is eps_k before the halving."""
    k: int
    epsilon: float
    f_best: float
    retry_count: int
    rho: float
    delta0_gap: float
    min_objective: float


def ipgm_adaptive_run(objective: SmoothObjective,
                      oracle: InexactOracle,
                      h: ProxFunction,
                      base_config: ScheduleConfig,
                      x0: np.ndarray,
                      epsilon0: float,
                      seed: int = 0) -> Tuple[RunTrace, List[AdaptiveState]]:
    """
    :param base_config: schedule of the run; its rho is replaced every iteration, and used
    as is only when the requested accuracy is zero
    :param epsilon0: initial gap between f(x0) and the lower bound estimate
    """
    if not epsilon0 > 0.0:
        raise ScheduleError(f"Initial eps must be positive, got {epsilon0}")
    if base_config.degree < 1.0:
        raise ScheduleError(f"Adaptive rho selection needs a degree in [1, 2), got {base_config.degree}")
    x0 = np.asarray(x0, dtype=float)
    f0 = check_start(objective, oracle, h, base_config, x0)
    trace = RunTrace("ipgm_adaptive", base_config.degree, oracle.kind, x0, f0)
    history: List[AdaptiveState] = []
    horizon = base_config.max_iters - 1
    log.info("Adaptive I-PGM start: q=%s, delta0=%s, eps0=%s, iterations=%d",
             base_config.degree, base_config.delta0, epsilon0, base_config.max_iters)

    x, f = x0, f0
    epsilon = epsilon0
    min_objective = f0
    previous = None
    for k in range(base_config.max_iters):
        delta = base_config.accuracy(k)
        evaluation = evaluate_oracle(oracle, x, delta, np.random.default_rng([seed, k, 0]), k)
        f_best = min_objective - epsilon
        retries = 0
        while True:
            gap = f0 - f_best
            rho = rho_opt_fixed_horizon(base_config.L, base_config.degree, delta, gap, horizon) \
                if delta > 0.0 else base_config.rho
            step = prox_step(oracle, h, base_config, x, k, None, rho=rho, evaluation=evaluation)
            f_next = composite_value(objective, h, step.post)
            divergence_guard(k, f0, f_next)
            if f_next >= f_best:
                break
            if retries == RETRY_LIMIT:
                raise RetryLimitError(k, epsilon)
            retries += 1
            epsilon *= 2.0
            f_best = min_objective - epsilon
            log.debug("Iteration %d: f=%.6e below the estimate, eps doubled to %.3e", k, f_next, epsilon)
        if retries:
            log.debug("Iteration %d accepted after %d doublings", k, retries)
        history.append(AdaptiveState(k, epsilon, f_best, retries, rho, gap, min_objective))
        previous = make_record(k, x, step, f, f_next, delta, previous)
        trace.append(previous)
        x, f = step.post, f_next
        min_objective = min(min_objective, f_next)
        epsilon /= 2.0
    log.info("Adaptive I-PGM done: f=%.6e, min gm_sq=%.6e, doublings=%d",
             f, previous.min_gm_sq, sum(state.retry_count for state in history))
    return trace, history
