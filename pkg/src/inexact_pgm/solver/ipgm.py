"""Inexact proximal gradient method x_{k+1} = prox_{alpha_k h}(x_k - alpha_k g_k)."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from inexact_pgm.oracle.certificate import NonFiniteOracleOutput, OracleEval, majorize_amgm
from inexact_pgm.oracle.handles import InexactOracle
from inexact_pgm.problems.objective import SmoothObjective
from inexact_pgm.prox import ProxFunction, implied_subgradient, prox_apply
from inexact_pgm.solver.schedule import ScheduleConfig, ScheduleError
from inexact_pgm.solver.trace import IterationRecord, RunTrace

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6


class InfeasibleStartError(Exception):
    pass


class DivergenceError(Exception):
    def __init__(self, iteration: int, value: float):
        super().__init__(f"Objective left the admissible range at iteration {iteration}: {value}")
        self.iteration = iteration
        self.value = value


@dataclass
class ProxStep:
    alpha: float
    post: np.ndarray
    subgradient: np.ndarray
    evaluation: OracleEval


def composite_value(objective: SmoothObjective, h: ProxFunction, x: np.ndarray) -> float:
    return objective.value(x) + h.value(x)


def check_start(objective: SmoothObjective, oracle: InexactOracle, h: ProxFunction,
                config: ScheduleConfig, x0: np.ndarray) -> float:
    if oracle.degree != config.degree:
        raise ScheduleError(f"Oracle degree {oracle.degree} doesn't match the schedule degree {config.degree}")
    if not h.contains(x0):
        raise InfeasibleStartError("Starting point is outside dom h")
    f0 = composite_value(objective, h, x0)
    if not math.isfinite(f0):
        raise InfeasibleStartError(f"Objective at the starting point is not finite: {f0}")
    return f0


def divergence_guard(k: int, f0: float, value: float):
    if not math.isfinite(value) or value > f0 + DIVERGENCE_FACTOR * (1.0 + abs(f0)):
        raise DivergenceError(k, value)


def evaluate_oracle(oracle: InexactOracle, x: np.ndarray, delta: float,
                    rng: np.random.Generator, k: int) -> OracleEval:
    try:
        return oracle.evaluate(x, delta, rng)
    except NonFiniteOracleOutput as error:
        raise DivergenceError(k, math.nan) from error


def prox_step(oracle: InexactOracle, h: ProxFunction, config: ScheduleConfig, x: np.ndarray,
              k: int, rng: np.random.Generator, rho: Optional[float] = None,
              evaluation: Optional[OracleEval] = None) -> ProxStep:
    if evaluation is None:
        evaluation = evaluate_oracle(oracle, x, config.accuracy(k), rng, k)
    lipschitz = evaluation.certificate.lipschitz if config.lipschitz_from_oracle else config.L
    alpha = config.step(k, lipschitz, rho)
    pre = x - alpha * evaluation.gradient
    post = prox_apply(h, alpha, pre)
    return ProxStep(alpha, post, implied_subgradient(h, alpha, pre, post, check=False), evaluation)


def make_record(k: int, x: np.ndarray, step: ProxStep, objective: float, next_objective: float,
                delta: float, previous: Optional[IterationRecord]) -> IterationRecord:
    displacement = step.post - x
    gm_sq = float(displacement @ displacement) / step.alpha ** 2
    min_gm_sq = gm_sq if previous is None else min(previous.min_gm_sq, gm_sq)
    cumulative = step.alpha * gm_sq + (0.0 if previous is None else previous.cumulative)
    return IterationRecord(k=k, x=x, x_next=step.post, objective=objective, next_objective=next_objective,
                           alpha=step.alpha, delta=delta, lipschitz=step.evaluation.certificate.lipschitz,
                           gm_sq=gm_sq, min_gm_sq=min_gm_sq, cumulative=cumulative,
                           gradient=step.evaluation.gradient, subgradient=step.subgradient)


def ipgm_run(objective: SmoothObjective,
             oracle: InexactOracle,
             h: ProxFunction,
             config: ScheduleConfig,
             x0: np.ndarray,
             seed: int = 0,
             candidates: int = 1) -> RunTrace:
    """
    Run the inexact proximal gradient method for config.max_iters iterations.

    :param seed: oracle randomness at iteration k, candidate j comes from default_rng([seed, k, j])
    :param candidates: number of oracle draws per iteration; the draw with the largest
    displacement ||x_{k+1} - x_k|| is committed, the earliest one on ties
    """
    if candidates < 1:
        raise ScheduleError(f"Number of candidates must be positive, got {candidates}")
    x0 = np.asarray(x0, dtype=float)
    f0 = check_start(objective, oracle, h, config, x0)
    trace = RunTrace("ipgm", config.degree, oracle.kind, x0, f0, adversarial=candidates > 1)
    log.info("I-PGM start: q=%s, delta0=%s, iterations=%d, candidates=%d",
             config.degree, config.delta0, config.max_iters, candidates)
    x, f = x0, f0
    previous = None
    for k in range(config.max_iters):
        best: Optional[ProxStep] = None
        best_distance = -1.0
        for j in range(candidates):
            step = prox_step(oracle, h, config, x, k, np.random.default_rng([seed, k, j]))
            distance = float(np.linalg.norm(step.post - x))
            if distance > best_distance:
                best, best_distance = step, distance
        f_next = composite_value(objective, h, best.post)
        divergence_guard(k, f0, f_next)
        previous = make_record(k, x, best, f, f_next, config.accuracy(k), previous)
        trace.append(previous)
        x, f = best.post, f_next
    log.info("I-PGM done: f=%.6e, min gm_sq=%.6e", f, previous.min_gm_sq)
    return trace


def descent_check(trace: RunTrace, rho: float) -> np.ndarray:
    """
    Residuals f(x_{k+1}) - f(x_k) + (alpha_k / 2) gm_k^2 - additive_k, nonpositive whenever
    the certificates hold and alpha_k <= 1 / (L_k + q rho).
    """
    return np.array([record.next_objective - record.objective + 0.5 * record.alpha * record.gm_sq
                     - majorize_amgm(record.delta, trace.degree, rho)[1]
                     for record in trace.records])


def aggregate_descent_check(trace: RunTrace, f_inf: float, rho: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both sides of sum_{j<=k} alpha_j gm_j^2 <= f(x_0) - f_inf + sum_{j<=k} additive_j for every k.
    """
    additive = np.array([majorize_amgm(record.delta, trace.degree, rho)[1] for record in trace.records])
    return trace.column("cumulative"), trace.f0 - f_inf + np.cumsum(additive)
