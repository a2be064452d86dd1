import csv
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from inexact_pgm.harness.config import Algorithm, ConfigError, ExperimentConfig, OracleFamily, OracleSpec, \
    OutputSpec, ProblemFamily, ProblemSpec, SolverSpec
from inexact_pgm.harness.experiment import ExperimentResult, build_oracle, build_problem, effective_delta, \
    run_experiment
from inexact_pgm.harness.seeds import cell_seed
from inexact_pgm.oracle.certificate import OracleEval
from inexact_pgm.oracle.certify import BoxPairSampler, CertificationReport, L1BallPairSampler, certify_oracle
from inexact_pgm.problems.holder import HOLDER_BOX
from inexact_pgm.rates import BoundCurve, CurveKind, RateParameterError, monotone_onset, sample_curve, \
    write_curve_csv

log = logging.getLogger(__name__)

CERTIFICATION_COLUMNS = ["degree", "level", "delta_claimed", "lipschitz", "pairs", "certified",
                         "max_violation", "min_lower_gap"]
LOGSUM_LEVELS = [0.1, 1.0, 3.0]
LONG_HORIZON_ITERATIONS = 20000
LONG_HORIZON_WINDOW = 0.2


@dataclass
class CertificationRow:
    degree: float
    level: float
    delta_claimed: float
    lipschitz: float
    report: CertificationReport


@dataclass
class LogSumSweepResult:
    sweep: ExperimentResult
    long_horizon: Optional[ExperimentResult] = None

    @property
    def failed(self) -> bool:
        return self.sweep.failed or (self.long_horizon is not None and self.long_horizon.failed)

    @property
    def ordering(self) -> Dict[float, Optional[bool]]:
        """Plateau ordering per level; the long sweep decides for its level."""
        ordering = dict(self.sweep.ordering)
        if self.long_horizon is not None:
            ordering.update(self.long_horizon.ordering)
        return ordering


def claimed_oracle(config: ExperimentConfig, problem, degree: float, level: float):
    """Oracle callable whose certificates claim claim_scale times the accuracy of the level."""
    oracle = build_oracle(config, problem, degree)
    delta = effective_delta(config, problem, level, degree)
    claimed = delta * config.certify.claim_scale
    rng = np.random.default_rng(cell_seed(config.master_seed, 0, level, degree))

    def evaluate(y: np.ndarray) -> OracleEval:
        evaluation = oracle.evaluate(y, delta, rng)
        return replace(evaluation, certificate=replace(evaluation.certificate, delta=claimed))

    return evaluate, claimed


def pair_sampler(config: ExperimentConfig, problem, seed: int):
    if config.problem.family is ProblemFamily.HOLDER:
        return BoxPairSampler(problem.dim, HOLDER_BOX, seed)
    return L1BallPairSampler(problem.dim, problem.radius, seed)


def certify_command(config: ExperimentConfig, directory: Optional[Union[str, os.PathLike]] = None) \
        -> List[CertificationRow]:
    """Certify the oracle of every (degree, level) cell and write certification.csv."""
    problem = build_problem(config)
    rows = []
    for degree in config.oracle.degrees:
        for level in config.oracle.levels:
            oracle, claimed = claimed_oracle(config, problem, degree, level)
            seed = cell_seed(config.master_seed, 1, level, degree)
            report = certify_oracle(oracle, problem.value, pair_sampler(config, problem, seed),
                                    config.certify.pairs, config.certify.tolerance)
            lipschitz = oracle(np.zeros(problem.dim)).certificate.lipschitz
            if not report.certified:
                x, y = report.violating_pair
                log.error("Certificate (delta=%s, L=%s, q=%s) refuted at level %s: x=%s, y=%s",
                          claimed, lipschitz, degree, level, np.array2string(x), np.array2string(y))
            rows.append(CertificationRow(degree, level, claimed, lipschitz, report))

    path = Path(config.output.directory if directory is None else directory)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "certification.csv", "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(CERTIFICATION_COLUMNS)
        for row in rows:
            report = row.report
            writer.writerow([repr(row.degree), repr(row.level), repr(row.delta_claimed), repr(row.lipschitz),
                             report.pairs, "true" if report.certified else "false", repr(report.max_violation),
                             "" if report.min_lower_gap is None else repr(report.min_lower_gap)])
    return rows


def rates_command(kind: CurveKind,
                  parameters: Dict[str, float],
                  k_min: float,
                  k_max: float,
                  points: int,
                  log_spaced: bool = False,
                  path: Optional[Union[str, os.PathLike]] = None) -> BoundCurve:
    if points < 1:
        raise RateParameterError(f"Number of points must be positive, got {points}")
    if not 0.0 <= k_min <= k_max:
        raise RateParameterError(f"Invalid iteration range [{k_min}, {k_max}]")
    if log_spaced:
        if k_min <= 0.0:
            raise RateParameterError("Log-spaced curves need k_min > 0")
        ks = np.geomspace(k_min, k_max, points)
    else:
        ks = np.linspace(k_min, k_max, points)
    curve = sample_curve(kind, parameters, ks)
    onset = monotone_onset(curve)
    log.info("Curve %s: %d points, non-increasing from k=%s", kind.name.lower(), points, onset)
    if path is not None:
        write_curve_csv(curve, path)
    return curve


def logsum_sweep_config(directory: Union[str, os.PathLike],
                        master_seed: int = 0,
                        workers: Optional[int] = None,
                        iterations: int = 5000,
                        repeats: int = 5,
                        levels: Sequence[float] = LOGSUM_LEVELS,
                        ordering_window: float = 0.1) -> ExperimentConfig:
    """The nonconvex log-sum sweep: noisy gradients of norm 0.1, 1 and 3 at degrees 0, 1/2 and 1."""
    return ExperimentConfig(problem=ProblemSpec(family=ProblemFamily.LOGSUM, n=64, N=128, radius=4.0, seed=0),
                            oracle=OracleSpec(family=OracleFamily.NOISY_GRADIENT,
                                              levels=list(levels),
                                              degrees=[0.0, 0.5, 1.0]),
                            solver=SolverSpec(algorithm=Algorithm.IPGM, iterations=iterations, step_scale=0.5),
                            output=OutputSpec(directory=str(directory)),
                            master_seed=master_seed,
                            repeats=repeats,
                            workers=workers,
                            ordering_window=ordering_window)


def reproduce_logsum_sweep(directory: Union[str, os.PathLike],
                           master_seed: int = 0,
                           workers: Optional[int] = None,
                           iterations: int = 5000,
                           repeats: int = 5,
                           long_horizon: int = LONG_HORIZON_ITERATIONS) -> LogSumSweepResult:
    """
    The log-sum sweep, then a second sweep at the largest noise level only, running `long_horizon`
    iterations into directory/long_horizon with plateaus averaged over the final 20%.
    A long horizon of 0 skips the second sweep.
    """
    if long_horizon < 0:
        raise ConfigError(f"Long horizon must be nonnegative, got {long_horizon}")
    result = LogSumSweepResult(run_experiment(logsum_sweep_config(directory, master_seed, workers, iterations,
                                                                  repeats)))
    if long_horizon > 0:
        config = logsum_sweep_config(Path(directory) / "long_horizon", master_seed, workers, long_horizon, repeats,
                                     [max(LOGSUM_LEVELS)], LONG_HORIZON_WINDOW)
        result.long_horizon = run_experiment(config)
    for level, ordered in result.ordering.items():
        if ordered is False:
            log.warning("Plateaus at level %s don't decrease with the degree", level)
    return result
