"""
Grid sweeps over oracle degrees, inexactness levels and repeats.

Every cell runs one solver on the shared problem instance, writes its trace next to the
matching theoretical bound and reports a summary row. Cells run concurrently and own their
outputs; the summary and the plateau ordering are assembled once every cell is done.
"""
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from statistics import median
from typing import Dict, List, Optional, Union

import numpy as np

from inexact_pgm.harness.config import Algorithm, ConfigError, ExperimentConfig, OracleFamily, ProblemFamily, \
    resolve_workers
from inexact_pgm.harness.seeds import cell_seed
from inexact_pgm.oracle.certificate import InvalidCertificateError
from inexact_pgm.oracle.handles import ExactOracle, HolderOracle, InexactOracle, NoisyGradientOracle, \
    ShiftedPointOracle
from inexact_pgm.oracle.holder import HolderFunction, holder_smoothing_constant
from inexact_pgm.oracle.smooth import OracleInputError
from inexact_pgm.problems.holder import generate_holder_instance
from inexact_pgm.problems.instance_io import Instance, load_instance
from inexact_pgm.problems.logsum import LogSumProblem, generate_logsum_instance
from inexact_pgm.problems.quadratic import QuadraticProblem, generate_quadratic_instance
from inexact_pgm.prox import ProxFunction
from inexact_pgm.rates import bound_fipgm, bound_thm2
from inexact_pgm.solver.adaptive import RetryLimitError, ipgm_adaptive_run
from inexact_pgm.solver.fipgm import ThetaRuleError, fipgm_run
from inexact_pgm.solver.ipgm import DivergenceError, aggregate_descent_check, ipgm_run
from inexact_pgm.solver.schedule import ScheduleConfig
from inexact_pgm.solver.trace import RunTrace

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["degree", "level", "repeat", "seed", "delta_eff", "status", "final_min_gm_sq",
                   "plateau", "bound_plateau", "dominated", "aggregate_ok"]
ORDERING_COLUMNS = ["level", "degrees", "window", "median_plateaus", "ordered"]
CHECK_TOLERANCE = 1e-9

FAILURES = {
    DivergenceError: "diverged",
    RetryLimitError: "retry_limit",
    ThetaRuleError: "theta_rule",
    OracleInputError: "oracle_error",
    InvalidCertificateError: "oracle_error",
}


@dataclass
class CellResult:
    degree: float
    level: float
    repeat: int
    seed: int
    delta_eff: float
    status: str = "ok"
    message: Optional[str] = None
    path: Optional[Path] = None
    min_gm_sq: Optional[np.ndarray] = None
    bound: Optional[np.ndarray] = None
    plateau: Optional[float] = None
    bound_plateau: Optional[float] = None
    dominated: Optional[bool] = None
    aggregate_ok: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ExperimentResult:
    directory: Path
    cells: List[CellResult]
    summary_path: Path
    ordering: Dict[float, Optional[bool]]

    @property
    def failed(self) -> bool:
        return any(not cell.ok for cell in self.cells)

    def cell(self, degree: float, level: float, repeat: int = 0) -> CellResult:
        for cell in self.cells:
            if cell.degree == degree and cell.level == level and cell.repeat == repeat:
                return cell
        raise KeyError((degree, level, repeat))


def build_problem(config: ExperimentConfig) -> Instance:
    spec = config.problem
    if spec.instance is not None:
        problem = load_instance(spec.instance)
        expected = {ProblemFamily.LOGSUM: LogSumProblem,
                    ProblemFamily.QUADRATIC: QuadraticProblem,
                    ProblemFamily.HOLDER: HolderFunction}[spec.family]
        if not isinstance(problem, expected):
            raise ConfigError(f"Instance {spec.instance} isn't a {spec.family.name.lower()} instance")
        return problem
    if spec.family is ProblemFamily.LOGSUM:
        return generate_logsum_instance(spec.n, spec.N, spec.radius, spec.noise_level, spec.seed)
    if spec.family is ProblemFamily.QUADRATIC:
        return generate_quadratic_instance(spec.n, spec.conditioning, spec.seed, spec.radius)
    return generate_holder_instance(spec.n, spec.nu, spec.seed)


def prox_term(config: ExperimentConfig, problem: Instance) -> ProxFunction:
    """The l1 ball for the log objective, and for the quadratic when the ball reduction is on."""
    if isinstance(problem, LogSumProblem):
        return ProxFunction.l1_ball(problem.radius)
    if isinstance(problem, QuadraticProblem) and config.oracle.ball_reduction:
        return ProxFunction.l1_ball(problem.radius)
    return ProxFunction.zero()


def build_oracle(config: ExperimentConfig, problem: Instance, degree: float) -> InexactOracle:
    family = config.oracle.family
    if family is OracleFamily.EXACT:
        return ExactOracle(problem, degree, convex=not isinstance(problem, LogSumProblem))
    if family is OracleFamily.NOISY_GRADIENT:
        radius = problem.radius if config.oracle.ball_reduction else None
        return NoisyGradientOracle(problem, degree, ball_radius=radius)
    if family is OracleFamily.SHIFTED_POINT:
        return ShiftedPointOracle(problem)
    return HolderOracle(problem, degree)


def effective_delta(config: ExperimentConfig, problem: Instance, level: float, degree: float) -> float:
    """
    Certificate accuracy of a grid level: the noise norm becomes level (2R)^(1-q) under the
    ball reduction and shifts become L_F level; other levels are accuracies already.
    """
    family = config.oracle.family
    if family is OracleFamily.NOISY_GRADIENT and config.oracle.ball_reduction:
        return level * (2.0 * problem.radius) ** (1.0 - degree)
    if family is OracleFamily.SHIFTED_POINT:
        return problem.lipschitz * level
    return level


def cell_schedule(config: ExperimentConfig, problem: Instance, degree: float, delta: float) -> ScheduleConfig:
    solver = config.solver
    holder = config.oracle.family is OracleFamily.HOLDER
    if holder:
        lipschitz = holder_smoothing_constant(problem.holder_constant, problem.exponent, degree, delta)
    else:
        lipschitz = problem.lipschitz
    return ScheduleConfig(L=lipschitz,
                          rho=lipschitz if solver.rho is None else solver.rho,
                          degree=degree,
                          delta0=delta,
                          beta=solver.beta,
                          zeta=solver.zeta,
                          max_iters=solver.iterations,
                          step_scale=solver.step_scale,
                          lipschitz_from_oracle=holder)


def run_solver(config: ExperimentConfig, problem: Instance, oracle: InexactOracle, h: ProxFunction,
               schedule: ScheduleConfig, seed: int, candidates: int) -> RunTrace:
    solver = config.solver
    x0 = np.zeros(problem.dim)
    if solver.algorithm is Algorithm.IPGM:
        return ipgm_run(problem, oracle, h, schedule, x0, seed, candidates)
    if solver.algorithm is Algorithm.ADAPTIVE:
        trace, _ = ipgm_adaptive_run(problem, oracle, h, schedule, x0, solver.epsilon0, seed)
        return trace
    return fipgm_run(problem, oracle, h, schedule, x0, solver.theta_rule, seed)


def ipgm_bound(schedule: ScheduleConfig, delta0_gap: float, iterations: int) -> np.ndarray:
    return np.array([bound_thm2(schedule.L, schedule.rho, schedule.degree, schedule.delta0, schedule.beta,
                                schedule.zeta, delta0_gap, k) for k in range(iterations)])


def fipgm_bound(schedule: ScheduleConfig, distance: float, iterations: int) -> np.ndarray:
    # FI-PGM runs with the curvature (L + q rho) / step_scale
    scaled = (schedule.L + schedule.degree * schedule.rho) / schedule.step_scale - schedule.degree * schedule.rho
    return np.array([bound_fipgm(scaled, schedule.degree, schedule.delta0, distance, k, schedule.rho)
                     for k in range(iterations)])


def plateau_estimate(values: np.ndarray, window: float) -> float:
    """Mean over the final `window` fraction of the values, at least the last one."""
    tail = max(1, int(len(values) * window))
    return float(np.mean(values[-tail:]))


def within(lhs: np.ndarray, rhs: np.ndarray) -> bool:
    return bool(np.all(lhs <= rhs + CHECK_TOLERANCE * (1.0 + np.abs(rhs))))


def cell_path(directory: Path, degree: float, level: float, repeat: int) -> Path:
    return directory / "cells" / f"q{degree:g}_level{level:g}_r{repeat}.csv"


def run_cell(config: ExperimentConfig, problem: Instance, h: ProxFunction, directory: Path,
             degree: float, level: float, repeat: int, candidates: int) -> CellResult:
    seed = cell_seed(config.master_seed, repeat, level, degree)
    delta = effective_delta(config, problem, level, degree)
    result = CellResult(degree, level, repeat, seed, delta)
    schedule = cell_schedule(config, problem, degree, delta)
    oracle = build_oracle(config, problem, degree)
    try:
        trace = run_solver(config, problem, oracle, h, schedule, seed, candidates)
    except tuple(FAILURES) as error:
        result.status = next(status for kind, status in FAILURES.items() if isinstance(error, kind))
        result.message = str(error)
        log.warning("Cell q=%s level=%s repeat=%d stopped: %s", degree, level, repeat, error)
        return result

    algorithm = config.solver.algorithm
    result.min_gm_sq = trace.min_gm_sq()
    result.plateau = plateau_estimate(result.min_gm_sq, config.ordering_window)
    if algorithm is Algorithm.IPGM:
        delta0_gap = trace.f0 - problem.lower_bound
        result.bound = ipgm_bound(schedule, delta0_gap, len(trace))
        result.dominated = within(result.min_gm_sq, result.bound)
        if schedule.beta == 0.0 and schedule.zeta == 0.0:
            result.bound_plateau = bound_thm2(schedule.L, schedule.rho, degree, delta, 0.0, 0.0, 0.0, 0.0)
        else:
            result.bound_plateau = float(result.bound[-1])
        lhs, rhs = aggregate_descent_check(trace, problem.lower_bound, schedule.rho)
        result.aggregate_ok = within(lhs, rhs)
    elif algorithm is Algorithm.FIPGM and hasattr(problem, "distance_to_minimizer"):
        result.bound = fipgm_bound(schedule, problem.distance_to_minimizer(trace.x0), len(trace))
        result.dominated = within(trace.y_objectives() - problem.optimal_value, result.bound)
        result.bound_plateau = float(result.bound[-1])

    result.path = cell_path(directory, degree, level, repeat)
    trace.write_csv(result.path, result.bound)
    log.info("Cell q=%s level=%s repeat=%d: plateau=%.3e, dominated=%s",
             degree, level, repeat, result.plateau, result.dominated)
    return result


def format_optional(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(float(value))


def write_summary(path: Path, cells: List[CellResult]):
    with open(path, "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for cell in cells:
            final = None if cell.min_gm_sq is None else cell.min_gm_sq[-1]
            writer.writerow([repr(cell.degree), repr(cell.level), cell.repeat, cell.seed, repr(cell.delta_eff),
                             cell.status, format_optional(final), format_optional(cell.plateau),
                             format_optional(cell.bound_plateau), format_optional(cell.dominated),
                             format_optional(cell.aggregate_ok)])


def plateau_ordering(config: ExperimentConfig, cells: List[CellResult]) -> Dict[float, Optional[bool]]:
    """
    Per level, whether the median plateau over repeats doesn't increase with the degree.
    None when a cell of the level failed.
    """
    ordering: Dict[float, Optional[bool]] = {}
    degrees = sorted(config.oracle.degrees)
    for level in config.oracle.levels:
        medians = []
        for degree in degrees:
            plateaus = [cell.plateau for cell in cells if cell.level == level and cell.degree == degree]
            if any(plateau is None for plateau in plateaus):
                medians = None
                break
            medians.append(median(plateaus))
        ordering[level] = None if medians is None else all(
            later <= earlier for earlier, later in zip(medians, medians[1:]))
    return ordering


def write_ordering(path: Path, config: ExperimentConfig, cells: List[CellResult],
                   ordering: Dict[float, Optional[bool]]):
    degrees = sorted(config.oracle.degrees)
    with open(path, "w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(ORDERING_COLUMNS)
        for level, ordered in ordering.items():
            medians = ""
            if ordered is not None:
                medians = " ".join(repr(median([cell.plateau for cell in cells
                                                if cell.level == level and cell.degree == degree]))
                                   for degree in degrees)
            writer.writerow([repr(level), " ".join(repr(degree) for degree in degrees), repr(config.ordering_window),
                             medians, format_optional(ordered)])


def run_grid(config: ExperimentConfig, directory: Path, candidates: int) -> ExperimentResult:
    problem = build_problem(config)
    h = prox_term(config, problem)
    (directory / "cells").mkdir(parents=True, exist_ok=True)
    grid = [(degree, level, repeat)
            for degree in config.oracle.degrees
            for level in config.oracle.levels
            for repeat in range(config.repeats)]
    workers = resolve_workers(config)
    log.info("Running %d cells with %d workers into %s", len(grid), workers, directory)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_cell, config, problem, h, directory, degree, level, repeat, candidates)
                   for degree, level, repeat in grid]
        cells = [future.result() for future in futures]

    summary_path = directory / "summary.csv"
    write_summary(summary_path, cells)
    ordering = plateau_ordering(config, cells)
    write_ordering(directory / "ordering.csv", config, cells, ordering)
    return ExperimentResult(directory, cells, summary_path, ordering)


def run_experiment(config: ExperimentConfig, directory: Optional[Union[str, Path]] = None) -> ExperimentResult:
    return run_grid(config, Path(config.output.directory if directory is None else directory), 1)


def run_worst_case(config: ExperimentConfig, directory: Optional[Union[str, Path]] = None) -> ExperimentResult:
    """Sweep where every iteration commits the noise draw with the largest step among m candidates."""
    if config.worst_case_directions < 1:
        raise ConfigError("worst_case_directions must be positive for a worst-case sweep")
    if config.oracle.family is not OracleFamily.NOISY_GRADIENT:
        raise ConfigError("Worst-case sweeps need the noisy-gradient oracle")
    if config.solver.algorithm is not Algorithm.IPGM:
        raise ConfigError("Worst-case sweeps run I-PGM only")
    base = Path(config.output.directory if directory is None else directory)
    return run_grid(config, base / "worst_case", config.worst_case_directions)
