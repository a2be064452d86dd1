"""
Experiment configuration: a JSON document (with "#" comments) describing the problem,
the oracle grid, the solver and the outputs of a sweep.

    {
      "version": 1,
      "master_seed": 0,
      "repeats": 5,
      "problem": {"family": "logsum", "n": 64, "N": 128, "radius": 4.0, "seed": 0},
      "oracle": {"family": "noisy_gradient", "levels": [0.1, 1, 3], "degrees": [0, 0.5, 1]},
      "solver": {"algorithm": "ipgm", "iterations": 5000, "step_scale": 0.5},
      "output": {"directory": "results"},
      "ordering_window": 0.1
    }

ordering_window is the fraction of final iterations the plateau of a cell is averaged over.
"""
import json
import os
from dataclasses import dataclass, field, fields
from enum import Enum, auto
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import LarkError

from inexact_pgm.solver.fipgm import ThetaRule

CONFIG_VERSION = 1
WORKERS_VARIABLE = "INEXACT_PGM_WORKERS"


class ConfigError(Exception):
    pass


class ProblemFamily(Enum):
    LOGSUM = auto()
    QUADRATIC = auto()
    HOLDER = auto()


class OracleFamily(Enum):
    EXACT = auto()
    NOISY_GRADIENT = auto()
    SHIFTED_POINT = auto()
    HOLDER = auto()


class Algorithm(Enum):
    IPGM = auto()
    ADAPTIVE = auto()
    FIPGM = auto()


def initialize_lark() -> Lark:
    return Lark.open("config.lark", rel_to=__file__, parser="lalr")


# noinspection PyMethodMayBeStatic
class ConfigTransformer(Transformer):
    @v_args(inline=True)
    def string(self, token):
        # ESCAPED_STRING lets through escapes that JSON rejects, such as \q
        try:
            return json.loads(token)
        except ValueError as error:
            raise ConfigError(f"Invalid string literal {token}: {error}") from error

    @v_args(inline=True)
    def number(self, token):
        text = str(token)
        if any(symbol in text for symbol in ".eE"):
            return float(text)
        return int(text)

    def true(self, _):
        return True

    def false(self, _):
        return False

    def null(self, _):
        return None

    def array(self, children):
        return list(children)

    @v_args(inline=True)
    def pair(self, key, value):
        return key, value

    def object(self, children):
        result = {}
        for key, value in children:
            if key in result:
                raise ConfigError(f"Key '{key}' appears twice in one object")
            result[key] = value
        return result


def enum_value(enum_class) -> Callable[[Any], Enum]:
    def convert(value):
        if not isinstance(value, str):
            raise TypeError(value)
        return enum_class[value.strip().upper().replace("-", "_")]

    return convert


def as_int(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(value)
    return value


def as_float(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(value)
    return float(value)


def as_bool(value) -> bool:
    if not isinstance(value, bool):
        raise TypeError(value)
    return value


def as_str(value) -> str:
    if not isinstance(value, str):
        raise TypeError(value)
    return value


def as_float_list(value) -> List[float]:
    if not isinstance(value, list) or not value:
        raise TypeError(value)
    return [as_float(item) for item in value]


def optional(convert: Callable[[Any], Any]) -> Callable[[Any], Any]:
    return lambda value: None if value is None else convert(value)


def setting(default, convert: Callable[[Any], Any]):
    return field(default=default, metadata={"convert": convert})


def required(convert: Callable[[Any], Any]):
    return field(metadata={"convert": convert})


@dataclass(frozen=True)
class ProblemSpec:
    family: ProblemFamily = setting(ProblemFamily.LOGSUM, enum_value(ProblemFamily))
    n: int = setting(64, as_int)
    N: int = setting(128, as_int)
    radius: float = setting(4.0, as_float)
    seed: int = setting(0, as_int)
    noise_level: Optional[float] = setting(None, optional(as_float))
    conditioning: float = setting(10.0, as_float)
    nu: float = setting(0.5, as_float)
    instance: Optional[str] = setting(None, optional(as_str))

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise ConfigError(f"Problem dimensions must be positive, got n={self.n}, N={self.N}")
        if not self.radius > 0.0:
            raise ConfigError(f"Radius must be positive, got {self.radius}")
        if self.noise_level is not None and self.noise_level < 0.0:
            raise ConfigError(f"Noise level must be nonnegative, got {self.noise_level}")
        if not self.conditioning >= 1.0:
            raise ConfigError(f"Conditioning must be at least 1, got {self.conditioning}")
        if not (0.0 < self.nu <= 1.0):
            raise ConfigError(f"Hölder exponent must lie in (0, 1], got {self.nu}")


@dataclass(frozen=True)
class OracleSpec:
    family: OracleFamily = required(enum_value(OracleFamily))
    levels: List[float] = required(as_float_list)
    degrees: List[float] = required(as_float_list)
    ball_reduction: bool = setting(True, as_bool)

    def __post_init__(self):
        for level in self.levels:
            if level < 0.0:
                raise ConfigError(f"Inexactness levels must be nonnegative, got {level}")
        for degree in self.degrees:
            if not (0.0 <= degree < 2.0):
                raise ConfigError(f"Degrees must lie in [0, 2), got {degree}")
        if len(set(self.levels)) != len(self.levels) or len(set(self.degrees)) != len(self.degrees):
            raise ConfigError("Levels and degrees must not repeat")
        if self.family is OracleFamily.NOISY_GRADIENT:
            if self.ball_reduction and max(self.degrees) > 1.0:
                raise ConfigError(f"Noisy gradients restricted to a ball support q <= 1, got {max(self.degrees)}")
            if not self.ball_reduction and set(self.degrees) != {1.0}:
                raise ConfigError("Noisy gradients without the ball reduction have degree 1 only")
        if self.family is OracleFamily.SHIFTED_POINT and set(self.degrees) != {1.0}:
            raise ConfigError("Shifted-point gradients have degree 1 only")


@dataclass(frozen=True)
class SolverSpec:
    algorithm: Algorithm = setting(Algorithm.IPGM, enum_value(Algorithm))
    iterations: int = setting(5000, as_int)
    step_scale: float = setting(0.5, as_float)
    rho: Optional[float] = setting(None, optional(as_float))
    beta: float = setting(0.0, as_float)
    zeta: float = setting(0.0, as_float)
    theta_rule: ThetaRule = setting(ThetaRule.EQUALITY_ROOT, enum_value(ThetaRule))
    epsilon0: float = setting(1.0, as_float)

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"Number of iterations must be positive, got {self.iterations}")
        if not (0.0 < self.step_scale <= 1.0):
            raise ConfigError(f"step_scale must lie in (0, 1], got {self.step_scale}")
        if self.rho is not None and not self.rho > 0.0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if not (0.0 <= self.beta < 1.0) or not (0.0 <= self.zeta < 1.0):
            raise ConfigError(f"beta and zeta must lie in [0, 1), got {self.beta} and {self.zeta}")
        if not self.epsilon0 > 0.0:
            raise ConfigError(f"epsilon0 must be positive, got {self.epsilon0}")


@dataclass(frozen=True)
class CertifySpec:
    pairs: int = setting(1000, as_int)
    tolerance: float = setting(1e-7, as_float)
    claim_scale: float = setting(1.0, as_float)

    def __post_init__(self):
        if self.pairs < 1:
            raise ConfigError(f"Number of certification pairs must be positive, got {self.pairs}")
        if self.tolerance < 0.0:
            raise ConfigError(f"Tolerance must be nonnegative, got {self.tolerance}")
        if not self.claim_scale > 0.0:
            raise ConfigError(f"claim_scale must be positive, got {self.claim_scale}")


@dataclass(frozen=True)
class OutputSpec:
    directory: str = setting("results", as_str)


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    oracle: OracleSpec
    solver: SolverSpec = field(default_factory=SolverSpec)
    certify: CertifySpec = field(default_factory=CertifySpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    version: int = CONFIG_VERSION
    master_seed: int = 0
    repeats: int = 1
    worst_case_directions: int = 0
    workers: Optional[int] = None
    ordering_window: float = 0.1

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"Unsupported config version {self.version}, expected {CONFIG_VERSION}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be positive, got {self.repeats}")
        if self.worst_case_directions < 0:
            raise ConfigError(f"worst_case_directions must be nonnegative, got {self.worst_case_directions}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if not (0.0 < self.ordering_window <= 1.0):
            raise ConfigError(f"ordering_window must lie in (0, 1], got {self.ordering_window}")
        check_combination(self)


def check_combination(config: ExperimentConfig):
    problem, oracle, solver = config.problem, config.oracle, config.solver
    if (oracle.family is OracleFamily.HOLDER) != (problem.family is ProblemFamily.HOLDER):
        raise ConfigError(f"Oracle family {oracle.family.name.lower()} doesn't fit "
                          f"problem family {problem.family.name.lower()}")
    if oracle.family is OracleFamily.HOLDER:
        if max(oracle.degrees) >= 1.0 + problem.nu:
            raise ConfigError(f"Hölder oracles need q < 1 + nu = {1.0 + problem.nu}")
        if problem.nu < 1.0 and min(oracle.levels) <= 0.0:
            raise ConfigError("Hölder oracles with nu < 1 need positive accuracies")
    if solver.algorithm is Algorithm.ADAPTIVE and min(oracle.degrees) < 1.0:
        raise ConfigError("The adaptive solver chooses rho for degrees in [1, 2) only")


def build_section(cls, raw: Any, path: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"Section '{path}' must be an object")
    known = {item.name: item for item in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"Unknown keys in '{path}': {', '.join(unknown)}")
    values = {}
    for name, value in raw.items():
        try:
            values[name] = known[name].metadata["convert"](value)
        except (TypeError, ValueError, KeyError) as error:
            raise ConfigError(f"Invalid value for '{path}.{name}': {value!r}") from error
    try:
        return cls(**values)
    except TypeError as error:
        raise ConfigError(f"Section '{path}' is incomplete: {error}") from error


TOP_LEVEL_CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "version": as_int,
    "master_seed": as_int,
    "repeats": as_int,
    "worst_case_directions": as_int,
    "workers": optional(as_int),
    "ordering_window": as_float,
}

SECTIONS = {
    "problem": ProblemSpec,
    "oracle": OracleSpec,
    "solver": SolverSpec,
    "certify": CertifySpec,
    "output": OutputSpec,
}


def config_from_mapping(raw: Any) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("Configuration must be an object")
    unknown = sorted(set(raw) - set(TOP_LEVEL_CONVERTERS) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"Unknown keys: {', '.join(unknown)}")
    if "version" not in raw:
        raise ConfigError("Configuration misses the 'version' field")
    for name in ("problem", "oracle"):
        if name not in raw:
            raise ConfigError(f"Configuration misses the '{name}' section")
    values = {}
    for name, value in raw.items():
        if name in SECTIONS:
            values[name] = build_section(SECTIONS[name], value, name)
            continue
        try:
            values[name] = TOP_LEVEL_CONVERTERS[name](value)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"Invalid value for '{name}': {value!r}") from error
    return ExperimentConfig(**values)


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = ConfigTransformer().transform(initialize_lark().parse(text))
    except LarkError as error:
        if isinstance(getattr(error, "orig_exc", None), ConfigError):
            raise error.orig_exc from error
        raise ConfigError(f"Malformed configuration: {error}") from error
    return config_from_mapping(raw)


def load_config(path: Union[str, os.PathLike]) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise ConfigError(f"Can't read the configuration {path}: {error}") from error
    return parse_config(text)


def resolve_workers(config: ExperimentConfig, environ: Optional[Mapping[str, str]] = None) -> int:
    """The config value wins over the environment variable; one worker when neither is set."""
    if config.workers is not None:
        return config.workers
    environ = os.environ if environ is None else environ
    value = environ.get(WORKERS_VARIABLE)
    if value is None:
        return 1
    try:
        workers = int(value)
    except ValueError as error:
        raise ConfigError(f"{WORKERS_VARIABLE} must be an integer, got {value!r}") from error
    if workers < 1:
        raise ConfigError(f"{WORKERS_VARIABLE} must be positive, got {workers}")
    return workers
