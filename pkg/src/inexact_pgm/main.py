import argparse
import logging
import sys
from typing import Dict, List, Optional

from inexact_pgm.harness.commands import LONG_HORIZON_ITERATIONS, certify_command, rates_command, \
    reproduce_logsum_sweep
from inexact_pgm.harness.config import ConfigError, load_config
from inexact_pgm.harness.experiment import run_experiment, run_worst_case
from inexact_pgm.oracle.certificate import InvalidCertificateError
from inexact_pgm.oracle.certify import CertificationInputError
from inexact_pgm.oracle.holder import HolderParameterError
from inexact_pgm.oracle.smooth import OracleInputError
from inexact_pgm.problems.instance_io import InstanceFormatError
from inexact_pgm.problems.objective import ProblemSpecError
from inexact_pgm.rates import CurveKind, RateParameterError
from inexact_pgm.solver.schedule import ScheduleError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_REFUTED = 2
EXIT_FAILED_CELL = 3

INPUT_ERRORS = (ConfigError, InstanceFormatError, ProblemSpecError, RateParameterError, ScheduleError,
                HolderParameterError, InvalidCertificateError, OracleInputError, CertificationInputError)


def parse_parameters(pairs: List[str]) -> Dict[str, float]:
    parameters = {}
    for pair in pairs:
        name, separator, value = pair.partition("=")
        if not separator:
            raise RateParameterError(f"Parameters are given as NAME=VALUE, got '{pair}'")
        try:
            parameters[name.strip()] = float(value)
        except ValueError as error:
            raise RateParameterError(f"Parameter {name} isn't a number: '{value}'") from error
    return parameters


def run(arguments) -> int:
    result = run_experiment(load_config(arguments.config), arguments.output)
    return EXIT_FAILED_CELL if result.failed else EXIT_OK


def worst_case(arguments) -> int:
    result = run_worst_case(load_config(arguments.config), arguments.output)
    return EXIT_FAILED_CELL if result.failed else EXIT_OK


def certify(arguments) -> int:
    rows = certify_command(load_config(arguments.config), arguments.output)
    return EXIT_OK if all(row.report.certified for row in rows) else EXIT_REFUTED


def rates(arguments) -> int:
    try:
        kind = CurveKind[arguments.kind.upper().replace("-", "_")]
    except KeyError as error:
        raise RateParameterError(f"Unknown curve kind '{arguments.kind}'") from error
    curve = rates_command(kind, parse_parameters(arguments.param), arguments.k_min, arguments.k_max,
                          arguments.points, arguments.log, arguments.output)
    if arguments.output is None:
        for k, value in curve.samples:
            print(f"{k!r},{value!r}")
    return EXIT_OK


def logsum_sweep(arguments) -> int:
    result = reproduce_logsum_sweep(arguments.output, arguments.seed, arguments.workers, arguments.iterations,
                                    arguments.repeats, arguments.long_horizon)
    return EXIT_FAILED_CELL if result.failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inexact-pgm",
                                     description="Proximal gradient methods with degree-q inexact oracles")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration summary")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (("run", run, "sweep a configured grid"),
                                     ("worst-case", worst_case, "sweep with adversarial noise draws"),
                                     ("certify", certify, "check the oracle certificates of a grid")):
        command = commands.add_parser(name, help=help_text)
        command.add_argument("config", help="path to the JSON configuration")
        command.add_argument("-o", "--output", help="output directory, overrides the configuration")
        command.set_defaults(handler=handler)

    curve = commands.add_parser("rates", help="sample a theoretical bound")
    curve.add_argument("--kind", required=True, help=", ".join(kind.name.lower() for kind in CurveKind))
    curve.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    curve.add_argument("--k-min", type=float, default=0.0)
    curve.add_argument("--k-max", type=float, default=1000.0)
    curve.add_argument("--points", type=int, default=100)
    curve.add_argument("--log", action="store_true", help="log-spaced iteration counters")
    curve.add_argument("-o", "--output", help="CSV file, stdout when missing")
    curve.set_defaults(handler=rates)

    reproduce = commands.add_parser("reproduce-fig1", aliases=["logsum-sweep"], help="the nonconvex log-sum sweep")
    reproduce.add_argument("-o", "--output", default="results/logsum")
    reproduce.add_argument("--seed", type=int, default=0)
    reproduce.add_argument("--workers", type=int)
    reproduce.add_argument("--iterations", type=int, default=5000)
    reproduce.add_argument("--repeats", type=int, default=5)
    reproduce.add_argument("--long-horizon", type=int, default=LONG_HORIZON_ITERATIONS,
                           help="iterations of the extra run at the largest noise level, 0 skips it")
    reproduce.set_defaults(handler=logsum_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    arguments = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if arguments.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return arguments.handler(arguments)
    except INPUT_ERRORS as error:
        log.error("%s", error)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
