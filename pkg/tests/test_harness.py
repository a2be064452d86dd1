from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from inexact_pgm import main
from inexact_pgm.harness import experiment
from inexact_pgm.harness.commands import certify_command, logsum_sweep_config, reproduce_logsum_sweep
from inexact_pgm.harness.config import WORKERS_VARIABLE, Algorithm, CertifySpec, ConfigError, OracleFamily, \
    ProblemFamily, parse_config, resolve_workers
from inexact_pgm.harness.experiment import CellResult, plateau_estimate, plateau_ordering, run_experiment, \
    run_worst_case, write_ordering
from inexact_pgm.harness.seeds import cell_seed
from inexact_pgm.oracle.certificate import InvalidCertificateError
from inexact_pgm.oracle.smooth import OracleInputError
from inexact_pgm.solver.fipgm import ThetaRule
from inexact_pgm.solver.ipgm import DivergenceError
from tests.utilities import directory_snapshot, read_csv_rows

SAMPLE_CONFIG = """
# nonconvex sweep
{
  "version": 1,
  "master_seed": 7,
  "repeats": 2,
  "problem": {"family": "logsum", "n": 8, "N": 16, "radius": 2.5},
  "oracle": {"family": "noisy-gradient", "levels": [0.1, 1], "degrees": [0, 0.5, 1]},
  "solver": {"algorithm": "ipgm", "iterations": 50, "step_scale": 0.5, "theta_rule": "half_linear"},
  "output": {"directory": "out"}
}
"""


def write_config(tmp_path, text: str):
    path = tmp_path / "config.json"
    path.write_text(text)
    return path


def quadratic_config_text(directory, oracle: str, solver: str, certify: str = "{}") -> str:
    return f"""{{
      "version": 1,
      "problem": {{"family": "quadratic", "n": 2, "conditioning": 1}},
      "oracle": {oracle},
      "solver": {solver},
      "certify": {certify},
      "output": {{"directory": "{Path(directory).as_posix()}"}}
    }}"""


def test_parse_config():
    config = parse_config(SAMPLE_CONFIG)
    assert config.master_seed == 7 and config.repeats == 2
    assert config.problem.family is ProblemFamily.LOGSUM
    assert config.problem.n == 8 and config.problem.radius == 2.5
    assert config.oracle.family is OracleFamily.NOISY_GRADIENT
    assert config.oracle.levels == [0.1, 1.0] and config.oracle.degrees == [0.0, 0.5, 1.0]
    assert config.solver.algorithm is Algorithm.IPGM
    assert config.solver.theta_rule is ThetaRule.HALF_LINEAR
    assert config.solver.rho is None
    assert config.certify.pairs == 1000
    assert config.output.directory == "out"


@pytest.mark.parametrize("text", [
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, "version": 1}',
    '{"version": 2, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}}',
    '{"problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}}',
    '{"version": 1, "problem": {}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, "extra": 1}',
    '{"version": 1, "problem": {"size": 3}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, "repeats": true}',
    '{"version": 1, "problem": {}, "oracle": {"family": "magic", "levels": [0], "degrees": [1]}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0, 0], "degrees": [1]}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [-1], "degrees": [1]}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "noisy_gradient", "levels": [1], "degrees": [1.5]}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "holder", "levels": [1], "degrees": [0]}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [0.5]}, '
    '"solver": {"algorithm": "adaptive"}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, '
    '"solver": {"step_scale": 1.5}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]},',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, '
    '"output": {"directory": "a\\qb"}}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, '
    '"ordering_window": 0}',
    '{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, '
    '"ordering_window": 1.5}',
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("literal, expected", [
    (r'"a\/b"', "a/b"),
    (r'"first\nsecond"', "first\nsecond"),
    (r'"\u0041\t"', "A\t"),
    (r'"say \"hi\" \\ bye"', 'say "hi" \\ bye'),
])
def test_config_string_escapes(literal, expected):
    config = parse_config('{"version": 1, "problem": {}, "oracle": {"family": "exact", "levels": [0], "degrees": [1]}, '
                          '"output": {"directory": ' + literal + '}}')
    assert config.output.directory == expected


def test_resolve_workers():
    config = logsum_sweep_config("unused")
    assert resolve_workers(config, {}) == 1
    assert resolve_workers(config, {WORKERS_VARIABLE: "3"}) == 3
    assert resolve_workers(replace(config, workers=2), {WORKERS_VARIABLE: "3"}) == 2
    for value in ("zero", "0"):
        with pytest.raises(ConfigError):
            resolve_workers(config, {WORKERS_VARIABLE: value})


def test_cell_seeds_depend_on_coordinates_only():
    assert cell_seed(0, 1, 0.1, 0.5) == cell_seed(0, 1, 0.1, 0.5)
    seeds = {cell_seed(0, repeat, level, degree)
             for repeat in range(2) for level in (0.1, 1.0) for degree in (0.0, 1.0)}
    assert len(seeds) == 8
    assert cell_seed(1, 0, 0.1, 0.5) != cell_seed(0, 0, 0.1, 0.5)


# Sweep the log-sum grid with 5000 iterations.
# Expect every cell to stay below its bound and to satisfy the aggregate descent inequality
def test_logsum_sweep_cells_are_dominated(tmp_path):
    result = run_experiment(logsum_sweep_config(tmp_path, iterations=5000, repeats=1))
    assert not result.failed
    assert len(result.cells) == 9
    for cell in result.cells:
        assert cell.dominated and cell.aggregate_ok
        assert cell.bound_plateau > 0.0
    summary = read_csv_rows(result.summary_path)
    assert len(summary["degree"]) == 9
    assert set(summary["status"]) == {"ok"}
    assert set(summary["dominated"]) == {"true"}
    columns = read_csv_rows(result.cell(0.5, 1.0).path)
    assert "bound" in columns and len(columns["k"]) == 5000
    ordering = read_csv_rows(tmp_path / "ordering.csv")
    assert ordering["window"] == ["0.1"] * 3
    assert set(result.ordering) == {0.1, 1.0, 3.0}
    assert all(isinstance(ordered, bool) for ordered in result.ordering.values())


# Run the preset sweep twice from the command line with the same master seed on two workers.
# Expect byte-identical output directories, the long-horizon sweep included
def test_reproduce_command_is_deterministic(tmp_path):
    for name in ("first", "second"):
        arguments = ["reproduce-fig1", "-o", str(tmp_path / name), "--iterations", "200", "--repeats", "2",
                     "--workers", "2", "--long-horizon", "400"]
        assert main.main(arguments) == main.EXIT_OK
    first, second = directory_snapshot(tmp_path / "first"), directory_snapshot(tmp_path / "second")
    assert len(first) == 2 + 18 + 2 + 6
    assert first == second
    assert read_csv_rows(tmp_path / "first" / "long_horizon" / "summary.csv")["level"] == ["3.0"] * 6


def test_reproduce_command_arguments(tmp_path):
    parser = main.build_parser()
    for name in ("reproduce-fig1", "logsum-sweep"):
        arguments = parser.parse_args([name, "--long-horizon", "0"])
        assert arguments.handler is main.logsum_sweep
        assert arguments.iterations == 5000 and arguments.repeats == 5 and arguments.long_horizon == 0
    assert parser.parse_args(["reproduce-fig1"]).long_horizon == 20000
    assert main.main(["reproduce-fig1", "-o", str(tmp_path), "--long-horizon", "-1"]) == main.EXIT_INVALID


# Reproduce a short sweep followed by a longer one at the largest noise level.
# Expect the longer sweep to extend the same noise draws and to average plateaus over its final 20%
def test_long_horizon_sweep(tmp_path):
    result = reproduce_logsum_sweep(tmp_path, iterations=50, repeats=1, long_horizon=200)
    assert not result.failed
    assert {cell.level for cell in result.long_horizon.cells} == {3.0}
    for cell in result.long_horizon.cells:
        assert len(cell.min_gm_sq) == 200
        assert cell.plateau == pytest.approx(np.mean(cell.min_gm_sq[-40:]))
        assert np.array_equal(cell.min_gm_sq[:50], result.sweep.cell(cell.degree, 3.0).min_gm_sq)
    assert set(result.ordering) == {0.1, 1.0, 3.0}
    assert result.ordering[3.0] == result.long_horizon.ordering[3.0]
    assert read_csv_rows(tmp_path / "long_horizon" / "ordering.csv")["window"] == ["0.2"]


def test_plateau_estimate_window():
    values = np.arange(10.0, 0.0, -1.0)
    assert plateau_estimate(values, 0.2) == 1.5
    assert plateau_estimate(values, 0.1) == 1.0
    assert plateau_estimate(values, 0.01) == 1.0
    assert plateau_estimate(values, 1.0) == 5.5


# Give every level three repeats per degree, one level with a failed cell.
# Expect medians over repeats to decide the ordering and the failed level to stay undecided
def test_plateau_ordering_uses_medians(tmp_path):
    config = replace(logsum_sweep_config(tmp_path, repeats=3), ordering_window=0.2)
    plateaus = {0.1: {0.0: [3.0, 1.0, 2.0], 0.5: [2.0, 2.0, 9.0], 1.0: [0.0, 1.0, 5.0]},
                1.0: {0.0: [1.0, 1.0, 1.0], 0.5: [2.0, 2.0, 2.0], 1.0: [0.0, 0.0, 0.0]},
                3.0: {0.0: [1.0, 1.0, 1.0], 0.5: [1.0, None, 1.0], 1.0: [0.0, 0.0, 0.0]}}
    cells = [CellResult(degree, level, repeat, 0, level, plateau=plateau)
             for level, rows in plateaus.items()
             for degree, values in rows.items()
             for repeat, plateau in enumerate(values)]
    ordering = plateau_ordering(config, cells)
    assert ordering == {0.1: True, 1.0: False, 3.0: None}

    write_ordering(tmp_path / "ordering.csv", config, cells, ordering)
    columns = read_csv_rows(tmp_path / "ordering.csv")
    assert columns["window"] == ["0.2"] * 3
    assert columns["median_plateaus"][0] == "2.0 2.0 1.0"
    assert columns["ordered"] == ["true", "false", ""]


# Run the same grid with plain and with worst-of-four noise draws.
# Expect the committed first step to be at least as long as the plain one
def test_worst_case_takes_longest_first_step(tmp_path):
    config = replace(logsum_sweep_config(tmp_path, iterations=20, repeats=1), worst_case_directions=4)
    normal = run_experiment(config, tmp_path / "normal")
    worst = run_worst_case(config, tmp_path)
    assert (tmp_path / "worst_case" / "summary.csv").exists()
    for cell in worst.cells:
        plain = normal.cell(cell.degree, cell.level)
        assert cell.seed == plain.seed
        assert cell.min_gm_sq[0] >= plain.min_gm_sq[0]


def test_worst_case_needs_directions(tmp_path):
    with pytest.raises(ConfigError):
        run_worst_case(logsum_sweep_config(tmp_path, iterations=5, repeats=1))


def test_diverged_cell_is_reported(tmp_path, monkeypatch):
    def diverge(*args, **kwargs):
        raise DivergenceError(3, float("inf"))

    monkeypatch.setattr(experiment, "ipgm_run", diverge)
    result = run_experiment(logsum_sweep_config(tmp_path, iterations=5, repeats=1))
    assert result.failed
    assert {cell.status for cell in result.cells} == {"diverged"}
    assert set(read_csv_rows(result.summary_path)["status"]) == {"diverged"}

    path = write_config(tmp_path, quadratic_config_text(
        tmp_path / "cli", '{"family": "noisy_gradient", "levels": [0.1], "degrees": [1]}', '{"iterations": 5}'))
    assert main.main(["run", str(path)]) == main.EXIT_FAILED_CELL


@pytest.mark.parametrize("error_class", [OracleInputError, InvalidCertificateError])
def test_oracle_failure_is_isolated(tmp_path, monkeypatch, error_class):
    def fail(*args, **kwargs):
        raise error_class("overflowing oracle output")

    monkeypatch.setattr(experiment, "ipgm_run", fail)
    result = run_experiment(logsum_sweep_config(tmp_path, iterations=5, repeats=1))
    assert result.failed
    assert {cell.status for cell in result.cells} == {"oracle_error"}
    assert set(read_csv_rows(result.summary_path)["status"]) == {"oracle_error"}
    assert set(result.ordering.values()) == {None}


def test_fipgm_sweep_is_dominated(tmp_path):
    config = parse_config(f"""{{
      "version": 1,
      "problem": {{"family": "quadratic", "n": 16, "conditioning": 10}},
      "oracle": {{"family": "exact", "levels": [0], "degrees": [1], "ball_reduction": false}},
      "solver": {{"algorithm": "fipgm", "iterations": 500}},
      "output": {{"directory": "{tmp_path.as_posix()}"}}
    }}""")
    result = run_experiment(config)
    cell = result.cell(1.0, 0.0)
    assert cell.ok and cell.dominated
    assert cell.aggregate_ok is None


def test_holder_sweep_runs(tmp_path):
    config = parse_config(f"""{{
      "version": 1,
      "problem": {{"family": "holder", "n": 10, "nu": 0.5, "seed": 1}},
      "oracle": {{"family": "holder", "levels": [0.1], "degrees": [0, 0.5]}},
      "solver": {{"iterations": 300}},
      "output": {{"directory": "{tmp_path.as_posix()}"}}
    }}""")
    result = run_experiment(config)
    assert not result.failed
    for cell in result.cells:
        assert cell.path.exists()
        assert np.all(np.diff(cell.min_gm_sq) <= 0.0)


def test_adaptive_sweep_runs(tmp_path):
    config = parse_config(f"""{{
      "version": 1,
      "problem": {{"family": "quadratic", "n": 8}},
      "oracle": {{"family": "noisy_gradient", "levels": [0.01], "degrees": [1]}},
      "solver": {{"algorithm": "adaptive", "iterations": 100}},
      "output": {{"directory": "{tmp_path.as_posix()}"}}
    }}""")
    result = run_experiment(config)
    assert not result.failed
    assert result.cell(1.0, 0.01).dominated is None


def test_canonical_grid_certifies(tmp_path):
    config = replace(logsum_sweep_config(tmp_path), certify=CertifySpec(pairs=200))
    rows = certify_command(config)
    assert len(rows) == 9
    assert all(row.report.certified for row in rows)
    assert len(read_csv_rows(tmp_path / "certification.csv")["certified"]) == 9


# Certify noisy gradients of norm 0.5 against a tenfold smaller claimed accuracy.
# Expect exit code 2, and exit code 0 once the claim is honest
def test_cli_certify(tmp_path):
    oracle = '{"family": "noisy_gradient", "levels": [0.5], "degrees": [1]}'
    path = write_config(tmp_path, quadratic_config_text(tmp_path / "understated", oracle, "{}",
                                                        '{"pairs": 500, "claim_scale": 0.1}'))
    assert main.main(["certify", str(path)]) == main.EXIT_REFUTED
    columns = read_csv_rows(tmp_path / "understated" / "certification.csv")
    assert columns["certified"] == ["false"]

    path = write_config(tmp_path, quadratic_config_text(tmp_path / "honest", oracle, "{}", '{"pairs": 500}'))
    assert main.main(["certify", str(path)]) == main.EXIT_OK


def test_cli_rates(tmp_path):
    output = tmp_path / "curve.csv"
    arguments = ["rates", "--kind", "cor1_const", "--param", "L=1", "--param", "q=1", "--param", "delta=0.1",
                 "--param", "delta0_gap=1", "--k-max", "10", "--points", "11", "-o", str(output)]
    assert main.main(arguments) == main.EXIT_OK
    columns = read_csv_rows(output)
    assert len(columns["k"]) == 11
    assert float(columns["bound"][0]) == pytest.approx(4.02)


@pytest.mark.parametrize("arguments", [
    ["rates", "--kind", "cor1_const", "--param", "L=abc"],
    ["rates", "--kind", "cor1_const", "--param", "L=1", "--param", "q=1", "--param", "delta=0.1"],
    ["rates", "--kind", "no_such_curve"],
    ["rates", "--kind", "cor1_const", "--param", "L"],
])
def test_cli_rejects_bad_rate_arguments(arguments):
    assert main.main(arguments) == main.EXIT_INVALID


def test_cli_missing_config(tmp_path):
    assert main.main(["run", str(tmp_path / "missing.json")]) == main.EXIT_INVALID
    assert main.main(["certify", str(write_config(tmp_path, "{not json"))]) == main.EXIT_INVALID
