import os
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from lark import Lark, Transformer, v_args
from lark.exceptions import LarkError

from inexact_pgm.oracle.holder import HolderFunction
from inexact_pgm.problems.logsum import LogSumProblem
from inexact_pgm.problems.quadratic import QuadraticProblem

Instance = Union[LogSumProblem, QuadraticProblem, HolderFunction]


class InstanceFormatError(Exception):
    pass


def initialize_lark() -> Lark:
    return Lark.open("instance.lark", rel_to=__file__, parser="lalr")


# noinspection PyMethodMayBeStatic
class InstanceTransformer(Transformer):
    @v_args(inline=True)
    def number(self, token):
        return float(token)

    @v_args(inline=True)
    def header(self, name):
        return str(name)

    @v_args(inline=True)
    def scalar(self, name, value):
        return str(name), "scalar", [], [value]

    def vector(self, children):
        name, length, *values = children
        return str(name), "vector", [int(length)], values

    def matrix(self, children):
        name, rows, columns, *values = children
        return str(name), "matrix", [int(rows), int(columns)], values

    def start(self, children):
        return children[0], children[1:]


def build_entry(name: str, kind: str, shape: List[int], values: List[float]):
    expected = int(np.prod(shape)) if shape else 1
    if len(values) != expected:
        raise InstanceFormatError(f"Entry '{name}' declares {expected} values but holds {len(values)}")
    if kind == "scalar":
        return values[0]
    return np.array(values, dtype=float).reshape(shape)


def parse_instance(text: str) -> Instance:
    try:
        family, raw_entries = InstanceTransformer().transform(initialize_lark().parse(text))
    except LarkError as error:
        raise InstanceFormatError(f"Malformed instance text: {error}") from error
    entries: Dict[str, object] = {}
    for name, kind, shape, values in raw_entries:
        if name in entries:
            raise InstanceFormatError(f"Entry '{name}' is declared twice")
        entries[name] = build_entry(name, kind, shape, values)
    try:
        if family == "logsum":
            return LogSumProblem(entries["rows"], entries["targets"], entries["radius"],
                                 ground_truth=entries.get("ground_truth"))
        if family == "quadratic":
            return QuadraticProblem(entries["operator"], entries["offset"], entries["minimizer"],
                                    entries["optimal_value"], entries["radius"])
        if family == "holder":
            return HolderFunction(entries["exponent"], entries["holder_constant"], entries["centers"])
    except KeyError as error:
        raise InstanceFormatError(f"Instance '{family}' misses the entry {error}") from error
    raise InstanceFormatError(f"Unknown instance family '{family}'")


def format_values(values: np.ndarray) -> str:
    return " ".join(repr(float(value)) for value in values.ravel())


def format_instance(instance: Instance) -> str:
    lines = ["# inexact-pgm instance"]
    if isinstance(instance, LogSumProblem):
        lines.append("instance logsum")
        lines.append(f"scalar radius {instance.radius!r}")
        lines.append(f"matrix rows {instance.size} {instance.dim} {format_values(instance.rows)}")
        lines.append(f"vector targets {instance.size} {format_values(instance.targets)}")
        if instance.ground_truth is not None:
            lines.append(f"vector ground_truth {instance.dim} {format_values(instance.ground_truth)}")
    elif isinstance(instance, QuadraticProblem):
        rows, columns = instance.operator.shape
        lines.append("instance quadratic")
        lines.append(f"scalar radius {instance.radius!r}")
        lines.append(f"scalar optimal_value {float(instance.optimal_value)!r}")
        lines.append(f"matrix operator {rows} {columns} {format_values(instance.operator)}")
        lines.append(f"vector offset {rows} {format_values(instance.offset)}")
        lines.append(f"vector minimizer {columns} {format_values(instance.minimizer)}")
    elif isinstance(instance, HolderFunction):
        lines.append("instance holder")
        lines.append(f"scalar exponent {float(instance.exponent)!r}")
        lines.append(f"scalar holder_constant {float(instance.holder_constant)!r}")
        lines.append(f"vector centers {instance.dim} {format_values(instance.centers)}")
    else:
        raise InstanceFormatError(f"Can't serialize {type(instance).__name__}")
    return "\n".join(lines) + "\n"


def save_instance(instance: Instance, path: Union[str, os.PathLike]):
    Path(path).write_text(format_instance(instance))


def load_instance(path: Union[str, os.PathLike]) -> Instance:
    return parse_instance(Path(path).read_text())
