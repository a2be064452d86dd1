import csv
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from inexact_pgm.oracle.handles import OracleKind

TRACE_COLUMNS = ["k", "f", "gm_sq", "min_gm_sq", "alpha", "delta_k"]


class TraceIndexError(Exception):
    pass


@dataclass
class IterationRecord:
    k: int
    x: np.ndarray
    x_next: np.ndarray
    objective: float
    next_objective: float
    alpha: float
    delta: float
    lipschitz: float
    gm_sq: float
    min_gm_sq: float
    cumulative: float
    gradient: np.ndarray
    subgradient: np.ndarray
    # Fast method only
    y: Optional[np.ndarray] = None
    y_objective: Optional[float] = None
    z: Optional[np.ndarray] = None
    theta: Optional[float] = None
    A: Optional[float] = None
    tau: Optional[float] = None


@dataclass
class RunTrace:
    """
    Per-iteration records of a solver run.

    gm_sq is the squared norm of the gradient mapping g_k + p_{k+1}, computed as
    ||x_{k+1} - x_k||^2 / alpha_k^2 for the proximal gradient runs and from y_k for the fast method.
    """
    algorithm: str
    degree: float
    oracle_kind: OracleKind
    x0: np.ndarray
    f0: float
    records: List[IterationRecord] = field(default_factory=list)
    adversarial: bool = False

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(record, name) for record in self.records], dtype=float)

    def gm_sq(self) -> np.ndarray:
        return self.column("gm_sq")

    def min_gm_sq(self) -> np.ndarray:
        return self.column("min_gm_sq")

    def objectives(self) -> np.ndarray:
        return self.column("objective")

    def y_objectives(self) -> np.ndarray:
        return self.column("y_objective")

    def final_point(self) -> np.ndarray:
        if not self.records:
            return self.x0
        return self.records[-1].x_next

    def append(self, record: IterationRecord):
        self.records.append(record)

    def write_csv(self, path: Union[str, os.PathLike], bound: Optional[Sequence[float]] = None):
        """
        One row per iteration; floats are written with repr so reruns are byte-identical.
        The f column holds f(y_k) for the fast method and f(x_k) otherwise.
        """
        if bound is not None and len(bound) != len(self.records):
            raise TraceIndexError(f"Bound has {len(bound)} values for {len(self.records)} iterations")
        with open(Path(path), "w", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS + (["bound"] if bound is not None else []))
            for index, record in enumerate(self.records):
                objective = record.objective if record.y_objective is None else record.y_objective
                row = [record.k] + [repr(float(value)) for value in (objective, record.gm_sq,
                                                                   record.min_gm_sq, record.alpha,
                                                                   record.delta)]
                if bound is not None:
                    row.append(repr(float(bound[index])))
                writer.writerow(row)


def ergodic_average(trace: RunTrace, k: int) -> np.ndarray:
    """Uniform average of x_1, ..., x_{k+1}."""
    if not 0 <= k < len(trace):
        raise TraceIndexError(f"Trace holds {len(trace)} iterations, can't average up to {k}")
    return np.mean([record.x_next for record in trace.records[:k + 1]], axis=0)
