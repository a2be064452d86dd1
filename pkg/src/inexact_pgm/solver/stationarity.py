from typing import Optional

import numpy as np

from inexact_pgm.oracle.handles import OracleKind
from inexact_pgm.solver.trace import RunTrace


class StationarityInputError(Exception):
    pass


def stationarity_gap(trace: RunTrace,
                     oracle_kind: OracleKind,
                     lipschitz: Optional[float] = None,
                     noise_bound: Optional[float] = None,
                     holder_constant: Optional[float] = None,
                     exponent: Optional[float] = None) -> np.ndarray:
    """
    Per-iteration upper bound on dist(0, subdifferential of f at x_{k+1}).

    Noisy gradients with noise norm at most Delta give ||g_k + p_{k+1}|| + L_F ||x_{k+1} - x_k|| + Delta.
    Hölder subgradients give ||g_k + p_{k+1}|| + H ||x_{k+1} - x_k||^nu.
    """
    if trace.algorithm == "fipgm":
        raise StationarityInputError("Stationarity gaps are defined for the proximal gradient runs only")
    if not trace.records:
        return np.zeros(0)
    gradient_mapping = np.sqrt(trace.gm_sq())
    displacement = np.array([np.linalg.norm(record.x_next - record.x) for record in trace.records])

    if oracle_kind is OracleKind.NOISY_GRADIENT:
        if trace.oracle_kind not in (OracleKind.NOISY_GRADIENT, OracleKind.EXACT):
            raise StationarityInputError(f"Trace was produced by a {trace.oracle_kind.name.lower()} oracle")
        if lipschitz is None or noise_bound is None:
            raise StationarityInputError("Noisy-gradient gaps need lipschitz and noise_bound")
        if lipschitz <= 0.0 or noise_bound < 0.0:
            raise StationarityInputError(f"Invalid constants L={lipschitz}, Delta={noise_bound}")
        return gradient_mapping + lipschitz * displacement + noise_bound

    if oracle_kind is OracleKind.HOLDER:
        if trace.oracle_kind is not OracleKind.HOLDER:
            raise StationarityInputError(f"Trace was produced by a {trace.oracle_kind.name.lower()} oracle")
        if holder_constant is None or exponent is None:
            raise StationarityInputError("Hölder gaps need holder_constant and exponent")
        if holder_constant <= 0.0 or not (0.0 <= exponent <= 1.0):
            raise StationarityInputError(f"Invalid constants H={holder_constant}, nu={exponent}")
        return gradient_mapping + holder_constant * displacement ** exponent

    raise StationarityInputError(f"No stationarity gap for {oracle_kind.name.lower()} oracles")
