import numpy as np

from inexact_pgm.oracle.holder import HolderFunction
from inexact_pgm.problems.objective import ProblemSpecError

HOLDER_BOX = 4.0
ESTIMATION_PAIRS = 10 ** 4
INFLATION = 1.1


def estimate_holder_constant(exponent: float,
                             centers: np.ndarray,
                             rng: np.random.Generator,
                             box: float = HOLDER_BOX,
                             pairs: int = ESTIMATION_PAIRS) -> float:
    """
    Largest observed ratio ||g(x) - g(y)|| / ||x - y||^nu over sampled pairs of the box [-box, box]^n.

    A third of the pairs are uniform, a third mirror each other around the centers and a third
    are mirrored with equal magnitudes in every coordinate, where the ratio of a separable
    power function peaks.
    """
    dim = centers.shape[0]
    # The subgradient doesn't depend on the constant
    shape = HolderFunction(exponent, 1.0, centers)
    reach = box - float(np.max(np.abs(centers)))
    best = 0.0
    for index in range(pairs):
        mode = index % 3
        if mode == 0:
            x = rng.uniform(-box, box, dim)
            y = rng.uniform(-box, box, dim)
        elif mode == 1:
            offset = rng.uniform(-reach, reach, dim)
            x, y = centers + offset, centers - offset
        else:
            offset = rng.uniform(0.0, reach) * rng.choice(np.array([-1.0, 1.0]), size=dim)
            x, y = centers + offset, centers - offset
        distance = float(np.linalg.norm(x - y))
        if distance == 0.0:
            continue
        change = float(np.linalg.norm(shape.gradient(x) - shape.gradient(y)))
        best = max(best, change / distance ** exponent)
    return best


def generate_holder_instance(n: int, nu: float, seed: int = 0) -> HolderFunction:
    """
    Separable F(x) = sum_i |x_i - c_i|^(1 + nu) / (1 + nu) with centers uniform in [-1, 1].

    For nu = 1 the subgradient is x - c and H = 1. Otherwise H is estimated on the box
    [-4, 4]^n and inflated by 10%.
    """
    if n < 1:
        raise ProblemSpecError(f"Invalid dimension n={n}")
    if not (0.0 < nu <= 1.0):
        raise ProblemSpecError(f"Hölder exponent must lie in (0, 1], got {nu}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1.0, 1.0, n)
    if nu == 1.0:
        return HolderFunction(nu, 1.0, centers)
    return HolderFunction(nu, INFLATION * estimate_holder_constant(nu, centers, rng), centers)
