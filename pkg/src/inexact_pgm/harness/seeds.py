import numpy as np

SEED_RESOLUTION = 10 ** 6


def grid_key(value: float) -> int:
    return int(round(value * SEED_RESOLUTION))


def cell_seed(master_seed: int, repeat: int, level: float, degree: float) -> int:
    """
    Seed of one grid cell, derived from the master seed and the cell coordinates only,
    so adding cells to a grid leaves the seeds of the existing ones unchanged.
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(repeat, grid_key(level), grid_key(degree)))
    return int(sequence.generate_state(1)[0])
