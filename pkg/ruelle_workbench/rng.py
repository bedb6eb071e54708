import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Returns a counter-based Philox generator for `(seed, stream)`.

    Every sampling call takes an explicit 64-bit seed; distinct streams of one seed are independent, so work split
    across threads can draw from `make_rng(seed, index)` and stay deterministic.
    """
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    sequence = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(sequence))
