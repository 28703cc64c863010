"""Seed handling.

Every random stream is derived from a 64-bit master seed through
``numpy.random.SeedSequence``.  Work unit ``i`` (a chunk of Monte Carlo
replications) uses ``SeedSequence(master, spawn_key=(i,))``, so results do not
depend on how many workers process the units or in which order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def as_master_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)):
        raise TypeError("seed must be an integer")
    if isinstance(seed, (int, np.integer)):
        return int(seed) & MASK64
    raise TypeError(f"seed must be an integer, got {type(seed).__name__}")


def stream(seed, unit: int = 0) -> np.random.Generator:
    """Generator for work unit ``unit`` under master ``seed``.

    A ready ``Generator`` is passed through unchanged, which lets callers that
    already own a stream hand it down.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (unit,))
    else:
        ss = np.random.SeedSequence(as_master_seed(seed), spawn_key=(unit,))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_bounds(n: int, chunk_size: int):
    """Yield ``(unit, start, stop)`` for a fixed chunking of ``range(n)``."""
    for unit, start in enumerate(range(0, n, chunk_size)):
        yield unit, start, min(n, start + chunk_size)
