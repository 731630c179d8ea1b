"""Counter-based random streams keyed by (master seed, coordinates).

A stream depends only on its key, never on how many other streams were
drawn before it, so any replica can be recomputed alone or on another worker.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

SEED_MASK = (1 << 64) - 1


class StreamTag(IntEnum):
    SAMPLE = 1
    PROCESS = 2
    PARTICLE = 3
    REVERSAL = 4
    WINDOW = 5
    COUPLING_U = 6
    CONCENTRATION = 7
    MARGINAL = 8


def zigzag(value: int) -> int:
    """Map Z onto N: 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ..."""
    value = int(value)
    return 2 * value if value >= 0 else -2 * value - 1


def stream(master_seed: int, *coords: int) -> np.random.Generator:
    """Philox generator for ``(master_seed, *coords)``; coordinates may be negative."""
    sequence = np.random.SeedSequence(entropy=int(master_seed) & SEED_MASK, spawn_key=tuple(zigzag(c) for c in coords))
    return np.random.Generator(np.random.Philox(sequence))
