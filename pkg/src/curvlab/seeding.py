"""Deterministic random streams.

Every randomized routine draws from a Philox4x64 counter-based generator
keyed by (seed, stream index).  Streams are independent of thread scheduling
and reproduce bit-identically across runs, which is what makes stored run
configurations replayable.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for the given (seed, stream index) pair."""
    key = np.array([int(seed) & _MASK, int(index) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
