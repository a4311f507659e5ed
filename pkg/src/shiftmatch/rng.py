"""Counter-based SplitMix64.

Output ``i`` of a stream with key ``K`` is ``mix64(K + (i + 1) * GAMMA)``,
identical to the sequential SplitMix64 generator seeded with ``K``.  All
arithmetic is modulo 2**64 on unsigned integers, so any block of outputs
can be produced independently and results do not depend on the platform.
"""
from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1

# Fixed stream constants: single sequences, and the two halves of a pair.
STREAM_SINGLE = 0x5EED0000_00000001
STREAM_FIRST = 0x5EED0000_0000F157
STREAM_SECOND = 0x5EED0000_00005EC0


def mix64_int(z: int) -> int:
    """Scalar finalizer on Python ints (reference path)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream: int = STREAM_SINGLE) -> int:
    return mix64_int((int(seed) & _MASK) * GAMMA + stream)


def raw(key: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start .. start + count - 1`` of the stream with key ``key``."""
    base = np.uint64((key + (start + 1) * GAMMA) & _MASK)
    steps = np.arange(count, dtype=np.uint64) * np.uint64(GAMMA)
    with np.errstate(over="ignore"):
        return mix64(base + steps)


def uniforms(key: int, start: int, count: int) -> np.ndarray:
    """Doubles in ``[0, 1)`` from the top 53 bits of each output."""
    return (raw(key, start, count) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
