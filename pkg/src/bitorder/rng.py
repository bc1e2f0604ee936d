"""Counter-based random numbers.

Every random draw in training is a pure function of ``(seed, epoch, stream,
counter)``: a stream key is derived from the first three by repeated
splitmix64 finalization, and draw ``i`` is ``mix64(key + i * GOLDEN)``.  The
compiled kernels implement the same arithmetic, so both backends see the
same numbers regardless of evaluation order or thread count.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# stream tags keep flip and sampling draws independent within an epoch
STREAM_FLIP = 0x666C6970
STREAM_NEGATIVE = 0x6E656773

MAX_RESAMPLE = 100

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int (wrapping at 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, epoch: int, stream: int) -> int:
    return mix64(mix64(mix64((seed & MASK64) ^ stream) + epoch) + GOLDEN)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def draws(key: int, counters: np.ndarray) -> np.ndarray:
    """Raw 64-bit draws for an array of counters."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(np.uint64(key) + c * np.uint64(GOLDEN))


def uniforms(key: int, counters: np.ndarray) -> np.ndarray:
    """Doubles in [0, 1) with 53 random bits."""
    return (draws(key, counters) >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def below(key: int, counters: np.ndarray, n: int) -> np.ndarray:
    """Integers in [0, n) by multiply-shift on the high 32 bits; n < 2**32."""
    hi = draws(key, counters) >> np.uint64(32)
    return ((hi * np.uint64(n)) >> np.uint64(32)).astype(np.int64)
