"""Counter-based SplitMix64 streams.

A stream is identified by a 64-bit key derived from ``(seed, *path)``; the
``k``-th draw of a stream is ``mix(key + (k + 1) * GOLDEN)``, so draws can be
addressed directly and streams never interfere with each other.  Uniforms
take the top 53 bits; normals go through the AS241 inverse CDF.
"""

from __future__ import annotations

import numpy as np

from ordifun import kernels
from ordifun.kernels._coeffs import GOLDEN, MIX1, MIX2

_MASK = (1 << 64) - 1
_TWO53 = 2.0**-53


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * MIX1) & _MASK
    z = ((z ^ (z >> 27)) * MIX2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, *path: int) -> int:
    key = _mix64(int(seed) + GOLDEN)
    for p in path:
        key = _mix64(key ^ _mix64((int(p) + 1) * GOLDEN))
    return key


def bits(key: int, n: int, start: int = 0) -> np.ndarray:
    return kernels.splitmix_bits(key, np.arange(start, start + n, dtype=np.uint64))


def uniform(key: int, n: int, start: int = 0) -> np.ndarray:
    """Uniforms on ``[0, 1)``."""
    return (bits(key, n, start) >> np.uint64(11)).astype(np.float64) * _TWO53


def uniform_open(key: int, n: int, start: int = 0) -> np.ndarray:
    """Uniforms on the open interval ``(0, 1)``."""
    return ((bits(key, n, start) >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO53


def normal(key: int, n: int, start: int = 0) -> np.ndarray:
    return kernels.inverse_normal(uniform_open(key, n, start))


def integers(key: int, n: int, high: int, start: int = 0) -> np.ndarray:
    """Draws from ``{0, ..., high - 1}``."""
    return np.minimum((uniform(key, n, start) * high).astype(np.int64), high - 1)


def permutation(key: int, n: int) -> np.ndarray:
    return np.argsort(bits(key, n), kind="stable")
