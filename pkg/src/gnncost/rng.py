"""Deterministic counter-based randomness.

Every random decision in this package is a pure function of an integer key
tuple (root seed, epoch, iteration, worker, vertex, slot, ...). There is no
hidden generator state, so any micro-batch can be regenerated in isolation
and no result ever depends on execution order or thread count.

The mixer is the splitmix64 finalizer, applied per key word. It has full
avalanche, which is what the uniformity smoke tests in the test suite rely
on.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SEED0 = 0x8BADF00D5EEDC0DE

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _finalize(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _M1) & _MASK64
    z = ((z ^ (z >> 27)) * _M2) & _MASK64
    return z ^ (z >> 31)


def fold(*words: int) -> int:
    """Reduce a key tuple to one well-mixed 64-bit integer."""
    h = _SEED0
    for w in words:
        h = _finalize((h + _GOLDEN) ^ (int(w) & _MASK64))
    return h


def _vfinalize(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def hash_array(key: int, a, b=None) -> np.ndarray:
    """Hash one or two integer arrays under a folded scalar key.

    Returns uint64 values; element i depends only on (key, a[i], b[i]).
    """
    av = np.asarray(a).astype(np.uint64, copy=False)
    h = _vfinalize(av + np.uint64((key + _GOLDEN) & _MASK64))
    if b is not None:
        bv = np.asarray(b).astype(np.uint64, copy=False)
        h = _vfinalize(h ^ (bv + np.uint64(_GOLDEN)))
    return h


def uniform01(u: np.ndarray) -> np.ndarray:
    """Map uint64 hashes to floats in (0, 1), never exactly 0 or 1."""
    x = (u >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
    return np.maximum(x, 2.0 ** -53)


def randints(key: int, count: int, bound: int) -> np.ndarray:
    """`count` pseudo-random integers in [0, bound), indexed by counter."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    h = hash_array(key, np.arange(count, dtype=np.uint64))
    return (h % np.uint64(bound)).astype(np.int64)


def permutation(key: int, ids: np.ndarray) -> np.ndarray:
    """Deterministic shuffle of `ids`, keyed by vertex id (order-free)."""
    pri = hash_array(key, ids)
    return np.asarray(ids)[np.argsort(pri, kind="stable")]


def select_smallest(key: int, ids: np.ndarray, count: int) -> np.ndarray:
    """Uniform sample of `count` distinct elements via random priorities."""
    ids = np.asarray(ids)
    if count >= ids.size:
        return np.sort(ids)
    pri = hash_array(key, ids)
    order = np.argsort(pri, kind="stable")
    return np.sort(ids[order[:count]])
