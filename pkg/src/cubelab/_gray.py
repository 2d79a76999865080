"""Vectorized enumeration of {-1,1}^n in reflected Gray-code order.

Each new half of the table is obtained from the mirrored previous half by a
single coordinate flip, so building all 2^n running sums costs O(1) per entry.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def gray_codes(n: int) -> np.ndarray:
    """Vertex masks in reflected Gray order, starting at mask 0."""
    i = np.arange(1 << n, dtype=np.int64)
    return i ^ (i >> 1)


def gray_sums(deltas, base: float = 0.0) -> np.ndarray:
    """Running sums in Gray order: entry g is base + sum of deltas[j] over bits j set in gray_codes[g]."""
    s = np.array([base], dtype=float)
    for d in np.asarray(deltas, dtype=float):
        s = np.concatenate((s, s[::-1] + d))
    return s


def gray_weights(n: int) -> np.ndarray:
    """Popcount of each Gray-ordered mask."""
    k = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        k = np.concatenate((k, k[::-1] + 1))
    return k


def natural_sums(deltas, base: float = 0.0) -> np.ndarray:
    """Same as gray_sums but in natural mask order (index == mask)."""
    s = np.array([base], dtype=float)
    for d in np.asarray(deltas, dtype=float):
        s = np.concatenate((s, s + d))
    return s


@lru_cache(maxsize=32)
def popcounts(n: int) -> np.ndarray:
    """Hamming weight of every mask below 2^n (cached, read-only)."""
    k = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        k = np.concatenate((k, k + 1))
    k.flags.writeable = False
    return k


def coordinate_sums(w: np.ndarray, n: int) -> np.ndarray:
    """For w indexed by natural mask, return (sum over masks with bit i clear, sum with bit i set) per i.

    Output has shape (n, 2).
    """
    cube = np.asarray(w, dtype=float).reshape((2,) * n) if n else np.asarray(w, dtype=float)
    out = np.empty((n, 2))
    for i in range(n):
        # bit i of the mask is reshape axis n-1-i in C order
        axis = n - 1 - i
        other = tuple(a for a in range(n) if a != axis)
        out[i] = cube.sum(axis=other)
    return out


def chunked_gray(deltas, chunk_bits: int = 20):
    """Yield (weights, sums) blocks that together cover the full Gray order of len(deltas) bits.

    The low ``chunk_bits`` coordinates are tabulated once; each block re-seeds the
    prefix contribution of the high coordinates, and odd blocks walk the low
    table backwards, which is exactly the reflected Gray order of the full cube.
    """
    deltas = np.asarray(deltas, dtype=float)
    n = deltas.size
    low = min(n, chunk_bits)
    low_s = gray_sums(deltas[:low])
    low_k = gray_weights(low)
    high_s = gray_sums(deltas[low:])
    high_k = gray_weights(n - low)
    for h in range(high_s.size):
        if h % 2:
            yield high_k[h] + low_k[::-1], high_s[h] + low_s[::-1]
        else:
            yield high_k[h] + low_k, high_s[h] + low_s
