"""Small numba helpers shared by the query kernels."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def lower_bound(a, lo, hi, x):
    """First index in ``a[lo:hi]`` with ``a[i] >= x`` (``hi`` if none)."""
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True, nogil=True)
def is_dead(dead, x):
    n = dead.shape[0]
    if n == 0:
        return False
    i = lower_bound(dead, 0, n, x)
    return i < n and dead[i] == x


@numba.njit(cache=True, nogil=True)
def emit_run(ids, lo, hi, out, k, dead):
    if dead.shape[0] == 0:
        for i in range(lo, hi):
            out[k] = ids[i]
            k += 1
    else:
        for i in range(lo, hi):
            if not is_dead(dead, ids[i]):
                out[k] = ids[i]
                k += 1
    return k


@numba.njit(cache=True, nogil=True)
def emit_one(ids, i, out, k, dead):
    if dead.shape[0] == 0 or not is_dead(dead, ids[i]):
        out[k] = ids[i]
        k += 1
    return k


@numba.njit(cache=True, nogil=True)
def mix64(x):
    """splitmix64 finaliser on uint64."""
    z = np.uint64(x) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def fold_ids(out, k):
    """Order-insensitive fold of ``out[:k]``."""
    acc = np.uint64(0)
    for i in range(k):
        acc += mix64(out[i])
    return acc


def fold_result(ids) -> int:
    """Python-side equivalent of :func:`fold_ids` for an arbitrary id array."""
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    return int(fold_ids(ids, len(ids)))


def combine_folds(folds) -> int:
    """Checksum of a whole query batch from its per-query folds."""
    acc = 0
    mask = (1 << 64) - 1
    for i, f in enumerate(folds):
        acc = (acc + int(mix64(np.uint64((int(f) ^ i) & mask)))) & mask
    return acc
