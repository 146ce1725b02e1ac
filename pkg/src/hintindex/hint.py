"""Comparison-free HINT over a small discrete domain ``[0, 2^m - 1]``.

Partitions store record ids only. A range query reports, per level, the
originals and replicas of the first relevant partition followed by the
originals of every later relevant partition, which yields each result
exactly once without looking at a single endpoint.
"""

from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np

from ._search import emit_run, fold_ids, lower_bound
from .core import (MAX_M, DuplicateIdError, HintError, IntervalArray, QueryLike,
                   as_interval_array, as_query)


class PartitionAddress(NamedTuple):
    level: int
    offset: int


def assign_partitions(a: int, b: int, m: int) -> list[tuple[PartitionAddress, bool]]:
    """Partitions that exactly cover ``[a, b]``, bottom level first.

    The partition containing ``a`` holds the interval as an original;
    every other one holds a replica.
    """
    if not 0 <= a <= b < (1 << m):
        raise ValueError(f"[{a}, {b}] is not inside [0, 2^{m} - 1]")
    out = []
    level = m
    a0 = a
    while level >= 0 and a <= b:
        if a & 1:
            out.append((PartitionAddress(level, a), a0 >> (m - level) == a))
            a += 1
        if not b & 1:
            out.append((PartitionAddress(level, b), a0 >> (m - level) == b))
            b -= 1
        a >>= 1
        b >>= 1
        level -= 1
    return out


def assign_all(a: np.ndarray, b: np.ndarray, m: int):
    """Vectorised :func:`assign_partitions` over aligned arrays of mapped endpoints.

    Returns ``(level, offset, row, original)`` arrays, one entry per
    assignment, where ``row`` indexes the input arrays.
    """
    a = np.array(a, dtype=np.int64)
    b = np.array(b, dtype=np.int64)
    n = len(a)
    rows = np.arange(n, dtype=np.int64)
    a0 = a.copy()
    active = a <= b
    levels, offsets, owner, orig = [], [], [], []
    for level in range(m, -1, -1):
        if not active.any():
            break
        hit = active & ((a & 1) == 1)
        idx = np.flatnonzero(hit)
        levels.append(np.full(len(idx), level, dtype=np.int64))
        offsets.append(a[idx])
        owner.append(rows[idx])
        orig.append((a0[idx] >> (m - level)) == a[idx])
        a[idx] += 1

        hit = active & ((b & 1) == 0)
        idx = np.flatnonzero(hit)
        levels.append(np.full(len(idx), level, dtype=np.int64))
        offsets.append(b[idx])
        owner.append(rows[idx])
        orig.append((a0[idx] >> (m - level)) == b[idx])
        b[idx] -= 1

        a >>= 1
        b >>= 1
        active &= a <= b
    if not levels:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), z.copy(), np.zeros(0, dtype=bool)
    return (np.concatenate(levels), np.concatenate(offsets),
            np.concatenate(owner), np.concatenate(orig))


def build_directory(m: int, level_offsets: list[np.ndarray], dense: bool,
                    level_keys: list[list[np.ndarray]]):
    """Per-level directory of partitions over ``len(level_keys[0])`` tables.

    ``level_offsets[l]`` is the sorted array of non-empty offsets at level
    ``l``; ``level_keys[l][t]`` holds the (level-sorted) partition offsets
    of every row of table ``t`` at level ``l``. Returns ``lvl_ptr``,
    ``dir_off`` and ``dir_pos`` where ``dir_pos[e, t]`` is the first row of
    entry ``e`` in table ``t`` and the row after the last entry is stored
    as a sentinel.
    """
    ntab = len(level_keys[0])
    lvl_ptr = np.zeros(m + 2, dtype=np.int64)
    offs, poss = [], []
    base = np.zeros(ntab, dtype=np.int64)
    for level in range(m + 1):
        off = np.arange(1 << level, dtype=np.int64) if dense else level_offsets[level]
        pos = np.empty((len(off), ntab), dtype=np.int64)
        for t in range(ntab):
            keys = level_keys[level][t]
            pos[:, t] = base[t] + np.searchsorted(keys, off, side="left")
            base[t] += len(keys)
        offs.append(off)
        poss.append(pos)
        lvl_ptr[level + 1] = lvl_ptr[level] + len(off)
    dir_off = np.concatenate(offs) if offs else np.zeros(0, dtype=np.int64)
    dir_pos = np.vstack(poss + [base[None, :]])
    return lvl_ptr, dir_off, np.ascontiguousarray(dir_pos)


@numba.njit(cache=True, nogil=True)
def _hint_query(qs, qe, m, lvl_ptr, dir_off, dir_pos, dense, o_ids, r_ids, dead, out):
    k = 0
    comparisons = 0  # endpoint comparisons; this index has none to make
    if qs > qe:
        return k, comparisons
    for level in range(m, -1, -1):
        shift = m - level
        f = qs >> shift
        l = qe >> shift
        lo = lvl_ptr[level]
        hi = lvl_ptr[level + 1]
        if dense:
            e = lo + f
            e2 = lo + l + 1
        else:
            e = lower_bound(dir_off, lo, hi, f)
            e2 = lower_bound(dir_off, e, hi, l + 1)
        if e < hi and dir_off[e] == f:
            k = emit_run(r_ids, dir_pos[e, 1], dir_pos[e + 1, 1], out, k, dead)
        k = emit_run(o_ids, dir_pos[e, 0], dir_pos[e2, 0], out, k, dead)
    return k, comparisons


@numba.njit(cache=True, nogil=True)
def _hint_batch(qs, qe, m, lvl_ptr, dir_off, dir_pos, dense, o_ids, r_ids, dead, out, folds, counts):
    for j in range(qs.shape[0]):
        k, _ = _hint_query(qs[j], qe[j], m, lvl_ptr, dir_off, dir_pos, dense, o_ids, r_ids, dead, out)
        folds[j] = fold_ids(out, k)
        counts[j] = k


class HintIndex:
    """Comparison-free HINT for intervals with endpoints in ``[0, 2^m - 1]``."""

    def __init__(self, m: int, lvl_ptr, dir_off, dir_pos, o_ids, r_ids, *, sparse: bool, n: int):
        self.m = m
        self.lvl_ptr = lvl_ptr
        self.dir_off = dir_off
        self.dir_pos = dir_pos
        self.o_ids = o_ids
        self.r_ids = r_ids
        self.sparse = sparse
        self.n = n
        self._dead = np.zeros(0, dtype=np.int64)
        self._out = np.empty(max(n, 1), dtype=np.int64)

    @classmethod
    def build(cls, intervals, m: int, *, sparse: bool = True) -> "HintIndex":
        if not 1 <= m <= MAX_M:
            raise ValueError(f"m must be in [1, {MAX_M}]")
        if not sparse and m > 24:
            raise ValueError("dense directories are limited to m <= 24")
        arr = as_interval_array(intervals)
        arr.check_unique_ids()
        if len(arr) and arr.end.max() >= (1 << m):
            raise HintError(f"endpoint {int(arr.end.max())} does not fit in {m} bits; "
                            "use HintMIndex for arbitrary domains")
        level, offset, row, orig = assign_all(arr.st, arr.end, m)
        tables = []
        for sel in (orig, ~orig):
            lv, off, rw = level[sel], offset[sel], row[sel]
            order = np.lexsort((rw, off, lv))
            tables.append((lv[order], off[order], arr.ids[rw[order]]))
        level_offsets, level_keys = [], []
        for lv in range(m + 1):
            keys = []
            for t_lv, t_off, _ in tables:
                a, b = np.searchsorted(t_lv, [lv, lv + 1])
                keys.append(t_off[a:b])
            level_keys.append(keys)
            level_offsets.append(np.union1d(keys[0], keys[1]))
        lvl_ptr, dir_off, dir_pos = build_directory(m, level_offsets, not sparse, level_keys)
        return cls(m, lvl_ptr, dir_off, dir_pos, tables[0][2], tables[1][2],
                   sparse=sparse, n=len(arr))

    def range_query(self, q: QueryLike) -> np.ndarray:
        k, _ = self._run(q)
        return self._out[:k].copy()

    def query_stats(self, q: QueryLike) -> dict:
        k, comparisons = self._run(q)
        return {"comparisons": comparisons, "partitions_compared": 0, "results": k}

    def _run(self, q):
        st, end = as_query(q)
        top = (1 << self.m) - 1
        if end < 0 or st > top:
            return 0, 0
        st, end = max(st, 0), min(end, top)
        return _hint_query(st, end, self.m, self.lvl_ptr, self.dir_off, self.dir_pos,
                           not self.sparse, self.o_ids, self.r_ids, self._dead, self._out)

    def run_batch(self, queries) -> dict:
        queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
        nq = len(queries)
        res = {"folds": np.zeros(nq, dtype=np.uint64), "counts": np.zeros(nq, dtype=np.int64),
               "comparisons": np.zeros(nq, dtype=np.int64)}
        top = (1 << self.m) - 1
        # out-of-domain queries become an empty range (st > end)
        outside = (queries[:, 1] < 0) | (queries[:, 0] > top)
        qs = np.where(outside, 1, np.clip(queries[:, 0], 0, top))
        qe = np.where(outside, 0, np.clip(queries[:, 1], 0, top))
        _hint_batch(qs, qe, self.m, self.lvl_ptr, self.dir_off, self.dir_pos, not self.sparse,
                    self.o_ids, self.r_ids, self._dead, self._out, res["folds"], res["counts"])
        return res

    @property
    def entries(self) -> int:
        return len(self.o_ids) + len(self.r_ids)

    @property
    def replication(self) -> float:
        return self.entries / self.n if self.n else 0.0

    def partition_contents(self, level: int, offset: int) -> tuple[list[int], list[int]]:
        """Ids stored as (originals, replicas) in one partition."""
        lo, hi = self.lvl_ptr[level], self.lvl_ptr[level + 1]
        e = int(np.searchsorted(self.dir_off[lo:hi], offset)) + lo
        if e >= hi or self.dir_off[e] != offset:
            return [], []
        return (self.o_ids[self.dir_pos[e, 0]:self.dir_pos[e + 1, 0]].tolist(),
                self.r_ids[self.dir_pos[e, 1]:self.dir_pos[e + 1, 1]].tolist())

    def nonempty_partitions(self) -> int:
        lens = np.diff(self.dir_pos, axis=0).sum(axis=1)
        return int(np.count_nonzero(lens))

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self.lvl_ptr, self.dir_off, self.dir_pos, self.o_ids, self.r_ids))

    def arrays(self) -> dict:
        return {"lvl_ptr": self.lvl_ptr, "dir_off": self.dir_off, "dir_pos": self.dir_pos,
                "o_ids": self.o_ids, "r_ids": self.r_ids}

    def __repr__(self):
        return f"HintIndex(m={self.m}, n={self.n}, sparse={self.sparse})"
