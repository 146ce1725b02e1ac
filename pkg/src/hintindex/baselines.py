"""Brute-force overlap scan and the uniform 1D-grid competitor."""

from __future__ import annotations

import numba
import numpy as np

from ._search import fold_ids
from .core import IntervalArray, QueryLike, as_interval_array, as_query


@numba.njit(cache=True, nogil=True)
def _scan(ids, st, end, qs, qe, out):
    k = 0
    for i in range(ids.shape[0]):
        if st[i] <= qe and qs <= end[i]:
            out[k] = ids[i]
            k += 1
    return k


@numba.njit(cache=True, nogil=True)
def _scan_batch(ids, st, end, qs, qe, out, folds, counts):
    for j in range(qs.shape[0]):
        k = _scan(ids, st, end, qs[j], qe[j], out)
        folds[j] = fold_ids(out, k)
        counts[j] = k


def brute_force_query(intervals, q: QueryLike) -> np.ndarray:
    """Ids of all intervals with ``s.st <= q.end`` and ``q.st <= s.end``."""
    arr = as_interval_array(intervals)
    qs, qe = as_query(q)
    out = np.empty(max(len(arr), 1), dtype=np.int64)
    k = _scan(arr.ids, arr.st, arr.end, qs, qe, out)
    return out[:k].copy()


class BruteForce:
    """Linear-scan "index"; the correctness oracle for every other index."""

    def __init__(self, intervals):
        self.data = as_interval_array(intervals)
        self._out = np.empty(max(len(self.data), 1), dtype=np.int64)

    def range_query(self, q: QueryLike) -> np.ndarray:
        qs, qe = as_query(q)
        k = _scan(self.data.ids, self.data.st, self.data.end, qs, qe, self._out)
        return self._out[:k].copy()

    def query_stats(self, q: QueryLike) -> dict:
        k = len(self.range_query(q))
        n = len(self.data)
        return {"comparisons": 2 * n, "partitions_compared": 1 if n else 0, "results": k}

    def run_batch(self, queries) -> dict:
        queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
        nq = len(queries)
        folds = np.zeros(nq, dtype=np.uint64)
        counts = np.zeros(nq, dtype=np.int64)
        _scan_batch(self.data.ids, self.data.st, self.data.end,
                    np.ascontiguousarray(queries[:, 0]), np.ascontiguousarray(queries[:, 1]),
                    self._out, folds, counts)
        return {"folds": folds, "counts": counts,
                "comparisons": np.full(nq, 2 * len(self.data), dtype=np.int64)}

    @property
    def nbytes(self) -> int:
        return self.data.ids.nbytes + self.data.st.nbytes + self.data.end.nbytes

    def __len__(self):
        return len(self.data)


# ---------------------------------------------------------------------------
# 1D-grid

@numba.njit(cache=True, nogil=True)
def _grid_query(qs, qe, cf, cl, cell_lo, cell_ptr, ids, st, end, out):
    """Overlap query with reference-value duplicate elimination.

    An overlapping interval is reported only from the cell holding
    ``max(s.st, q.st)``. In the first cell that value always falls inside
    (interval and query both reach it), so only later cells test
    ``s.st >= cell start``.
    """
    k = 0
    c = 0
    for cell in range(cf, cl + 1):
        lo = cell_ptr[cell]
        hi = cell_ptr[cell + 1]
        boundary = cell == cf or cell == cl
        start = cell_lo[cell]
        for i in range(lo, hi):
            if boundary:
                c += 2
                if st[i] > qe or end[i] < qs:
                    continue
            if cell > cf:
                c += 1
                if st[i] < start:
                    continue
            out[k] = ids[i]
            k += 1
    return k, c


@numba.njit(cache=True, nogil=True)
def _grid_batch(qs, qe, cf, cl, cell_lo, cell_ptr, ids, st, end, out, folds, counts, cmps):
    for j in range(qs.shape[0]):
        k, c = _grid_query(qs[j], qe[j], cf[j], cl[j], cell_lo, cell_ptr, ids, st, end, out)
        folds[j] = fold_ids(out, k)
        counts[j] = k
        cmps[j] = c


class Grid1D:
    """Uniform grid of ``p`` cells; each interval is copied into every cell it overlaps.

    Cell of ``x`` is ``(x - min) * p // (span + 1)``, so the last cell
    absorbs the domain maximum.
    """

    def __init__(self, p: int, min_x: int, max_x: int, cell_ptr, ids, st, end, n: int):
        self.p = p
        self.min_x = min_x
        self.max_x = max_x
        self.cell_ptr = cell_ptr
        self.ids = ids
        self.st = st
        self.end = end
        self.n = n
        span1 = max_x - min_x + 1
        # first value of each cell: smallest x with cell(x) == i
        self.cell_lo = np.array([min_x + -(-i * span1 // p) for i in range(p)], dtype=np.int64)
        self._out = np.empty(max(n, 1), dtype=np.int64)

    @classmethod
    def build(cls, intervals, p: int, min_x: int | None = None, max_x: int | None = None) -> "Grid1D":
        if p < 1:
            raise ValueError("p must be >= 1")
        arr = as_interval_array(intervals)
        arr.check_unique_ids()
        if min_x is None:
            min_x = int(arr.st.min()) if len(arr) else 0
        if max_x is None:
            max_x = int(arr.end.max()) if len(arr) else 0
        tmp = cls(p, min_x, max_x, np.zeros(p + 1, dtype=np.int64), arr.ids[:0], arr.st[:0], arr.end[:0], 0)
        c0 = tmp.cells_of(arr.st)
        c1 = tmp.cells_of(arr.end)
        span = c1 - c0 + 1
        total = int(span.sum())
        row = np.repeat(np.arange(len(arr), dtype=np.int64), span)
        # cell of each copy: c0 of its row plus its rank within the row
        starts = np.cumsum(span) - span
        cell = c0[row] + (np.arange(total, dtype=np.int64) - np.repeat(starts, span))
        order = np.lexsort((row, cell))
        cell, row = cell[order], row[order]
        cell_ptr = np.searchsorted(cell, np.arange(p + 1)).astype(np.int64)
        return cls(p, min_x, max_x, cell_ptr, arr.ids[row], arr.st[row], arr.end[row], len(arr))

    def cell_of(self, x: int) -> int:
        x = min(max(int(x), self.min_x), self.max_x)
        return (x - self.min_x) * self.p // (self.max_x - self.min_x + 1)

    def cells_of(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=np.int64), self.min_x, self.max_x) - self.min_x
        span1 = self.max_x - self.min_x + 1
        if span1 < (1 << 63) // self.p:
            return x * self.p // span1
        return np.array([int(v) * self.p // span1 for v in x.tolist()], dtype=np.int64)

    def cell(self, i: int) -> np.ndarray:
        return self.ids[self.cell_ptr[i]:self.cell_ptr[i + 1]]

    def _run(self, q):
        qs, qe = as_query(q)
        if self.n == 0 or qe < self.min_x or qs > self.max_x:
            return 0, 0
        return _grid_query(qs, qe, self.cell_of(qs), self.cell_of(qe), self.cell_lo,
                           self.cell_ptr, self.ids, self.st, self.end, self._out)

    def range_query(self, q: QueryLike) -> np.ndarray:
        k, _ = self._run(q)
        return self._out[:k].copy()

    def query_stats(self, q: QueryLike) -> dict:
        k, c = self._run(q)
        return {"comparisons": int(c), "partitions_compared": None, "results": int(k)}

    def run_batch(self, queries) -> dict:
        queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
        nq = len(queries)
        res = {"folds": np.zeros(nq, dtype=np.uint64), "counts": np.zeros(nq, dtype=np.int64),
               "comparisons": np.zeros(nq, dtype=np.int64)}
        if self.n == 0 or nq == 0:
            return res
        qs = np.ascontiguousarray(queries[:, 0])
        qe = np.ascontiguousarray(queries[:, 1])
        # queries entirely outside the domain select an empty cell range
        cf = self.cells_of(qs)
        cl = self.cells_of(qe)
        outside = (qe < self.min_x) | (qs > self.max_x)
        cl = np.where(outside, cf - 1, cl)
        _grid_batch(qs, qe, cf, cl, self.cell_lo, self.cell_ptr, self.ids, self.st, self.end,
                    self._out, res["folds"], res["counts"], res["comparisons"])
        return res

    @property
    def entries(self) -> int:
        return len(self.ids)

    @property
    def replication(self) -> float:
        return self.entries / self.n if self.n else 0.0

    @property
    def nbytes(self) -> int:
        return self.cell_ptr.nbytes + self.ids.nbytes + self.st.nbytes + self.end.nbytes + self.cell_lo.nbytes

    def arrays(self) -> dict:
        return {"cell_ptr": self.cell_ptr, "ids": self.ids, "st": self.st, "end": self.end}

    def __repr__(self):
        return f"Grid1D(p={self.p}, n={self.n}, replication={self.replication:.2f})"
