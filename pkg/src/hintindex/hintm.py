"""HINT^m: hierarchical interval index for arbitrary integer domains.

Raw endpoints are rescaled onto ``[0, 2^m - 1]`` to pick partitions; the
raw values stay in the endpoint columns and are the only thing compared
against the query. Each partition is split four ways:

========  ===================================  ==================
kind      holds intervals that                 endpoint columns
========  ===================================  ==================
O_in      start and end inside the partition   st, end
O_aft     start inside, end after it           st
R_in      start before, end inside             end
R_aft     start before, end after              (ids only)
========  ===================================  ==================

All partitions of one level and kind live in a single table; a directory
of the non-empty partitions (offset, first row per kind, link to the
level above) locates them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numba
import numpy as np

from ._search import emit_one, emit_run, fold_ids, lower_bound
from .core import (MAX_M, DomainMapper, HintError, IntervalArray, QueryLike, UnknownIdError,
                   as_interval_array, as_query)
from .hint import assign_all, build_directory

O_IN, O_AFT, R_IN, R_AFT = range(4)
KIND_NAMES = ("O_in", "O_aft", "R_in", "R_aft")
# endpoint columns a kind needs when storage is truncated: (st, end)
NEEDED = ((True, True), (True, False), (False, True), (False, False))


@dataclass(frozen=True)
class HintMOptions:
    sorted: bool = True
    storage_opt: bool = True
    ids_column: bool = True
    sparse_dir: bool = True
    links: bool = True
    bs_threshold: int = 32

    @classmethod
    def parse(cls, text: str | None) -> "HintMOptions":
        """Options from a comma list such as ``"sorted,sopt,idscol,sparse"``.

        Listed flags are on, everything else off; ``None`` or ``"all"`` gives
        the defaults.
        """
        if text is None or text == "all":
            return cls()
        names = {"sorted": "sorted", "sopt": "storage_opt", "idscol": "ids_column",
                 "sparse": "sparse_dir"}
        flags = {v: False for v in names.values()}
        for tok in filter(None, (t.strip() for t in text.split(","))):
            if tok == "none":
                continue
            if tok not in names:
                raise ValueError(f"unknown option {tok!r}; expected one of {sorted(names)}")
            flags[names[tok]] = True
        return cls(links=flags["sparse_dir"], **flags)


# ---------------------------------------------------------------------------
# query kernel

@numba.njit(cache=True, nogil=True)
def _st_le(ids, st, lo, hi, qe, srt, thr, out, k, dead):
    """Emit rows with ``st <= qe``; rows sorted by st when ``srt``."""
    c = 0
    if srt and hi - lo > thr:
        a, b = lo, hi
        while a < b:
            mid = (a + b) >> 1
            c += 1
            if st[mid] <= qe:
                a = mid + 1
            else:
                b = mid
        k = emit_run(ids, lo, a, out, k, dead)
    elif srt:
        for i in range(lo, hi):
            c += 1
            if st[i] > qe:
                break
            k = emit_one(ids, i, out, k, dead)
    else:
        for i in range(lo, hi):
            c += 1
            if st[i] <= qe:
                k = emit_one(ids, i, out, k, dead)
    return k, c


@numba.njit(cache=True, nogil=True)
def _end_ge(ids, end, lo, hi, qs, srt, thr, out, k, dead):
    """Emit rows with ``end >= qs``; rows sorted by end when ``srt``."""
    c = 0
    if srt and hi - lo > thr:
        a, b = lo, hi
        while a < b:
            mid = (a + b) >> 1
            c += 1
            if end[mid] < qs:
                a = mid + 1
            else:
                b = mid
        k = emit_run(ids, a, hi, out, k, dead)
    elif srt:
        for i in range(hi - 1, lo - 1, -1):
            c += 1
            if end[i] < qs:
                break
            k = emit_one(ids, i, out, k, dead)
    else:
        for i in range(lo, hi):
            c += 1
            if end[i] >= qs:
                k = emit_one(ids, i, out, k, dead)
    return k, c


@numba.njit(cache=True, nogil=True)
def _both(ids, st, end, lo, hi, qs, qe, srt, thr, out, k, dead):
    """Emit rows overlapping ``[qs, qe]``; rows sorted by st when ``srt``."""
    c = 0
    if srt and hi - lo > thr:
        a, b = lo, hi
        while a < b:
            mid = (a + b) >> 1
            c += 1
            if st[mid] <= qe:
                a = mid + 1
            else:
                b = mid
        for i in range(lo, a):
            c += 1
            if end[i] >= qs:
                k = emit_one(ids, i, out, k, dead)
    else:
        for i in range(lo, hi):
            c += 1
            if st[i] > qe:
                if srt:
                    break
                continue
            c += 1
            if end[i] >= qs:
                k = emit_one(ids, i, out, k, dead)
    return k, c


@numba.njit(cache=True, nogil=True)
def _hintm_query(qs, qe, fq, lq, m, lvl_ptr, dir_off, dir_pos, dir_link, dense, use_links,
                 srt, thr, oin_id, oin_st, oin_end, oaft_id, oaft_st, rin_id, rin_end,
                 raft_id, dead, out, trace):
    k = 0
    comparisons = 0
    parts = 0
    compfirst = True
    complast = True
    prev_e = -1
    for level in range(m, -1, -1):
        shift = m - level
        f = fq >> shift
        l = lq >> shift
        lo = lvl_ptr[level]
        hi = lvl_ptr[level + 1]
        if dense:
            e = lo + f
        elif use_links and prev_e >= 0 and dir_link[prev_e] >= 0:
            e = dir_link[prev_e]
            while e > lo and dir_off[e - 1] >= f:
                e -= 1
        else:
            e = lower_bound(dir_off, lo, hi, f)
        prev_e = e if e < hi else -1

        # first relevant partition
        if e < hi and dir_off[e] == f:
            a0, a1 = dir_pos[e, 0], dir_pos[e + 1, 0]
            b0, b1 = dir_pos[e, 1], dir_pos[e + 1, 1]
            c0, c1 = dir_pos[e, 2], dir_pos[e + 1, 2]
            d0, d1 = dir_pos[e, 3], dir_pos[e + 1, 3]
            c = 0
            if f == l and compfirst and complast:
                k, x = _both(oin_id, oin_st, oin_end, a0, a1, qs, qe, srt, thr, out, k, dead)
                c += x
                k, x = _st_le(oaft_id, oaft_st, b0, b1, qe, srt, thr, out, k, dead)
                c += x
                k, x = _end_ge(rin_id, rin_end, c0, c1, qs, srt, thr, out, k, dead)
                c += x
                k = emit_run(raft_id, d0, d1, out, k, dead)
            elif f == l and complast:
                k, x = _st_le(oin_id, oin_st, a0, a1, qe, srt, thr, out, k, dead)
                c += x
                k, x = _st_le(oaft_id, oaft_st, b0, b1, qe, srt, thr, out, k, dead)
                c += x
                k = emit_run(rin_id, c0, c1, out, k, dead)
                k = emit_run(raft_id, d0, d1, out, k, dead)
            elif compfirst:
                # O_in is ordered by st, so its end test is a plain scan
                k, x = _end_ge(oin_id, oin_end, a0, a1, qs, False, thr, out, k, dead)
                c += x
                k = emit_run(oaft_id, b0, b1, out, k, dead)
                k, x = _end_ge(rin_id, rin_end, c0, c1, qs, srt, thr, out, k, dead)
                c += x
                k = emit_run(raft_id, d0, d1, out, k, dead)
            else:
                k = emit_run(oin_id, a0, a1, out, k, dead)
                k = emit_run(oaft_id, b0, b1, out, k, dead)
                k = emit_run(rin_id, c0, c1, out, k, dead)
                k = emit_run(raft_id, d0, d1, out, k, dead)
            if c > 0:
                trace[parts, 0] = level
                trace[parts, 1] = f
                parts += 1
                comparisons += c
            e += 1

        if l > f:
            # partitions strictly between first and last: originals, no comparisons
            if dense:
                e2 = lo + l
            else:
                e2 = lower_bound(dir_off, e, hi, l)
            if e2 > e:
                k = emit_run(oin_id, dir_pos[e, 0], dir_pos[e2, 0], out, k, dead)
                k = emit_run(oaft_id, dir_pos[e, 1], dir_pos[e2, 1], out, k, dead)
            e = e2
            if e < hi and dir_off[e] == l:
                a0, a1 = dir_pos[e, 0], dir_pos[e + 1, 0]
                b0, b1 = dir_pos[e, 1], dir_pos[e + 1, 1]
                if complast:
                    k, c = _st_le(oin_id, oin_st, a0, a1, qe, srt, thr, out, k, dead)
                    k, x = _st_le(oaft_id, oaft_st, b0, b1, qe, srt, thr, out, k, dead)
                    c += x
                    if c > 0:
                        trace[parts, 0] = level
                        trace[parts, 1] = l
                        parts += 1
                        comparisons += c
                else:
                    k = emit_run(oin_id, a0, a1, out, k, dead)
                    k = emit_run(oaft_id, b0, b1, out, k, dead)

        if f & 1 == 0:
            compfirst = False
        if l & 1 == 1:
            complast = False
    return k, comparisons, parts


@numba.njit(cache=True, nogil=True)
def _hintm_batch(qs, qe, fq, lq, m, lvl_ptr, dir_off, dir_pos, dir_link, dense, use_links,
                 srt, thr, oin_id, oin_st, oin_end, oaft_id, oaft_st, rin_id, rin_end,
                 raft_id, dead, out, trace, folds, counts, cmps, parts):
    for j in range(qs.shape[0]):
        k, c, p = _hintm_query(qs[j], qe[j], fq[j], lq[j], m, lvl_ptr, dir_off, dir_pos,
                               dir_link, dense, use_links, srt, thr, oin_id, oin_st, oin_end,
                               oaft_id, oaft_st, rin_id, rin_end, raft_id, dead, out, trace)
        folds[j] = fold_ids(out, k)
        counts[j] = k
        cmps[j] = c
        parts[j] = p


# ---------------------------------------------------------------------------
# index

class HintMIndex:
    """Query-optimised HINT^m (bulk built; supports deletions via tombstones)."""

    def __init__(self, mapper: DomainMapper, options: HintMOptions, source: IntervalArray,
                 lvl_ptr, dir_off, dir_pos, dir_link, columns: dict, copies: np.ndarray,
                 level_entries: np.ndarray):
        self.mapper = mapper
        self.m = mapper.m
        self.options = options
        self.source = source
        self.lvl_ptr = lvl_ptr
        self.dir_off = dir_off
        self.dir_pos = dir_pos
        self.dir_link = dir_link
        self.columns = columns
        self.copies = copies
        self.level_entries = level_entries
        self._id_order = np.argsort(source.ids, kind="stable")
        self._sorted_ids = source.ids[self._id_order]
        self._dead = np.zeros(0, dtype=np.int64)
        self._out = np.empty(max(len(source), 1), dtype=np.int64)
        self._trace = np.zeros((2 * (self.m + 1), 2), dtype=np.int64)
        self._views = self._column_views()

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, intervals, m: int | None = None, mapper: DomainMapper | None = None,
              options: HintMOptions | None = None, **opts) -> "HintMIndex":
        """Bulk-load ``intervals``.

        Either ``m`` (the mapper is fitted to the data) or an explicit
        ``mapper`` must be given. Keyword flags override ``options``.
        """
        options = replace(options or HintMOptions(), **opts)
        if mapper is None:
            if m is None:
                raise ValueError("give m or a mapper")
            mapper = DomainMapper.fit(intervals, m)
        elif m is not None and m != mapper.m:
            raise ValueError("m disagrees with mapper.m")
        m = mapper.m
        if not options.sparse_dir and m > 24:
            raise ValueError("dense directories are limited to m <= 24")
        arr = as_interval_array(intervals)
        arr.check_unique_ids()
        ma = mapper.map_array(arr.st)
        mb = mapper.map_array(arr.end)
        level, offset, row, orig = assign_all(ma, mb, m)
        inside = (mb[row] >> (m - level)) == offset
        kind = np.where(orig, 0, 2) + np.where(inside, 0, 1)

        copies = np.bincount(row, minlength=len(arr)).astype(np.int64)
        level_entries = np.bincount(level, minlength=m + 1).astype(np.int64)

        columns = {}
        level_keys = [[None] * 4 for _ in range(m + 1)]
        for kd in range(4):
            sel = kind == kd
            lv, off, rw = level[sel], offset[sel], row[sel]
            if options.sorted and kd in (O_IN, O_AFT):
                key = arr.st[rw]
            elif options.sorted and kd == R_IN:
                key = arr.end[rw]
            else:
                key = rw
            order = np.lexsort((rw, key, off, lv))
            lv, off, rw = lv[order], off[order], rw[order]
            bounds = np.searchsorted(lv, np.arange(m + 2))
            for l_ in range(m + 1):
                level_keys[l_][kd] = off[bounds[l_]:bounds[l_ + 1]]
            need_st, need_end = NEEDED[kd] if options.storage_opt else (True, True)
            cols = [arr.ids[rw]]
            if need_st:
                cols.append(arr.st[rw])
            if need_end:
                cols.append(arr.end[rw])
            if options.ids_column:
                columns[kd] = tuple(np.ascontiguousarray(c) for c in cols)
            else:
                columns[kd] = (np.ascontiguousarray(np.column_stack(cols)),)
            columns[kd] = (columns[kd], need_st, need_end)

        level_offsets = [np.unique(np.concatenate(keys)) for keys in level_keys]
        lvl_ptr, dir_off, dir_pos = build_directory(m, level_offsets, not options.sparse_dir,
                                                    level_keys)
        dir_link = _links(m, lvl_ptr, dir_off)
        return cls(mapper, options, arr, lvl_ptr, dir_off, dir_pos, dir_link,
                   columns, copies, level_entries)

    def _column_views(self):
        """Per kind: (ids, st, end) arrays as seen by the kernel.

        Columns dropped by storage truncation are empty arrays, so a kernel
        that touched them would fail loudly.
        """
        empty = np.zeros(0, dtype=np.int64)
        views = []
        for kd in range(4):
            cols, need_st, need_end = self.columns[kd]
            if len(cols) == 1 and cols[0].ndim == 2:
                table = cols[0]
                parts = [table[:, j] for j in range(table.shape[1])]
            else:
                parts = list(cols)
            ids = parts.pop(0)
            st = parts.pop(0) if need_st else empty
            end = parts.pop(0) if need_end else empty
            views.append((ids, st, end))
        return views

    # -- queries -------------------------------------------------------------

    def _kernel_args(self):
        (oin_id, oin_st, oin_end), (oaft_id, oaft_st, _), (rin_id, _, rin_end), (raft_id, _, _) = self._views
        o = self.options
        return (self.m, self.lvl_ptr, self.dir_off, self.dir_pos, self.dir_link,
                not o.sparse_dir, o.links, o.sorted, o.bs_threshold,
                oin_id, oin_st, oin_end, oaft_id, oaft_st, rin_id, rin_end, raft_id, self._dead)

    def _run(self, q):
        st, end = as_query(q)
        if len(self.source) == 0:
            return 0, 0, 0
        fq, lq = self.mapper.route(st), self.mapper.route(end)
        return _hintm_query(st, end, fq, lq, *self._kernel_args(), self._out, self._trace)

    def range_query(self, q: QueryLike) -> np.ndarray:
        """Ids of live intervals overlapping ``q`` (unordered, duplicate-free)."""
        k, _, _ = self._run(q)
        return self._out[:k].copy()

    def query_stats(self, q: QueryLike, trace: bool = False) -> dict:
        k, comparisons, parts = self._run(q)
        stats = {"comparisons": int(comparisons), "partitions_compared": int(parts), "results": int(k)}
        if trace:
            stats["compared"] = [tuple(map(int, r)) for r in self._trace[:parts]]
        return stats

    def run_batch(self, queries: np.ndarray) -> dict:
        """Evaluate an ``(k, 2)`` array of raw queries inside one compiled loop.

        Returns per-query folds, result counts, comparisons and
        partitions-compared arrays.
        """
        queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
        nq = len(queries)
        res = {"folds": np.zeros(nq, dtype=np.uint64), "counts": np.zeros(nq, dtype=np.int64),
               "comparisons": np.zeros(nq, dtype=np.int64), "partitions_compared": np.zeros(nq, dtype=np.int64)}
        if nq == 0 or len(self.source) == 0:
            return res
        qs = np.ascontiguousarray(queries[:, 0])
        qe = np.ascontiguousarray(queries[:, 1])
        fq = self.mapper.map_array(qs, clamp=True)
        lq = self.mapper.map_array(qe, clamp=True)
        _hintm_batch(qs, qe, fq, lq, *self._kernel_args(), self._out, self._trace,
                     res["folds"], res["counts"], res["comparisons"], res["partitions_compared"])
        return res

    # -- updates -------------------------------------------------------------

    def insert(self, s):
        raise HintError("the optimised HINT^m is bulk-loaded; insert through a HybridIndex "
                        "or use UpdatableHintMIndex")

    def _row_of(self, rid: int) -> int:
        i = int(np.searchsorted(self._sorted_ids, rid))
        if i == len(self._sorted_ids) or self._sorted_ids[i] != rid:
            return -1
        return int(self._id_order[i])

    def __contains__(self, rid) -> bool:
        return self._row_of(int(rid)) >= 0 and not self.is_deleted(rid)

    def is_deleted(self, rid) -> bool:
        i = int(np.searchsorted(self._dead, rid))
        return i < len(self._dead) and self._dead[i] == rid

    def delete(self, rid: int):
        """Tombstone ``rid``; its entries stay stored until a rebuild."""
        rid = int(rid)
        if self._row_of(rid) < 0 or self.is_deleted(rid):
            raise UnknownIdError(rid)
        i = int(np.searchsorted(self._dead, rid))
        self._dead = np.insert(self._dead, i, rid)
        return self

    @property
    def tombstones(self) -> frozenset:
        return frozenset(self._dead.tolist())

    def live_intervals(self) -> IntervalArray:
        if len(self._dead) == 0:
            return self.source
        keep = ~np.isin(self.source.ids, self._dead)
        return self.source[keep]

    # -- statistics ----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.source) - len(self._dead)

    @property
    def entries(self) -> int:
        return int(self.copies.sum())

    def stats(self) -> dict:
        n_all = len(self.source)
        dead_entries = 0
        if len(self._dead):
            rows = self._id_order[np.searchsorted(self._sorted_ids, self._dead)]
            dead_entries = int(self.copies[rows].sum())
        live_entries = self.entries - dead_entries
        per_kind = {KIND_NAMES[kd]: int(len(self._views[kd][0])) for kd in range(4)}
        return {
            "n": self.n,
            "n_stored": n_all,
            "m": self.m,
            "raw_bits": self.mapper.raw_bits,
            "entries": live_entries,
            "entries_stored": self.entries,
            "replication": live_entries / self.n if self.n else 0.0,
            "replication_stored": self.entries / n_all if n_all else 0.0,
            "level_entries": self.level_entries.tolist(),
            "kind_entries": per_kind,
            "directory_entries": int(len(self.dir_off)),
            "nbytes": self.nbytes,
        }

    @property
    def nbytes(self) -> int:
        """Bytes held by the directory and the partition tables."""
        total = self.lvl_ptr.nbytes + self.dir_off.nbytes + self.dir_pos.nbytes
        if self.options.sparse_dir and self.options.links:
            total += self.dir_link.nbytes
        for kd in range(4):
            total += sum(c.nbytes for c in self.columns[kd][0])
        return total

    def arrays(self) -> dict:
        out = {"lvl_ptr": self.lvl_ptr, "dir_off": self.dir_off, "dir_pos": self.dir_pos,
               "dir_link": self.dir_link, "copies": self.copies, "level_entries": self.level_entries,
               "src_ids": self.source.ids, "src_st": self.source.st, "src_end": self.source.end,
               "dead": self._dead}
        for kd in range(4):
            for j, c in enumerate(self.columns[kd][0]):
                out[f"{KIND_NAMES[kd]}_{j}"] = c
        return out

    def meta(self) -> dict:
        return {"mapper": [self.mapper.min_x, self.mapper.max_x, self.mapper.m],
                "options": asdict(self.options),
                "needed": [list(self.columns[kd][1:]) for kd in range(4)],
                "ncols": [len(self.columns[kd][0]) for kd in range(4)]}

    @classmethod
    def from_arrays(cls, meta: dict, arrays: dict) -> "HintMIndex":
        mapper = DomainMapper(*meta["mapper"])
        options = HintMOptions(**meta["options"])
        columns = {}
        for kd in range(4):
            cols = tuple(arrays[f"{KIND_NAMES[kd]}_{j}"] for j in range(meta["ncols"][kd]))
            need_st, need_end = meta["needed"][kd]
            columns[kd] = (cols, need_st, need_end)
        src = IntervalArray(arrays["src_ids"], arrays["src_st"], arrays["src_end"], validate=False)
        idx = cls(mapper, options, src, arrays["lvl_ptr"], arrays["dir_off"], arrays["dir_pos"],
                  arrays["dir_link"], columns, arrays["copies"], arrays["level_entries"])
        idx._dead = np.ascontiguousarray(arrays["dead"], dtype=np.int64)
        return idx

    def partition_rows(self, level: int, offset: int) -> dict:
        """Ids per subdivision kind stored in partition ``(level, offset)``."""
        lo, hi = self.lvl_ptr[level], self.lvl_ptr[level + 1]
        e = lo + int(np.searchsorted(self.dir_off[lo:hi], offset))
        res = {name: [] for name in KIND_NAMES}
        if e < hi and self.dir_off[e] == offset:
            for kd in range(4):
                ids = self._views[kd][0]
                res[KIND_NAMES[kd]] = ids[self.dir_pos[e, kd]:self.dir_pos[e + 1, kd]].tolist()
        return res

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"HintMIndex(m={self.m}, n={self.n}, options={self.options})"


def _links(m: int, lvl_ptr: np.ndarray, dir_off: np.ndarray) -> np.ndarray:
    """For each entry at level l, the entry at level l-1 with the smallest
    offset >= offset // 2, or -1."""
    link = np.full(len(dir_off), -1, dtype=np.int64)
    for level in range(1, m + 1):
        lo, hi = lvl_ptr[level], lvl_ptr[level + 1]
        plo, phi = lvl_ptr[level - 1], lvl_ptr[level]
        if hi == lo:
            continue
        j = plo + np.searchsorted(dir_off[plo:phi], dir_off[lo:hi] >> 1, side="left")
        link[lo:hi] = np.where(j < phi, j, -1)
    return link
