"""Update-friendly HINT^m and the hybrid main + delta arrangement."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from ._search import fold_result
from .core import (DomainMapper, DuplicateIdError, Interval, IntervalArray, QueryLike,
                   UnknownIdError, as_interval_array, as_query)
from .hint import assign_partitions
from .hintm import HintMIndex, HintMOptions


@dataclass
class _Partition:
    # originals and replicas as full (id, st, end) triples in insertion order
    o_ids: list = field(default_factory=list)
    o_st: list = field(default_factory=list)
    o_end: list = field(default_factory=list)
    r_ids: list = field(default_factory=list)
    r_end: list = field(default_factory=list)
    r_st: list = field(default_factory=list)


class UpdatableHintMIndex:
    """HINT^m with plain originals/replicas divisions, unsorted, one-by-one inserts.

    Partitions are routed through ``mapper.route`` so inserted intervals
    may fall outside the mapper's raw domain.
    """

    def __init__(self, mapper: DomainMapper):
        self.mapper = mapper
        self.m = mapper.m
        self._levels: list[dict[int, _Partition]] = [{} for _ in range(self.m + 1)]
        self._offsets: list[list[int]] = [[] for _ in range(self.m + 1)]
        self._records: dict[int, tuple[int, int]] = {}
        self._dead: set[int] = set()
        self._entries = 0

    @classmethod
    def build(cls, intervals, m: int | None = None, mapper: DomainMapper | None = None):
        if mapper is None:
            mapper = DomainMapper.fit(intervals, m)
        idx = cls(mapper)
        for s in as_interval_array(intervals):
            idx.insert(s)
        return idx

    def insert(self, s: Interval):
        rid = int(s.id)
        if rid in self._records:
            raise DuplicateIdError(f"record id {rid} is already indexed"
                                   + (" (tombstoned)" if rid in self._dead else ""))
        a, b = self.mapper.route(s.st), self.mapper.route(s.end)
        for (level, off), original in assign_partitions(a, b, self.m):
            part = self._levels[level].get(off)
            if part is None:
                part = self._levels[level][off] = _Partition()
                bisect.insort(self._offsets[level], off)
            if original:
                part.o_ids.append(rid)
                part.o_st.append(s.st)
                part.o_end.append(s.end)
            else:
                part.r_ids.append(rid)
                part.r_st.append(s.st)
                part.r_end.append(s.end)
            self._entries += 1
        self._records[rid] = (s.st, s.end)
        return self

    def delete(self, rid: int):
        rid = int(rid)
        if rid not in self._records or rid in self._dead:
            raise UnknownIdError(rid)
        self._dead.add(rid)
        return self

    def __contains__(self, rid) -> bool:
        return rid in self._records and rid not in self._dead

    def is_deleted(self, rid) -> bool:
        return rid in self._dead

    def _run(self, q):
        qs, qe = as_query(q)
        fq, lq = self.mapper.route(qs), self.mapper.route(qe)
        dead = self._dead
        res = []
        cmps = 0
        compared = []
        compfirst = complast = True

        def emit(ids):
            if dead:
                res.extend(i for i in ids if i not in dead)
            else:
                res.extend(ids)

        def emit_if(ids, ok):
            res.extend(i for i, good in zip(ids, ok) if good and i not in dead)

        for level in range(self.m, -1, -1):
            shift = self.m - level
            f, l = fq >> shift, lq >> shift
            offsets = self._offsets[level]
            parts = self._levels[level]
            j = bisect.bisect_left(offsets, f)
            stop = bisect.bisect_right(offsets, l)
            for off in offsets[j:stop]:
                p = parts[off]
                c = 0
                if off == f:
                    if f == l and compfirst and complast:
                        st_ok = [st <= qe for st in p.o_st]
                        emit_if(p.o_ids, [a and qs <= end for a, end in zip(st_ok, p.o_end)])
                        emit_if(p.r_ids, [qs <= end for end in p.r_end])
                        c = len(p.o_ids) + sum(st_ok) + len(p.r_ids)
                    elif f == l and complast:
                        emit_if(p.o_ids, [st <= qe for st in p.o_st])
                        emit(p.r_ids)
                        c = len(p.o_ids)
                    elif compfirst:
                        emit_if(p.o_ids, [qs <= end for end in p.o_end])
                        emit_if(p.r_ids, [qs <= end for end in p.r_end])
                        c = len(p.o_ids) + len(p.r_ids)
                    else:
                        emit(p.o_ids)
                        emit(p.r_ids)
                elif off == l and complast:
                    emit_if(p.o_ids, [st <= qe for st in p.o_st])
                    c = len(p.o_ids)
                else:
                    emit(p.o_ids)
                if c:
                    cmps += c
                    compared.append((level, off))
            if f & 1 == 0:
                compfirst = False
            if l & 1 == 1:
                complast = False
        return res, cmps, compared

    def range_query(self, q: QueryLike) -> np.ndarray:
        return np.array(self._run(q)[0], dtype=np.int64)

    def query_stats(self, q: QueryLike, trace: bool = False) -> dict:
        res, cmps, compared = self._run(q)
        stats = {"comparisons": cmps, "partitions_compared": len(compared), "results": len(res)}
        if trace:
            stats["compared"] = compared
        return stats

    def run_batch(self, queries) -> dict:
        queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
        nq = len(queries)
        res = {"folds": np.zeros(nq, dtype=np.uint64), "counts": np.zeros(nq, dtype=np.int64),
               "comparisons": np.zeros(nq, dtype=np.int64),
               "partitions_compared": np.zeros(nq, dtype=np.int64)}
        for j, (qs, qe) in enumerate(queries.tolist()):
            ids, cmps, compared = self._run((qs, qe))
            res["folds"][j] = fold_result(np.array(ids, dtype=np.int64))
            res["counts"][j] = len(ids)
            res["comparisons"][j] = cmps
            res["partitions_compared"][j] = len(compared)
        return res

    def live_intervals(self) -> IntervalArray:
        items = [(i, st, end) for i, (st, end) in self._records.items() if i not in self._dead]
        if not items:
            return IntervalArray.empty()
        arr = np.array(items, dtype=np.int64)
        return IntervalArray(arr[:, 0], arr[:, 1], arr[:, 2], validate=False)

    @property
    def n(self) -> int:
        return len(self._records) - len(self._dead)

    @property
    def entries(self) -> int:
        return self._entries

    @property
    def tombstones(self) -> frozenset:
        return frozenset(self._dead)

    def partition_rows(self, level: int, offset: int) -> dict:
        p = self._levels[level].get(offset)
        if p is None:
            return {"O": [], "R": []}
        return {"O": list(p.o_ids), "R": list(p.r_ids)}

    def stats(self) -> dict:
        return {"n": self.n, "n_stored": len(self._records), "m": self.m,
                "entries_stored": self._entries,
                "replication_stored": self._entries / len(self._records) if self._records else 0.0}

    @property
    def nbytes(self) -> int:
        # three 8-byte fields per stored triple
        return 24 * self._entries

    def __len__(self):
        return self.n


class HybridIndex:
    """Query-optimised main HINT^m plus a small update-friendly delta.

    Inserts go to the delta, deletions become tombstones in whichever index
    holds the id, and queries probe both. :meth:`flush_delta` rebuilds the
    main index from all live intervals; it runs automatically once the
    delta's live count exceeds ``merge_threshold`` times the main's.
    """

    def __init__(self, main: HintMIndex, merge_threshold: float | None = 0.10):
        self._state = (main, UpdatableHintMIndex(main.mapper))
        self.merge_threshold = merge_threshold
        self.flushes = 0

    @property
    def main(self) -> HintMIndex:
        return self._state[0]

    @property
    def delta(self) -> UpdatableHintMIndex:
        return self._state[1]

    @classmethod
    def build(cls, intervals, m: int, options: HintMOptions | None = None,
              merge_threshold: float | None = 0.10, mapper: DomainMapper | None = None) -> "HybridIndex":
        return cls(HintMIndex.build(intervals, m=None if mapper else m, mapper=mapper, options=options),
                   merge_threshold)

    def __contains__(self, rid) -> bool:
        return rid in self.main or rid in self.delta

    def insert(self, s: Interval):
        rid = int(s.id)
        if (self.main._row_of(rid) >= 0) or rid in self.delta._records:
            raise DuplicateIdError(f"record id {rid} is already indexed or tombstoned")
        self.delta.insert(s)
        if (self.merge_threshold is not None
                and self.delta.n > self.merge_threshold * max(self.main.n, 1)):
            self.flush_delta()
        return self

    def delete(self, rid: int):
        rid = int(rid)
        if rid in self.delta:
            self.delta.delete(rid)
        elif rid in self.main:
            self.main.delete(rid)
        else:
            raise UnknownIdError(rid)
        return self

    def range_query(self, q: QueryLike) -> np.ndarray:
        main, delta = self._state
        a = main.range_query(q)
        if delta.n == 0:
            return a
        return np.concatenate([a, delta.range_query(q)])

    def query_stats(self, q: QueryLike) -> dict:
        main, delta = self._state
        a = main.query_stats(q)
        b = delta.query_stats(q)
        return {key: a[key] + b[key] for key in ("comparisons", "partitions_compared", "results")}

    def run_batch(self, queries) -> dict:
        """Batch evaluation; folds add up because they are sums over ids."""
        main, delta = self._state
        res = main.run_batch(queries)
        if delta.n:
            extra = delta.run_batch(queries)
            for key in res:
                res[key] = res[key] + extra[key]
        return res

    def live_intervals(self) -> IntervalArray:
        return self.main.live_intervals().concat(self.delta.live_intervals())

    def flush_delta(self) -> "HybridIndex":
        """Merge the delta into a rebuilt main index and drop tombstoned entries."""
        if self.delta.n == 0 and not self.delta._records and len(self.main._dead) == 0:
            return self
        live = self.live_intervals()
        main = HintMIndex.build(live, m=self.main.m, options=self.main.options)
        # one reference swap: readers see old or new state, never a mix
        self._state = (main, UpdatableHintMIndex(main.mapper))
        self.flushes += 1
        return self

    @property
    def n(self) -> int:
        return self.main.n + self.delta.n

    @property
    def entries_stored(self) -> int:
        return self.main.entries + self.delta.entries

    @property
    def nbytes(self) -> int:
        return self.main.nbytes + self.delta.nbytes

    def stats(self) -> dict:
        return {"main": self.main.stats(), "delta": self.delta.stats(), "flushes": self.flushes}

    def __len__(self):
        return self.n
