"""Intervals, queries, bit prefixes and the raw-to-index domain mapping.

Every index in this package works on closed integer intervals ``[st, end]``.
Open or half-open inputs are handled by the caller: ``[a, b)`` becomes
``[a, b - 1]`` and ``(a, b]`` becomes ``[a + 1, b]`` before indexing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union, overload

import numpy as np

# Raw endpoints are stored as int64 columns.
MAX_RAW = np.iinfo(np.int64).max
MAX_M = 30

# Never assigned to a live record.
TOMBSTONE_ID = MAX_RAW


class HintError(Exception):
    """Base class for errors raised by this package."""


class OutOfDomainError(HintError, ValueError):
    pass


class DuplicateIdError(HintError, ValueError):
    pass


class UnknownIdError(HintError, KeyError):
    pass


@dataclass(frozen=True)
class Interval:
    """A record id with closed endpoints ``[st, end]``."""

    id: int
    st: int
    end: int

    def __post_init__(self):
        if self.st > self.end:
            raise ValueError(f"interval {self.id}: st={self.st} > end={self.end}")
        if self.st < 0 or self.end > MAX_RAW:
            raise ValueError(f"interval {self.id}: endpoints must lie in [0, 2^63 - 1]")
        if not 0 <= self.id < TOMBSTONE_ID:
            raise ValueError(f"invalid record id {self.id}")


@dataclass(frozen=True)
class QueryRange:
    """Closed query range. ``st == end`` is a stabbing query."""

    st: int
    end: int

    def __post_init__(self):
        if self.st > self.end:
            raise ValueError(f"query st={self.st} > end={self.end}")

    @classmethod
    def stab(cls, x: int) -> "QueryRange":
        return cls(x, x)


QueryLike = Union[QueryRange, Sequence[int]]


def as_query(q: QueryLike) -> tuple[int, int]:
    if isinstance(q, QueryRange):
        return int(q.st), int(q.end)
    st, end = q
    if st > end:
        raise ValueError(f"query st={st} > end={end}")
    return int(st), int(end)


class IntervalArray(Sequence[Interval]):
    """Columnar collection of intervals.

    Behaves as a sequence of :class:`Interval` while keeping ids and
    endpoints in three aligned int64 columns, which is what the index
    builders consume.
    """

    __slots__ = ("ids", "st", "end")

    def __init__(self, ids, st, end, *, validate: bool = True):
        self.ids = np.ascontiguousarray(ids, dtype=np.int64)
        self.st = np.ascontiguousarray(st, dtype=np.int64)
        self.end = np.ascontiguousarray(end, dtype=np.int64)
        if not (self.ids.shape == self.st.shape == self.end.shape) or self.ids.ndim != 1:
            raise ValueError("ids, st and end must be 1-d arrays of equal length")
        if validate and len(self.ids):
            if np.any(self.st > self.end):
                bad = int(np.flatnonzero(self.st > self.end)[0])
                raise ValueError(f"interval {self.ids[bad]}: st > end")
            if self.st.min() < 0:
                raise ValueError("endpoints must be non-negative")
            if self.ids.min() < 0 or self.ids.max() >= TOMBSTONE_ID:
                raise ValueError("record ids must lie in [0, 2^63 - 2]")

    @classmethod
    def from_intervals(cls, intervals: Iterable[Interval]) -> "IntervalArray":
        if isinstance(intervals, IntervalArray):
            return intervals
        rows = [(s.id, s.st, s.end) for s in intervals]
        if not rows:
            return cls.empty()
        arr = np.array(rows, dtype=np.int64)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], validate=False)

    @classmethod
    def empty(cls) -> "IntervalArray":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy(), validate=False)

    def __len__(self) -> int:
        return len(self.ids)

    @overload
    def __getitem__(self, i: int) -> Interval: ...
    @overload
    def __getitem__(self, i: slice) -> "IntervalArray": ...

    def __getitem__(self, i):
        if isinstance(i, (slice, np.ndarray, list)):
            return IntervalArray(self.ids[i], self.st[i], self.end[i], validate=False)
        return Interval(int(self.ids[i]), int(self.st[i]), int(self.end[i]))

    def __iter__(self) -> Iterator[Interval]:
        for i, s, e in zip(self.ids.tolist(), self.st.tolist(), self.end.tolist()):
            yield Interval(i, s, e)

    def __eq__(self, other):
        if not isinstance(other, IntervalArray):
            return NotImplemented
        return (np.array_equal(self.ids, other.ids) and np.array_equal(self.st, other.st)
                and np.array_equal(self.end, other.end))

    def __repr__(self):
        return f"IntervalArray(n={len(self)})"

    def check_unique_ids(self):
        if len(self.ids) and len(np.unique(self.ids)) != len(self.ids):
            ids = np.sort(self.ids)
            dup = int(ids[np.flatnonzero(ids[1:] == ids[:-1])[0]])
            raise DuplicateIdError(f"duplicate record id {dup}")

    def concat(self, other: "IntervalArray") -> "IntervalArray":
        return IntervalArray(np.concatenate([self.ids, other.ids]),
                             np.concatenate([self.st, other.st]),
                             np.concatenate([self.end, other.end]), validate=False)


def as_interval_array(intervals) -> IntervalArray:
    if isinstance(intervals, IntervalArray):
        return intervals
    if isinstance(intervals, tuple) and len(intervals) == 3 and isinstance(intervals[0], np.ndarray):
        return IntervalArray(*intervals)
    return IntervalArray.from_intervals(intervals)


def prefix(k: int, x: int, m: int) -> int:
    """The ``k``-bit prefix of the ``m``-bit value ``x``."""
    assert 0 <= k <= m and 0 <= x < (1 << m)
    return x >> (m - k)


@dataclass(frozen=True)
class DomainMapper:
    """Linear rescaling of raw endpoints in ``[min_x, max_x]`` onto ``[0, 2^m - 1]``.

    ``f(x) = floor((x - min_x) / (max_x - min_x) * (2^m - 1))``, evaluated in
    exact integer arithmetic. A single-point domain maps everything to 0.
    """

    min_x: int
    max_x: int
    m: int

    def __post_init__(self):
        if self.min_x > self.max_x:
            raise ValueError("min_x > max_x")
        if not 1 <= self.m <= MAX_M:
            raise ValueError(f"m must be in [1, {MAX_M}], got {self.m}")
        if self.min_x < 0 or self.max_x > MAX_RAW:
            raise ValueError("raw domain must lie in [0, 2^63 - 1]")

    @classmethod
    def fit(cls, intervals, m: int) -> "DomainMapper":
        """Mapper spanning the smallest and largest endpoint of ``intervals``."""
        arr = as_interval_array(intervals)
        if len(arr) == 0:
            return cls(0, 0, m)
        return cls(int(arr.st.min()), int(arr.end.max()), m)

    @classmethod
    def identity(cls, m: int) -> "DomainMapper":
        """Maps ``[0, 2^m - 1]`` onto itself."""
        return cls(0, (1 << m) - 1, m)

    @property
    def span(self) -> int:
        return self.max_x - self.min_x

    @property
    def top(self) -> int:
        return (1 << self.m) - 1

    @property
    def raw_bits(self) -> int:
        """Bits needed to address the raw domain (reported only)."""
        return max(1, self.span.bit_length())

    def map_value(self, x: int) -> int:
        if not self.min_x <= x <= self.max_x:
            raise OutOfDomainError(f"{x} outside [{self.min_x}, {self.max_x}]")
        if self.span == 0:
            return 0
        return (x - self.min_x) * self.top // self.span

    def route(self, x: int) -> int:
        """``map_value`` of ``x`` clamped into the raw domain; total and monotone."""
        return self.map_value(min(max(x, self.min_x), self.max_x))

    def map_interval(self, s: Interval) -> tuple[int, int]:
        return self.map_value(s.st), self.map_value(s.end)

    def map_array(self, x: np.ndarray, *, clamp: bool = False) -> np.ndarray:
        """Vectorised ``map_value`` (or ``route`` when ``clamp``)."""
        x = np.asarray(x, dtype=np.int64)
        if clamp:
            x = np.clip(x, self.min_x, self.max_x)
        elif len(x) and (x.min() < self.min_x or x.max() > self.max_x):
            raise OutOfDomainError(f"values outside [{self.min_x}, {self.max_x}]")
        if self.span == 0:
            return np.zeros(len(x), dtype=np.int64)
        rel = x - self.min_x
        if self.span < (1 << 63) // (self.top + 1):
            return rel * self.top // self.span
        # product overflows int64: split the numerator
        q, r = np.divmod(rel, self.span)
        top = np.int64(self.top)
        hi = q * top
        # r * top may still overflow; fall back to exact Python ints
        out = np.fromiter(((int(ri) * self.top) // self.span for ri in r.tolist()),
                          dtype=np.int64, count=len(r))
        return hi + out
