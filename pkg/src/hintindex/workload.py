"""Synthetic interval/query workloads and the dataset text format.

Dataset files hold one interval per line, ``id<TAB>st<TAB>end``; comma
separated lines are accepted too, and a ``.gz`` suffix selects gzip.
Query files use the same format with the id column optional.
"""

from __future__ import annotations

import gzip
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import IntervalArray, as_interval_array


@dataclass(frozen=True)
class WorkloadSpec:
    domain_len: int = 128_000_000
    n: int = 10_000_000
    alpha: float = 1.2
    sigma: float = 1_000_000
    query_count: int = 10_000
    query_extent_pct: float = 0.001
    query_position_dist: str = "data"  # "data" or "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.domain_len < 1 or self.n < 0 or self.query_count < 0:
            raise ValueError("domain_len must be >= 1, n and query_count >= 0")
        if not self.alpha > 1:
            raise ValueError("alpha must be > 1")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if not 0 <= self.query_extent_pct <= 1:
            raise ValueError("query_extent_pct must lie in [0, 1]")
        if self.query_position_dist not in ("data", "uniform"):
            raise ValueError("query_position_dist must be 'data' or 'uniform'")

    def scaled(self, **changes) -> "WorkloadSpec":
        return replace(self, **changes)


def _zipf_truncated(rng: np.random.Generator, alpha: float, N: int, size: int) -> np.ndarray:
    """Exact draws from ``P(x) ~ x^-alpha`` on ``1..N`` (rejection-inversion)."""
    if N == 1 or size == 0:
        return np.ones(size, dtype=np.int64)
    e = alpha

    def h(x):
        return np.exp(-e * np.log(x))

    def H(x):
        lx = np.log(x)
        t = (1.0 - e) * lx
        return np.where(np.abs(t) > 1e-8, np.expm1(t) / np.where(t == 0, 1, t), 1.0) * lx

    def H_inv(u):
        t = np.maximum(u * (1.0 - e), -1.0)
        g = np.where(np.abs(t) > 1e-8, np.log1p(t) / np.where(t == 0, 1, t), 1.0)
        return np.exp(g * u)

    h_x1 = float(H(np.float64(1.5))) - 1.0
    h_n = float(H(np.float64(N + 0.5)))
    s = 2.0 - float(H_inv(H(np.float64(2.5)) - h(np.float64(2.0))))
    out = np.empty(size, dtype=np.int64)
    filled = 0
    while filled < size:
        need = size - filled
        batch = max(64, int(need * 1.2))
        u = h_n + rng.random(batch) * (h_x1 - h_n)
        x = H_inv(u)
        k = np.clip(np.floor(x + 0.5), 1, N)
        ok = (k - x <= s) | (u >= H(k + 0.5) - h(k))
        acc = k[ok].astype(np.int64)[:need]
        out[filled:filled + len(acc)] = acc
        filled += len(acc)
    return out


def gen_intervals(spec: WorkloadSpec) -> IntervalArray:
    """Zipf lengths, normal midpoints around the domain centre, clipped to the domain."""
    rng = np.random.default_rng(spec.seed)
    L = spec.domain_len
    lengths = _zipf_truncated(rng, spec.alpha, L, spec.n)
    mid = rng.normal(L / 2.0, spec.sigma, spec.n) if spec.sigma > 0 else np.full(spec.n, L / 2.0)
    mid = np.clip(np.rint(mid), -L, 2 * L).astype(np.int64)
    st = mid - (lengths - 1) // 2
    end = st + lengths - 1
    st = np.clip(st, 0, L - 1)
    end = np.clip(end, 0, L - 1)
    return IntervalArray(np.arange(spec.n, dtype=np.int64), st, end, validate=False)


def gen_queries(spec: WorkloadSpec, dataset=None) -> np.ndarray:
    """``(query_count, 2)`` array of ``[st, end]`` rows with fixed extent.

    Positions are uniform over the domain, or centred on the midpoint of a
    uniformly sampled dataset interval for ``"data"``. Queries are shifted
    to lie inside the domain.
    """
    rng = np.random.default_rng([spec.seed, 1])
    L = spec.domain_len
    extent = min(int(round(spec.query_extent_pct * L)), L - 1)
    k = spec.query_count
    if spec.query_position_dist == "uniform" or dataset is None or len(dataset) == 0:
        st = rng.integers(0, L - extent, size=k, endpoint=False) if L - extent > 0 else np.zeros(k, np.int64)
    else:
        arr = as_interval_array(dataset)
        pick = rng.integers(0, len(arr), size=k)
        centre = (arr.st[pick] + arr.end[pick]) // 2
        st = np.clip(centre - extent // 2, 0, L - 1 - extent)
    st = np.asarray(st, dtype=np.int64)
    return np.column_stack([st, st + extent])


# ---------------------------------------------------------------------------
# file I/O

def _open(path: Path, mode: str):
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="ascii")
    return open(path, mode, encoding="ascii")


def _split(line: str):
    return line.split("\t") if "\t" in line else (line.split(",") if "," in line else line.split())


def load_dataset(path, format: str = "auto") -> IntervalArray:
    """Read a dataset file; malformed lines raise ``ValueError`` with the line number."""
    path = Path(path)
    ids, sts, ends = [], [], []
    with _open(path, "r") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = _split(line)
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
            try:
                i, s, e = (int(p) for p in parts)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer field in {line!r}") from None
            if s > e:
                raise ValueError(f"{path}:{lineno}: st > end in {line!r}")
            if s < 0 or i < 0:
                raise ValueError(f"{path}:{lineno}: negative value in {line!r}")
            ids.append(i)
            sts.append(s)
            ends.append(e)
    if not ids:
        return IntervalArray.empty()
    return IntervalArray(ids, sts, ends)


def save_dataset(intervals, path, format: str = "tsv") -> None:
    arr = as_interval_array(intervals)
    sep = {"tsv": "\t", "csv": ","}[format]
    path = Path(path)
    with _open(path, "w") as fh:
        for i, s, e in zip(arr.ids.tolist(), arr.st.tolist(), arr.end.tolist()):
            fh.write(f"{i}{sep}{s}{sep}{e}\n")


def load_queries(path) -> np.ndarray:
    path = Path(path)
    rows = []
    with _open(path, "r") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = _split(line)
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 fields")
            try:
                s, e = int(parts[-2]), int(parts[-1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer field in {line!r}") from None
            if s > e:
                raise ValueError(f"{path}:{lineno}: st > end in {line!r}")
            rows.append((s, e))
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def save_queries(queries, path) -> None:
    queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    with _open(Path(path), "w") as fh:
        for s, e in queries.tolist():
            fh.write(f"{s}\t{e}\n")

