"""Benchmark harness: build, query, update-mix and parameter sweeps.

Every timed query pass folds result ids into a per-query checksum, and
runs over the same workload must agree on the combined checksum
whichever index answered them. A disagreement raises
:class:`ChecksumMismatch`, which the command line turns into exit code 2.

Throughput is measured as one untimed warm-up pass followed by
``repeats`` timed passes. ``qps_best`` is the best pass and ``qps_mean``
the mean over the passes.
"""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._search import combine_folds, fold_result
from .baselines import BruteForce, Grid1D
from .core import HintError, as_interval_array
from .hint import HintIndex
from .hintm import HintMIndex, HintMOptions
from .updates import HybridIndex, UpdatableHintMIndex
from .workload import WorkloadSpec, gen_queries

SCHEMA_VERSION = 1
SCHEMA_LINE = f"# hintindex bench report, schema {SCHEMA_VERSION}"
INDEX_KINDS = ("brute", "grid", "hint", "hintm", "hybrid", "updatable")


class ChecksumMismatch(HintError):
    pass


@dataclass
class BenchReport:
    command: str
    index: str
    params: str = ""
    n: int = 0
    queries: int = 0
    build_seconds: float = 0.0
    index_bytes: int = 0
    qps_best: float = 0.0
    qps_mean: float = 0.0
    mean_comparisons: float = 0.0
    mean_partitions_compared: float = 0.0
    replication: float = 0.0
    checksum: str = ""
    inserts: int = 0
    inserts_per_s: float = 0.0
    deletes: int = 0
    deletes_per_s: float = 0.0
    total_seconds: float = 0.0

    @classmethod
    def columns(cls) -> list[str]:
        return list(cls.__dataclass_fields__)


# ---------------------------------------------------------------------------
# index construction

def build_index(kind: str, intervals, m: int | None = None, p: int | None = None,
                opts: str | HintMOptions | None = None):
    """Build an index of the given kind; returns ``(index, seconds)``."""
    arr = as_interval_array(intervals)
    options = opts if isinstance(opts, HintMOptions) else HintMOptions.parse(opts)
    t0 = time.perf_counter()
    if kind == "brute":
        idx = BruteForce(arr)
    elif kind == "grid":
        idx = Grid1D.build(arr, p or 1000)
    elif kind == "hint":
        need = max(1, int(arr.end.max()).bit_length()) if len(arr) else 1
        idx = HintIndex.build(arr, m if m is not None else need)
    elif kind == "hintm":
        idx = HintMIndex.build(arr, m=m or 10, options=options)
    elif kind == "hybrid":
        idx = HybridIndex.build(arr, m=m or 10, options=options)
    elif kind == "updatable":
        idx = UpdatableHintMIndex.build(arr, m=m or 10)
    else:
        raise ValueError(f"unknown index kind {kind!r}; choose from {', '.join(INDEX_KINDS)}")
    return idx, time.perf_counter() - t0


def replication_of(index) -> float:
    if isinstance(index, BruteForce):
        return 1.0
    if isinstance(index, (Grid1D, HintIndex)):
        return index.replication
    if isinstance(index, HybridIndex):
        return index.entries_stored / index.n if index.n else 0.0
    st = index.stats()
    return st.get("replication", st.get("replication_stored", 0.0))


def _params(kind, m, p, opts) -> str:
    if kind == "grid":
        return f"p={p or 1000}"
    if kind in ("hint", "updatable"):
        return f"m={m}"
    if kind in ("hintm", "hybrid"):
        return f"m={m or 10};opts={opts or ''}"
    return ""


# ---------------------------------------------------------------------------
# commands

def time_queries(index, queries, repeats: int = 3) -> dict:
    """Warm-up pass plus ``repeats`` timed passes of ``index.run_batch``."""
    queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    if len(queries) == 0:
        raise ValueError("no queries to run")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    res = index.run_batch(queries)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        index.run_batch(queries)
        times.append(time.perf_counter() - t0)
    nq = len(queries)
    best = min(times)
    mean = sum(times) / len(times)
    return {
        "qps_best": nq / best if best > 0 else float("inf"),
        "qps_mean": nq / mean if mean > 0 else float("inf"),
        "checksum": f"{combine_folds(res['folds']):016x}",
        "mean_comparisons": float(np.mean(res["comparisons"])) if "comparisons" in res else 0.0,
        "mean_partitions_compared": (float(np.mean(res["partitions_compared"]))
                                     if "partitions_compared" in res else 0.0),
        "results": int(res["counts"].sum()),
    }


def cmd_build(intervals, kind: str, m=None, p=None, opts=None, save=None) -> BenchReport:
    from .serialize import save_index

    arr = as_interval_array(intervals)
    idx, secs = build_index(kind, arr, m, p, opts)
    if save is not None:
        save_index(idx, save)
    return BenchReport("build", kind, _params(kind, m, p, opts), n=len(arr), build_seconds=secs,
                       index_bytes=int(idx.nbytes), replication=replication_of(idx))


def cmd_query(intervals, queries, kind: str, m=None, p=None, opts=None, repeats: int = 3,
              index=None) -> BenchReport:
    queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    if len(queries) == 0:
        raise ValueError("no queries to run")
    arr = as_interval_array(intervals)
    secs = 0.0
    if index is None:
        index, secs = build_index(kind, arr, m, p, opts)
    t = time_queries(index, queries, repeats)
    return BenchReport("query", kind, _params(kind, m, p, opts), n=len(arr), queries=len(queries),
                       build_seconds=secs, index_bytes=int(index.nbytes), qps_best=t["qps_best"],
                       qps_mean=t["qps_mean"], mean_comparisons=t["mean_comparisons"],
                       mean_partitions_compared=t["mean_partitions_compared"],
                       replication=replication_of(index), checksum=t["checksum"])


def check_checksums(reports) -> None:
    """Raise :class:`ChecksumMismatch` unless all query reports agree."""
    sums = {(r.index, r.params): r.checksum for r in reports if r.checksum}
    if len(set(sums.values())) > 1:
        detail = ", ".join(f"{k}{' ' + p if p else ''}={v}" for (k, p), v in sums.items())
        raise ChecksumMismatch(f"result checksums differ: {detail}")


@dataclass(frozen=True)
class MixedScript:
    preload_fraction: float = 0.9
    queries: int = 10_000
    inserts: int = 5_000
    deletes: int = 1_000
    seed: int = 0

    @property
    def empty(self) -> bool:
        return self.queries == 0 and self.inserts == 0 and self.deletes == 0


def mixed_operations(intervals, script: MixedScript, query_spec: WorkloadSpec):
    """Split a dataset into a preload and a shuffled operation stream.

    Intervals are ordered by start; the first ``preload_fraction`` is
    loaded up front and the inserts are drawn from the rest in order.
    Deletions target random preloaded ids. Returns
    ``(preload, ops)`` where each op is ``("q", (st, end))``,
    ``("i", Interval)`` or ``("d", id)``.
    """
    arr = as_interval_array(intervals)
    order = np.lexsort((arr.ids, arr.st))
    arr = arr[order]
    cut = int(round(script.preload_fraction * len(arr)))
    preload, pool = arr[:cut], arr[cut:]
    if script.inserts > len(pool):
        raise ValueError(f"script wants {script.inserts} inserts but only {len(pool)} intervals remain")
    if script.deletes > len(preload):
        raise ValueError("more deletions than preloaded intervals")
    rng = np.random.default_rng(script.seed)
    queries = gen_queries(query_spec.scaled(query_count=script.queries), preload)
    victims = rng.choice(preload.ids, size=script.deletes, replace=False)
    ops = ([("q", (int(a), int(b))) for a, b in queries.tolist()]
           + [("i", pool[i]) for i in range(script.inserts)]
           + [("d", int(v)) for v in victims])
    perm = rng.permutation(len(ops))
    return preload, [ops[i] for i in perm]


def cmd_mixed(intervals, kind: str = "hybrid", m: int = 10, opts=None,
              script: MixedScript = MixedScript(), query_spec: WorkloadSpec | None = None,
              flush: bool = False):
    """Run a preload + interleaved query/insert/delete stream.

    Returns ``(reports, index, answers)``; ``reports`` is empty for an
    empty script, ``answers`` lists the result id arrays of the queries in
    stream order.
    """
    if kind not in ("hybrid", "updatable"):
        raise ValueError("mixed workloads need an updatable index: 'hybrid' or 'updatable'")
    if script.empty:
        return [], None, []
    arr = as_interval_array(intervals)
    if query_spec is None:
        span = int(arr.end.max()) + 1 if len(arr) else 1
        query_spec = WorkloadSpec(domain_len=span, n=0, seed=script.seed)
    preload, ops = mixed_operations(arr, script, query_spec)
    idx, build_s = build_index(kind, preload, m=m, opts=opts)
    spent = {"q": 0.0, "i": 0.0, "d": 0.0}
    counts = {"q": 0, "i": 0, "d": 0}
    answers = []
    for op, arg in ops:
        t0 = time.perf_counter()
        if op == "q":
            res = idx.range_query(arg)
        elif op == "i":
            idx.insert(arg)
        else:
            idx.delete(arg)
        spent[op] += time.perf_counter() - t0
        counts[op] += 1
        if op == "q":
            answers.append(res)
    if flush and isinstance(idx, HybridIndex):
        idx.flush_delta()
    folds = [fold_result(a) for a in answers]
    acc = combine_folds(folds) if folds else 0

    def rate(op):
        return counts[op] / spent[op] if spent[op] > 0 else 0.0

    report = BenchReport("mixed", kind, _params(kind, m, None, opts), n=len(arr),
                         queries=counts["q"], build_seconds=build_s, index_bytes=int(idx.nbytes),
                         qps_best=rate("q"), qps_mean=rate("q"), replication=replication_of(idx),
                         checksum=f"{acc:016x}", inserts=counts["i"], inserts_per_s=rate("i"),
                         deletes=counts["d"], deletes_per_s=rate("d"),
                         total_seconds=sum(spent.values()))
    return [report], idx, answers


def cmd_sweep(intervals, queries, kind: str, grid: list[dict], repeats: int = 3,
              out=None) -> list[BenchReport]:
    """One query report per grid point (a dict of ``m``/``p``/``opts``), in grid order."""
    rows = []
    for point in grid:
        unknown = set(point) - {"m", "p", "opts"}
        if unknown:
            raise ValueError(f"unknown sweep parameters {sorted(unknown)}")
        rep = cmd_query(intervals, queries, kind, repeats=repeats, **point)
        rep.command = "sweep"
        rows.append(rep)
    if out is not None:
        write_reports(rows, out)
    return rows


def best_of(reports, key: str = "qps_best") -> BenchReport:
    return max(reports, key=lambda r: getattr(r, key))


# ---------------------------------------------------------------------------
# CSV

def write_reports(reports, path, append: bool = True) -> None:
    """Write report rows; an existing file is appended to after a schema check."""
    path = Path(path)
    cols = BenchReport.columns()
    exists = append and path.exists() and path.stat().st_size > 0
    if exists:
        with open(path, newline="") as fh:
            first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path} was written with a different report schema")
    with open(path, "a" if exists else "w", newline="") as fh:
        if not exists:
            fh.write(SCHEMA_LINE + "\n")
        w = csv.DictWriter(fh, fieldnames=cols)
        if not exists:
            w.writeheader()
        for r in reports:
            w.writerow(asdict(r))


def read_reports(path) -> list[BenchReport]:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path} is not a schema-{SCHEMA_VERSION} report")
        rows = list(csv.DictReader(fh))
    types = {k: f.type for k, f in BenchReport.__dataclass_fields__.items()}
    conv = {"int": int, "float": float, "str": str}
    return [BenchReport(**{k: conv[types[k]](v) for k, v in row.items()}) for row in rows]
