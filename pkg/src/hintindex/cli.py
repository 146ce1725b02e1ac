"""Command line front end for :mod:`hintindex.bench`.

    python -m hintindex gen   --n 100000 --dataset data.tsv --queries q.tsv
    python -m hintindex build --dataset data.tsv --index hintm --m 12 --save idx.bin
    python -m hintindex query --dataset data.tsv --queries q.tsv --index brute,grid,hintm
    python -m hintindex mixed --dataset data.tsv --index hybrid --m 12
    python -m hintindex sweep --index hintm --m 4-16 --out sweep.csv

Exit status: 0 on success, 2 when result checksums disagree between
index kinds, 1 on any other error.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .core import HintError
from .workload import WorkloadSpec, gen_intervals, gen_queries, load_dataset, load_queries, save_dataset, save_queries


def _int_list(text: str | None) -> list[int | None]:
    """``"8"``, ``"4,8,12"`` or ``"4-16"``."""
    if text is None:
        return [None]
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _kinds(text: str) -> list[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    for k in kinds:
        if k not in bench.INDEX_KINDS:
            raise ValueError(f"unknown index kind {k!r}")
    return kinds


def _spec(args) -> WorkloadSpec:
    return WorkloadSpec(domain_len=args.domain, n=args.n, alpha=args.alpha, sigma=args.sigma,
                        query_count=args.query_count, query_extent_pct=args.extent_pct / 100.0,
                        query_position_dist=args.query_dist, seed=args.seed)


def _data(args):
    spec = _spec(args)
    data = load_dataset(args.dataset) if args.dataset else gen_intervals(spec)
    return spec, data


def _queries(args, spec, data):
    if args.queries:
        return load_queries(args.queries)
    return gen_queries(spec, data)


def _emit(reports, args):
    if args.out:
        bench.write_reports(reports, args.out)
    cols = ["command", "index", "params", "n", "queries", "build_seconds", "index_bytes",
            "qps_best", "qps_mean", "mean_comparisons", "replication", "checksum"]
    if reports:
        print("\t".join(cols))
    for r in reports:
        vals = [getattr(r, c) for c in cols]
        print("\t".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in vals))


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hintindex", description="Interval index benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", help="interval file (id, st, end per line); generated if absent")
    common.add_argument("--queries", help="query file (st, end per line); generated if absent")
    common.add_argument("--index", default="hintm",
                        help="index kind, or a comma list: brute,grid,hint,hintm,hybrid,updatable")
    common.add_argument("--m", help="HINT levels: one value, a list or a range like 4-16")
    common.add_argument("--p", help="1D-grid cells: one value, a list or a range")
    common.add_argument("--opts", default="sorted,sopt,idscol,sparse",
                        help="HINT^m options, any of sorted,sopt,idscol,sparse ('' for none)")
    common.add_argument("--alpha", type=float, default=1.2)
    common.add_argument("--sigma", type=float, default=1_000_000)
    common.add_argument("--extent-pct", type=float, default=0.1, help="query extent, percent of domain")
    common.add_argument("--domain", type=int, default=128_000_000)
    common.add_argument("--n", type=int, default=1_000_000)
    common.add_argument("--query-count", type=int, default=10_000)
    common.add_argument("--query-dist", choices=("data", "uniform"), default="data")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--repeats", type=int, default=3)
    common.add_argument("--out", help="append report rows to this CSV")

    sub.add_parser("gen", parents=[common], help="write a synthetic dataset and query file")
    b = sub.add_parser("build", parents=[common], help="build an index and report time and size")
    b.add_argument("--save", help="write the index snapshot here")
    sub.add_parser("query", parents=[common], help="time a query workload; checks checksums")
    mx = sub.add_parser("mixed", parents=[common], help="preload 90%%, then interleave queries and updates")
    mx.add_argument("--mix-queries", type=int, default=10_000)
    mx.add_argument("--mix-inserts", type=int, default=5_000)
    mx.add_argument("--mix-deletes", type=int, default=1_000)
    mx.add_argument("--flush", action="store_true", help="merge the delta after the script")
    sub.add_parser("sweep", parents=[common], help="query report for every --m / --p value")
    return ap


def run(args) -> int:
    if args.command == "gen":
        if not args.dataset or not args.queries:
            raise ValueError("gen needs --dataset and --queries output paths")
        spec = _spec(args)
        data = gen_intervals(spec)
        save_dataset(data, args.dataset)
        save_queries(gen_queries(spec, data), args.queries)
        print(f"wrote {len(data)} intervals to {args.dataset} and {spec.query_count} queries to {args.queries}")
        return 0

    spec, data = _data(args)
    kinds = _kinds(args.index)
    ms, ps = _int_list(args.m), _int_list(args.p)
    reports = []
    if args.command == "build":
        if len(kinds) != 1 or len(ms) != 1 or len(ps) != 1:
            raise ValueError("build takes a single --index, --m and --p")
        reports.append(bench.cmd_build(data, kinds[0], ms[0], ps[0], args.opts, save=args.save))
    elif args.command == "query":
        queries = _queries(args, spec, data)
        for kind in kinds:
            for m in ms:
                for p in ps:
                    reports.append(bench.cmd_query(data, queries, kind, m, p, args.opts, args.repeats))
    elif args.command == "mixed":
        script = bench.MixedScript(queries=args.mix_queries, inserts=args.mix_inserts,
                                   deletes=args.mix_deletes, seed=args.seed)
        for kind in kinds:
            rows, _, _ = bench.cmd_mixed(data, kind, ms[0] or 10, args.opts, script, spec, args.flush)
            reports.extend(rows)
    elif args.command == "sweep":
        if len(kinds) != 1:
            raise ValueError("sweep takes a single --index")
        queries = _queries(args, spec, data)
        grid = [{k: v for k, v in (("m", m), ("p", p)) if v is not None} | {"opts": args.opts}
                for m in ms for p in ps]
        reports = bench.cmd_sweep(data, queries, kinds[0], grid, args.repeats)
    _emit(reports, args)
    bench.check_checksums([r for r in reports if r.command in ("query", "sweep", "mixed")])
    return 0


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return run(args)
    except bench.ChecksumMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HintError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
