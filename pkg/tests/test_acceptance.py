"""Acceptance checks, one numbered criterion per test group.

Desk-scale sizes are used throughout (n = 200k for the default workload
instead of 10M); the summary at the end of the run prints one PASS/FAIL
line per criterion.
"""

import time

import numpy as np
import pytest

from hintindex import (BruteForce, CostCoefficients, DatasetStats, Grid1D, HintIndex, HintMIndex,
                       HintMOptions, HybridIndex, IntervalArray, WorkloadSpec, calibrate_betas, combine_folds, estimate_m_opt,
                       gen_intervals, gen_queries, predict_replication)
from hintindex import bench

from conftest import overlap_oracle

DESK_N = 200_000
SWEEP_M = list(range(8, 21))
SWEEP_P = [100, 300, 1000, 3000, 10_000]
ALL_OPTS = "sorted,sopt,idscol,sparse"


def checksum(index, queries):
    return combine_folds(index.run_batch(queries)["folds"])


@pytest.fixture(scope="module")
def desk_workload():
    spec = WorkloadSpec(n=DESK_N, query_count=3000, seed=0)
    data = gen_intervals(spec)
    return spec, data, gen_queries(spec, data)


@pytest.fixture(scope="module")
def sweeps(desk_workload):
    _, data, queries = desk_workload
    hintm = bench.cmd_sweep(data, queries, "hintm", [{"m": m, "opts": ALL_OPTS} for m in SWEEP_M],
                            repeats=5)
    grid = bench.cmd_sweep(data, queries, "grid", [{"p": p} for p in SWEEP_P], repeats=5)
    for r in hintm + grid:
        print(f"{r.index:6s} {r.params:32s} {r.qps_best:10.0f} qps  {r.index_bytes:>11d} B")
    return hintm, grid


# ---------------------------------------------------------------------------
# 1. all index kinds agree

@pytest.mark.criterion(1, "oracle equivalence over 50 random workloads")
@pytest.mark.slow
def test_checksums_agree_across_index_kinds():
    t0 = time.perf_counter()
    alphas = np.linspace(1.01, 1.8, 50)
    sigmas = np.geomspace(10_000, 1_000_000, 50)
    rng = np.random.default_rng(7)
    rng.shuffle(sigmas)
    for i, (alpha, sigma) in enumerate(zip(alphas, sigmas)):
        spec = WorkloadSpec(domain_len=2 ** 20, n=10_000, alpha=float(alpha), sigma=float(sigma),
                            query_count=200, query_position_dist=("data", "uniform")[i % 2], seed=i)
        data = gen_intervals(spec)
        queries = gen_queries(spec, data)
        expected = checksum(BruteForce(data), queries)
        cut = 9 * len(data) // 10
        hybrid = HybridIndex.build(data[:cut], m=12, merge_threshold=None)
        for s in data[cut:]:
            hybrid.insert(s)
        assert hybrid.delta.n == len(data) - cut
        indexes = {"grid": Grid1D.build(data, 500), "hint": HintIndex.build(data, 20), "hybrid": hybrid}
        for m in (8, 12, 16):
            indexes[f"hintm{m}"] = HintMIndex.build(data, m=m)
        for name, idx in indexes.items():
            assert checksum(idx, queries) == expected, (i, name)
    elapsed = time.perf_counter() - t0
    print(f"50 workloads in {elapsed:.1f}s")
    assert elapsed < 120


# ---------------------------------------------------------------------------
# 2. the comparison-free index never compares

@pytest.mark.criterion(2, "comparison-free HINT performs zero comparisons")
def test_hint_zero_comparisons_exhaustive():
    rng = np.random.default_rng(2)
    from conftest import random_intervals
    data = random_intervals(rng, 3000, 256, max_len=80)
    idx = HintIndex.build(data, 8)
    a, b = np.triu_indices(256)
    queries = np.column_stack([a, b])
    res = idx.run_batch(queries)
    assert len(queries) == 256 * 257 // 2
    assert not res["comparisons"].any()
    brute = BruteForce(data).run_batch(queries)
    assert np.array_equal(res["folds"], brute["folds"])
    for qs, qe in queries[::97]:
        assert idx.query_stats((qs, qe))["comparisons"] == 0
        assert np.array_equal(np.sort(idx.range_query((qs, qe))), overlap_oracle(data, qs, qe))


# ---------------------------------------------------------------------------
# 3. expected number of partitions that need comparisons

@pytest.mark.criterion(3, "mean partitions with comparisons <= 4.5")
def test_mean_partitions_compared(desk_workload):
    _, data, _ = desk_workload
    m = 12
    idx = HintMIndex.build(data, m=m)
    lo, hi = int(data.st.min()), int(data.end.max())
    width = (hi - lo + 1) / 2 ** m
    rng = np.random.default_rng(3)
    extent = rng.integers(int(np.ceil(2 * width)), int(64 * width), 10_000)
    qs = rng.integers(lo, hi - extent)
    res = idx.run_batch(np.column_stack([qs, qs + extent]))
    mean = res["partitions_compared"].mean()
    print(f"mean partitions compared {mean:.3f}")
    assert mean <= 4.5


# ---------------------------------------------------------------------------
# 4. replication model

@pytest.mark.criterion(4, "replication within 2x of the model, increasing in m")
def test_replication_matches_model():
    rng = np.random.default_rng(4)
    n, domain, lam = 100_000, 2 ** 26, 2 ** 16
    st = rng.integers(0, domain - 2 * lam, n)
    end = st + rng.integers(0, 2 * lam, n)
    data = IntervalArray(np.arange(n), st, end)
    stats = DatasetStats.from_data(data, 0)
    measured, predicted = [], []
    for m in range(8, 17):
        measured.append(HintMIndex.build(data, m=m).stats()["replication"])
        predicted.append(predict_replication(stats.lambda_s, stats.m_prime, m))
    for m, k, p in zip(range(8, 17), measured, predicted):
        print(f"m={m:2d} measured {k:.3f} model {p:.3f}")
        assert p / 2 <= k <= 2 * p
    assert all(b > a for a, b in zip(measured, measured[1:]))


# ---------------------------------------------------------------------------
# 5. tuning model vs sweep

@pytest.mark.criterion(5, "model m_opt within 2 of the sweep's best m")
@pytest.mark.slow
def test_model_m_opt_near_sweep_best(desk_workload, sweeps):
    spec, data, _ = desk_workload
    hintm, _ = sweeps
    best = SWEEP_M[int(np.argmax([r.qps_best for r in hintm]))]
    stats = DatasetStats.from_data(data, spec.query_extent_pct * spec.domain_len)
    coeffs = calibrate_betas()
    model = estimate_m_opt(stats, coeffs)
    print(f"sweep best m={best}, model m_opt={model} (calibrated ratio "
          f"{coeffs.beta_cmp / coeffs.beta_acc:.2f}), reference m_opt="
          f"{estimate_m_opt(stats, CostCoefficients.reference())}")
    assert abs(model - best) <= 2


# ---------------------------------------------------------------------------
# 6. updates

@pytest.mark.criterion(6, "hybrid answers equal a rebuild after the mixed script")
def test_mixed_script_matches_rebuild():
    spec = WorkloadSpec(n=100_000, seed=6)
    data = gen_intervals(spec)
    script = bench.MixedScript(queries=1000, inserts=500, deletes=100, seed=6)
    reports, hybrid, answers = bench.cmd_mixed(data, "hybrid", m=12, opts=ALL_OPTS, script=script,
                                               query_spec=spec)
    assert reports[0].inserts == 500 and reports[0].deletes == 100
    assert hybrid.delta.n > 0 and hybrid.flushes == 0

    # replay the stream with a plain live set, checking every answer
    preload, ops = bench.mixed_operations(data, script, spec)
    live = {int(i): (int(s), int(e)) for i, s, e in zip(preload.ids, preload.st, preload.end)}
    queries, k = [], 0
    checkpoints = set(range(0, len(ops), len(ops) // 10))
    for step, (op, arg) in enumerate(ops):
        if op == "i":
            live[int(arg.id)] = (int(arg.st), int(arg.end))
        elif op == "d":
            del live[arg]
        else:
            ids = np.fromiter(live, dtype=np.int64)
            ext = np.array(list(live.values()), dtype=np.int64)
            hit = (ext[:, 0] <= arg[1]) & (ext[:, 1] >= arg[0])
            assert np.array_equal(np.sort(answers[k]), np.sort(ids[hit])), step
            if step in checkpoints:
                rebuilt = HintMIndex.build(IntervalArray(ids, ext[:, 0], ext[:, 1]), m=12)
                assert np.array_equal(np.sort(rebuilt.range_query(arg)), np.sort(answers[k]))
            queries.append(arg)
            k += 1
    assert k == 1000

    # final state: hybrid vs a from-scratch rebuild on every script query
    queries = np.array(queries, dtype=np.int64)
    ids = np.fromiter(live, dtype=np.int64)
    ext = np.array(list(live.values()), dtype=np.int64)
    rebuilt = HintMIndex.build(IntervalArray(ids, ext[:, 0], ext[:, 1]), m=12)
    for q in queries:
        assert np.array_equal(np.sort(hybrid.range_query(q)), np.sort(rebuilt.range_query(q)))
    assert checksum(hybrid, queries) == checksum(rebuilt, queries)
    hybrid.flush_delta()
    assert checksum(hybrid, queries) == checksum(rebuilt, queries)


# ---------------------------------------------------------------------------
# 7. direction of the performance claims

@pytest.mark.criterion(7, "HINT^m >= 1.5x grid throughput; storage_opt saves >= 20%")
@pytest.mark.slow
def test_hintm_beats_grid(sweeps):
    hintm, grid = sweeps
    h, g = bench.best_of(hintm), bench.best_of(grid)
    print(f"best HINT^m {h.params} {h.qps_best:.0f} qps, best grid {g.params} {g.qps_best:.0f} qps")
    assert h.checksum == g.checksum
    assert h.qps_best >= 1.5 * g.qps_best


@pytest.mark.criterion(7, "HINT^m >= 1.5x grid throughput; storage_opt saves >= 20%")
@pytest.mark.slow
def test_storage_opt_saving(desk_workload, sweeps):
    _, data, _ = desk_workload
    best_m = int(bench.best_of(sweeps[0]).params.split(";")[0][2:])
    plain = HintMIndex.build(data, m=best_m, options=HintMOptions.parse("sorted,idscol,sparse")).nbytes
    opt = HintMIndex.build(data, m=best_m, options=HintMOptions.parse(ALL_OPTS)).nbytes
    saving = 1 - opt / plain
    print(f"m={best_m}: {plain} B -> {opt} B ({saving:.1%} smaller)")
    assert saving >= 0.20


# ---------------------------------------------------------------------------
# 8. sorting never costs comparisons

@pytest.mark.criterion(8, "sorted subdivisions need no more comparisons")
@pytest.mark.parametrize("m", [8, 12, 16])
def test_sorting_reduces_comparisons(desk_workload, m):
    _, data, queries = desk_workload
    unsorted = HintMIndex.build(data, m=m, options=HintMOptions.parse("sopt,idscol,sparse")).run_batch(queries)
    ordered = HintMIndex.build(data, m=m, options=HintMOptions.parse(ALL_OPTS)).run_batch(queries)
    print(f"m={m}: {unsorted['comparisons'].sum()} -> {ordered['comparisons'].sum()} comparisons")
    assert ordered["comparisons"].sum() <= unsorted["comparisons"].sum()
    assert combine_folds(ordered["folds"]) == combine_folds(unsorted["folds"])
