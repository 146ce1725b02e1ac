import numpy as np
import pytest

from hintindex import HintMIndex, WorkloadSpec, gen_intervals, gen_queries
from hintindex import bench
from hintindex.cli import main

SPEC = WorkloadSpec(domain_len=1 << 20, n=5000, sigma=1 << 17, query_count=200, seed=3)


@pytest.fixture(scope="module")
def data():
    arr = gen_intervals(SPEC)
    return arr, gen_queries(SPEC, arr)


def test_checksums_equal_across_kinds(data):
    arr, q = data
    reps = [bench.cmd_query(arr, q, k, m=20 if k == "hint" else 10, p=200)
            for k in ("brute", "grid", "hint", "hintm", "hybrid")]
    assert len({r.checksum for r in reps}) == 1
    bench.check_checksums(reps)
    reps[1].checksum = "0"
    with pytest.raises(bench.ChecksumMismatch):
        bench.check_checksums(reps)


def test_zero_queries_is_an_error(data):
    arr, _ = data
    with pytest.raises(ValueError):
        bench.cmd_query(arr, np.zeros((0, 2)), "hintm")


def test_repeats_best_and_mean(data):
    arr, q = data
    r = bench.cmd_query(arr, q, "hintm", m=10, repeats=3)
    assert r.qps_best >= r.qps_mean > 0


def test_build_report_and_snapshot(tmp_path, data):
    arr, _ = data
    a = bench.cmd_build(arr, "hintm", m=10, save=tmp_path / "a.bin")
    b = bench.cmd_build(arr, "hintm", m=10, save=tmp_path / "b.bin")
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    assert a.index_bytes == b.index_bytes > 0


def test_storage_opt_shrinks_index(data):
    arr, _ = data
    full = bench.cmd_build(arr, "hintm", m=10, opts="sorted,idscol,sparse").index_bytes
    slim = bench.cmd_build(arr, "hintm", m=10, opts="sorted,sopt,idscol,sparse").index_bytes
    assert slim < full


def test_mixed_matches_rebuild(data):
    arr, _ = data
    script = bench.MixedScript(queries=200, inserts=300, deletes=100, seed=1)
    reps, idx, answers = bench.cmd_mixed(arr, "hybrid", m=10, script=script, query_spec=SPEC)
    assert reps[0].queries == 200 and reps[0].inserts == 300 and reps[0].deletes == 100
    rebuilt = HintMIndex.build(idx.live_intervals(), m=10)
    q = gen_queries(SPEC, arr)
    assert np.array_equal(idx.run_batch(q)["folds"], rebuilt.run_batch(q)["folds"])
    # the updatable variant sees the same stream and answers identically
    reps2, _, answers2 = bench.cmd_mixed(arr, "updatable", m=10, script=script, query_spec=SPEC)
    assert reps2[0].checksum == reps[0].checksum


def test_mixed_empty_script(data):
    arr, _ = data
    reps, idx, answers = bench.cmd_mixed(arr, "hybrid", script=bench.MixedScript(0, 0, 0, 0))
    assert reps == [] and answers == []
    with pytest.raises(ValueError):
        bench.cmd_mixed(arr, "hintm")


def test_sweep_rows_and_csv(tmp_path, data):
    arr, q = data
    out = tmp_path / "s.csv"
    rows = bench.cmd_sweep(arr, q, "hintm", [{"m": m} for m in (6, 8, 10)], repeats=1, out=out)
    assert [r.params.split(";")[0] for r in rows] == ["m=6", "m=8", "m=10"]
    back = bench.read_reports(out)
    assert [r.params for r in back] == [r.params for r in rows]
    assert back[0].checksum == rows[0].checksum
    # append keeps one header
    bench.write_reports(rows[:1], out)
    text = out.read_text().splitlines()
    assert text[0] == bench.SCHEMA_LINE and sum(l.startswith("command,") for l in text) == 1
    assert len(bench.read_reports(out)) == 4


def test_empty_sweep_header_only(tmp_path, data):
    arr, q = data
    out = tmp_path / "e.csv"
    assert bench.cmd_sweep(arr, q, "hintm", [], out=out) == []
    lines = out.read_text().splitlines()
    assert lines == [bench.SCHEMA_LINE, ",".join(bench.BenchReport.columns())]


def test_schema_mismatch_refuses_append(tmp_path):
    out = tmp_path / "x.csv"
    out.write_text("something else\n")
    with pytest.raises(ValueError):
        bench.write_reports([], out)


def test_cli_gen_query_and_exit_codes(tmp_path, capsys):
    d, q, out = tmp_path / "d.tsv", tmp_path / "q.tsv", tmp_path / "r.csv"
    assert main(["gen", "--n", "2000", "--domain", "100000", "--sigma", "10000",
                 "--query-count", "50", "--dataset", str(d), "--queries", str(q)]) == 0
    rc = main(["query", "--dataset", str(d), "--queries", str(q), "--index", "brute,grid,hintm",
               "--m", "8", "--p", "50", "--repeats", "1", "--out", str(out)])
    assert rc == 0
    assert len(bench.read_reports(out)) == 3
    assert main(["query", "--dataset", str(d), "--queries", str(q), "--index", "nope"]) == 1
    assert main(["query", "--dataset", str(tmp_path / "missing.tsv")]) == 1
    empty = tmp_path / "none.tsv"
    empty.write_text("")
    assert main(["query", "--dataset", str(d), "--queries", str(empty), "--index", "brute"]) == 1


def test_cli_mismatch_exit_code(tmp_path, monkeypatch):
    d, q = tmp_path / "d.tsv", tmp_path / "q.tsv"
    main(["gen", "--n", "500", "--domain", "10000", "--sigma", "1000", "--query-count", "20",
          "--dataset", str(d), "--queries", str(q)])
    real = bench.time_queries
    calls = []

    def corrupt(index, queries, repeats=3):
        res = real(index, queries, repeats)
        calls.append(1)
        if len(calls) == 2:
            res["checksum"] = "deadbeef"
        return res

    monkeypatch.setattr(bench, "time_queries", corrupt)
    rc = main(["query", "--dataset", str(d), "--queries", str(q), "--index", "brute,hintm",
               "--m", "6", "--repeats", "1"])
    assert rc == 2


def test_cli_build_mixed_sweep(tmp_path):
    d, q = tmp_path / "d.tsv", tmp_path / "q.tsv"
    main(["gen", "--n", "3000", "--domain", "100000", "--sigma", "10000", "--query-count", "30",
          "--dataset", str(d), "--queries", str(q)])
    snap = tmp_path / "i.bin"
    assert main(["build", "--dataset", str(d), "--index", "hintm", "--m", "8", "--save", str(snap)]) == 0
    assert snap.read_bytes()[:6] == b"HINTM1"
    assert main(["mixed", "--dataset", str(d), "--index", "hybrid,updatable", "--m", "8",
                 "--mix-queries", "50", "--mix-inserts", "100", "--mix-deletes", "20",
                 "--flush"]) == 0
    out = tmp_path / "s.csv"
    assert main(["sweep", "--dataset", str(d), "--queries", str(q), "--index", "grid",
                 "--p", "10,100", "--repeats", "1", "--out", str(out)]) == 0
    assert [r.params for r in bench.read_reports(out)] == ["p=10", "p=100"]
