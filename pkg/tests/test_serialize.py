import numpy as np
import pytest

from hintindex import (BruteForce, Grid1D, HintIndex, HintMIndex, HintMOptions, HybridIndex,
                       dumps, load_index, loads, save_index)
from hintindex.serialize import MAGIC, FormatError

from conftest import random_intervals, random_queries


def _indexes(arr):
    yield HintIndex.build(arr, 14)
    yield HintIndex.build(arr, 14, sparse=False)
    for opts in ("sorted,sopt,idscol,sparse", "", "sorted,idscol"):
        yield HintMIndex.build(arr, m=9, options=HintMOptions.parse(opts))
    yield Grid1D.build(arr, 37)
    yield BruteForce(arr)


def test_round_trip_all_kinds(rng):
    arr = random_intervals(rng, 800, 1 << 14, id_space=10**9)
    q = random_queries(rng, 100, 1 << 14, overhang=20)
    for idx in _indexes(arr):
        data = dumps(idx)
        assert data[:6] == MAGIC
        back = loads(data)
        assert type(back) is type(idx)
        assert np.array_equal(back.run_batch(q)["folds"], idx.run_batch(q)["folds"])
        assert dumps(back) == data


def test_deterministic_bytes(rng):
    arr = random_intervals(rng, 500, 1 << 12)
    assert dumps(HintMIndex.build(arr, m=8)) == dumps(HintMIndex.build(arr, m=8))


def test_tombstones_and_hybrid_survive(tmp_path, rng):
    arr = random_intervals(rng, 600, 1 << 12)
    h = HybridIndex.build(arr[:500], m=8, merge_threshold=None)
    for s in arr[500:]:
        h.insert(s)
    h.delete(int(arr.ids[3]))
    h.delete(int(arr.ids[550]))
    path = tmp_path / "h.bin"
    size = save_index(h, path)
    assert size == path.stat().st_size
    back = load_index(path)
    q = random_queries(rng, 100, 1 << 12)
    assert np.array_equal(back.run_batch(q)["folds"], h.run_batch(q)["folds"])
    assert back.main.tombstones == h.main.tombstones
    assert back.delta.tombstones == h.delta.tombstones


def test_bad_input(rng):
    data = dumps(HintMIndex.build(random_intervals(rng, 50, 1000), m=5))
    with pytest.raises(FormatError):
        loads(b"NOTIDX" + data[6:])
    with pytest.raises(FormatError):
        loads(data[:-3])
    with pytest.raises(FormatError):
        loads(data + b"\0")
    with pytest.raises(TypeError):
        dumps(object())
