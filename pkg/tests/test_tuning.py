import math

import numpy as np
import pytest

from hintindex import (CostCoefficients, DatasetStats, HintMIndex, IntervalArray, calibrate_betas,
                       estimate_m_opt, estimate_query_cost, estimate_result_size,
                       predict_replication)
from hintindex.tuning import cost_curve

from conftest import overlap_oracle


def stats_like(n, Lambda, lambda_s, m_prime):
    return DatasetStats(n=n, lambda_s=lambda_s, lambda_q=0.001 * Lambda, Lambda=Lambda,
                        m_prime=m_prime)


BOOKS = stats_like(2_312_602, 31_507_200, 2_201_320, 25)
WEBKIT = stats_like(2_347_346, 461_829_284, 33_206_300, 29)
TAXIS = stats_like(172_668_003, 31_768_287, 758, 25)
GREEND = stats_like(110_115_441, 283_356_410, 15, 29)


def test_result_size_formula():
    assert estimate_result_size(DatasetStats(1000, 10, 10, 1000, 10)) == 20.0
    assert estimate_result_size(DatasetStats(10_000_000, 0, 0, 1000, 10)) == 0.0
    with pytest.raises(ValueError):
        estimate_result_size(DatasetStats(10, 0, 0, 0, 1))


def test_result_size_matches_uniform_data():
    rng = np.random.default_rng(5)
    L, n, ls, lq = 1_000_000, 20_000, 2000, 1000
    st = rng.integers(0, L - ls, n)
    arr = IntervalArray(np.arange(n), st, st + ls)
    qs = rng.integers(0, L - lq, 2000)
    measured = np.mean([len(overlap_oracle(arr, a, a + lq)) for a in qs.tolist()])
    est = estimate_result_size(DatasetStats(n, ls, lq, L, 20))
    assert abs(measured - est) <= 0.3 * est


def test_stats_validation():
    with pytest.raises(ValueError):
        DatasetStats(10, 20, 1, 10, 4)
    with pytest.raises(ValueError):
        DatasetStats(-1, 0, 0, 10, 4)
    with pytest.raises(ValueError):
        CostCoefficients(-1.0, 1.0)


def test_cost_edge_cases():
    c = CostCoefficients(2.0, 1.0)
    s = DatasetStats(1 << 10, 0, 0, 1 << 20, 20)
    # n = 2^m: one interval per bottom partition, access term floors at zero
    assert estimate_query_cost(s, c, 10) == 2.0
    with pytest.raises(ValueError):
        estimate_query_cost(s, c, 0)
    big = DatasetStats(1 << 10, 1 << 10, 1 << 10, 1 << 20, 20)
    limit = c.beta_acc * estimate_result_size(big)
    assert estimate_query_cost(big, c, 20) == pytest.approx(limit, rel=1e-2)


@pytest.mark.parametrize("stats", [BOOKS, WEBKIT, TAXIS, GREEND])
def test_cost_curve_non_increasing(stats):
    curve = cost_curve(stats, CostCoefficients.reference())
    assert np.all(np.diff(curve) <= 1e-15)


@pytest.mark.parametrize("stats,expected", [(BOOKS, 9), (WEBKIT, 9), (TAXIS, 16), (GREEND, 16)],
                         ids=["books", "webkit", "taxis", "greend"])
def test_m_opt_real_dataset_statistics(stats, expected):
    assert estimate_m_opt(stats) == expected


def test_m_opt_only_comparisons_cost():
    assert estimate_m_opt(BOOKS, CostCoefficients(1e-9, 0.0)) == BOOKS.m_prime


def test_m_opt_bad_tolerance():
    with pytest.raises(ValueError):
        estimate_m_opt(BOOKS, tolerance=0)


def test_predict_replication_examples():
    assert predict_replication(2.2e6, 25, 10) == pytest.approx(6.09, abs=0.01)
    assert predict_replication(15, 29, 17) == 1.0
    assert predict_replication(2 ** 15, 25, 10) == 1.0
    assert predict_replication(0, 25, 10) == 1.0


def test_predict_replication_monotone():
    ks = [predict_replication(1e5, 30, m) for m in range(10, 30)]
    # flat at the floor of 1, strictly increasing above it
    assert all(b > a or b == a == 1.0 for a, b in zip(ks, ks[1:]))
    assert ks[-1] > 1
    ks = [predict_replication(lam, 30, 20) for lam in (1e3, 1e4, 1e5, 1e6)]
    assert all(b > a for a, b in zip(ks, ks[1:]))


def test_measured_replication_tracks_prediction():
    rng = np.random.default_rng(9)
    L, n, lam = 1 << 24, 20_000, 1 << 14
    st = rng.integers(0, L - lam, n)
    arr = IntervalArray(np.arange(n), st, st + lam - 1)
    for m in (8, 12, 16):
        k = HintMIndex.build(arr, m=m).stats()["replication"]
        assert 0.5 <= k / predict_replication(lam, 24, m) <= 2.0


def test_calibrate_betas():
    c = calibrate_betas(sample_size=200_000, repeats=3)
    assert c.beta_cmp > 0 and c.beta_acc > 0
    c2 = calibrate_betas(sample_size=200_000, repeats=3)
    assert 1 / 3 < c.beta_cmp / c2.beta_cmp < 3
    assert 1 / 3 < c.beta_acc / c2.beta_acc < 3
    with pytest.raises(ValueError):
        calibrate_betas(0)
