"""Cost model for choosing ``m``, plus replication and selectivity estimates."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DatasetStats:
    n: int
    lambda_s: float  # mean interval length
    lambda_q: float  # mean query extent
    Lambda: float  # domain span
    m_prime: int  # raw-domain bit width

    def __post_init__(self):
        if self.n < 0 or self.lambda_s < 0 or self.lambda_q < 0 or self.Lambda < 0:
            raise ValueError("statistics must be non-negative")
        if self.Lambda and (self.lambda_s > self.Lambda or self.lambda_q > self.Lambda):
            raise ValueError("mean lengths cannot exceed the domain span")
        if self.m_prime < 1:
            raise ValueError("m_prime must be >= 1")

    @classmethod
    def from_data(cls, intervals, query_extent: float) -> "DatasetStats":
        from .core import as_interval_array
        arr = as_interval_array(intervals)
        span = int(arr.end.max() - arr.st.min()) if len(arr) else 0
        mean_len = float(np.mean(arr.end - arr.st)) if len(arr) else 0.0
        return cls(len(arr), mean_len, float(query_extent), float(span),
                   max(1, span.bit_length()))


@dataclass(frozen=True)
class CostCoefficients:
    beta_cmp: float  # seconds per endpoint comparison
    beta_acc: float  # seconds per comparison-free result

    def __post_init__(self):
        if self.beta_cmp < 0 or self.beta_acc < 0:
            raise ValueError("cost coefficients must be non-negative")

    @classmethod
    def reference(cls) -> "CostCoefficients":
        """Machine-neutral defaults: a comparison costs 3.05 result accesses.

        With this ratio the model picks m = 9, 9, 16, 16 for statistics
        shaped like the BOOKS, WEBKIT, TAXIS and GREEND collections.
        """
        return cls(beta_cmp=3.05e-9, beta_acc=1e-9)


def estimate_result_size(stats: DatasetStats) -> float:
    """Expected results per query, ``n * (lambda_s + lambda_q) / Lambda``."""
    if stats.Lambda == 0:
        raise ValueError("domain span is zero")
    return stats.n * (stats.lambda_s + stats.lambda_q) / stats.Lambda


def estimate_query_cost(stats: DatasetStats, coeffs: CostCoefficients, m: int) -> float:
    """Modelled seconds per query for an index with ``m`` levels.

    Comparisons are charged for the two bottom partitions the query
    touches; every other result is an access. The access term is floored
    at zero.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    per_partition = stats.n / 2 ** m
    c_cmp = coeffs.beta_cmp * per_partition
    c_acc = coeffs.beta_acc * max(0.0, estimate_result_size(stats) - 2 * per_partition)
    return c_cmp + c_acc


def cost_curve(stats: DatasetStats, coeffs: CostCoefficients) -> np.ndarray:
    """``estimate_query_cost`` for ``m = 1 .. m_prime``."""
    return np.array([estimate_query_cost(stats, coeffs, m) for m in range(1, stats.m_prime + 1)])


def estimate_m_opt(stats: DatasetStats, coeffs: CostCoefficients | None = None,
                   tolerance: float = 0.03) -> int:
    """Smallest ``m`` from which the modelled cost stays within ``tolerance``
    of the cost at ``m = m_prime``."""
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    coeffs = coeffs or CostCoefficients.reference()
    curve = cost_curve(stats, coeffs)
    target = curve[-1]
    band = tolerance * target
    within = np.abs(curve - target) <= band
    # first m after which every larger m is also inside the band
    outside = np.flatnonzero(~within)
    return int(outside[-1] + 2) if len(outside) else 1


def predict_replication(lambda_s: float, m_prime: int, m: int) -> float:
    """Expected partitions per interval, ``log2(2^(log2 lambda - m' + m) + 1)``.

    Lengths below one unit count as one unit, and the result is never
    below 1 since every interval is stored at least once.
    """
    lam = max(float(lambda_s), 1.0)
    k = math.log2(2.0 ** (math.log2(lam) - m_prime + m) + 1.0)
    return max(k, 1.0)


def calibrate_betas(sample_size: int = 1_000_000, repeats: int = 5) -> CostCoefficients:
    """Time a tight comparison loop and a tight id-copy loop.

    Returns the best-of-``repeats`` per-element seconds for each. No
    ordering between the two is assumed.
    """
    if sample_size <= 0:
        raise ValueError("sample_size must be positive")
    from ._calibrate import access_loop, compare_loop

    rng = np.random.default_rng(0)
    vals = rng.integers(0, 1 << 40, sample_size).astype(np.int64)
    ids = np.arange(sample_size, dtype=np.int64)
    out = np.empty(sample_size, dtype=np.int64)
    pivot = int(np.median(vals))
    compare_loop(vals, ids, pivot, out)
    access_loop(ids, out)
    t_cmp = t_acc = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        compare_loop(vals, ids, pivot, out)
        t1 = time.perf_counter()
        access_loop(ids, out)
        t2 = time.perf_counter()
        t_cmp = min(t_cmp, t1 - t0)
        t_acc = min(t_acc, t2 - t1)
    # timer granularity floor keeps both strictly positive
    return CostCoefficients(max(t_cmp, 1e-9) / sample_size, max(t_acc, 1e-9) / sample_size)
