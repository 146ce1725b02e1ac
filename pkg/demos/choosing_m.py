# %% [markdown]
# # Choosing the number of levels
#
# The cost model picks the smallest m whose modelled query cost is within
# 3% of the comparison-free cost. Here we compare its choice against a
# small throughput sweep.

# %%
from hintindex import (CostCoefficients, DatasetStats, WorkloadSpec, calibrate_betas,
                       estimate_m_opt, gen_intervals, gen_queries, predict_replication)
from hintindex import bench

spec = WorkloadSpec(n=100_000, query_count=1000, seed=2)
data = gen_intervals(spec)
queries = gen_queries(spec, data)
stats = DatasetStats.from_data(data, spec.query_extent_pct * spec.domain_len)
print(stats)

# %%
coeffs = calibrate_betas()
print("calibrated cmp/acc ratio %.2f" % (coeffs.beta_cmp / coeffs.beta_acc))
print("m_opt calibrated:", estimate_m_opt(stats, coeffs))
print("m_opt reference: ", estimate_m_opt(stats, CostCoefficients.reference()))

# %% [markdown]
# The sweep times each m. The model assumes uniformly spread data. This
# workload is concentrated around the domain centre, so the measured best m
# tends to sit a few levels above the model's choice, on a flat plateau.
# The replication model uses the mean length, which the Zipf tail inflates
# well above the typical interval, so it overestimates here.

# %%
rows = bench.cmd_sweep(data, queries, "hintm", [{"m": m} for m in range(8, 21, 2)], repeats=3)
for r in rows:
    m = int(r.params.split(";")[0][2:])
    print(f"m={m:2d} {r.qps_best:9.0f} qps  replication {r.replication:.2f}"
          f"  (model {predict_replication(stats.lambda_s, stats.m_prime, m):.2f})")
print("best:", bench.best_of(rows).params)
