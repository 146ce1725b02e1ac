# %% [markdown]
# # Overlap queries with HINT^m
#
# Build an index over synthetic intervals, run a few queries and look at
# how much work each query needed.

# %%
import numpy as np

from hintindex import BruteForce, HintMIndex, WorkloadSpec, gen_intervals, gen_queries

spec = WorkloadSpec(n=100_000, query_count=1000, seed=1)
data = gen_intervals(spec)
print(len(data), "intervals, mean length", round(float(np.mean(data.end - data.st + 1))))

# %%
idx = HintMIndex.build(data, m=14)
s = idx.stats()
print("replication", round(s["replication"], 3), "bytes", idx.nbytes)

# %% [markdown]
# A single query returns the ids of every overlapping interval, each once.

# %%
q = (64_000_000, 64_050_000)
ids = idx.range_query(q)
print(len(ids), "results; stats:", idx.query_stats(q, trace=True))
assert np.array_equal(np.sort(ids), np.sort(BruteForce(data).range_query(q)))

# %% [markdown]
# Stabbing queries are ranges of length one.

# %%
print(len(idx.range_query((64_000_000, 64_000_000))), "intervals contain 64,000,000")

# %% [markdown]
# For throughput work, `run_batch` evaluates many queries in one compiled
# loop and returns per-query checksums, counts and comparison counters.

# %%
queries = gen_queries(spec, data)
res = idx.run_batch(queries)
print("mean results", res["counts"].mean(), "mean comparisons", res["comparisons"].mean(),
      "mean partitions compared", res["partitions_compared"].mean())
