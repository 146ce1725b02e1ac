# %% [markdown]
# # Inserts and deletes
#
# The optimised index is bulk-loaded. `HybridIndex` puts inserts into a
# small delta index and records deletions as tombstones; `flush_delta`
# folds everything back into a fresh main index.

# %%
import numpy as np

from hintindex import HybridIndex, Interval, WorkloadSpec, gen_intervals, load_index, save_index

data = gen_intervals(WorkloadSpec(n=50_000, seed=3))
idx = HybridIndex.build(data[:45_000], m=12)

q = (63_000_000, 65_000_000)
before = len(idx.range_query(q))

# %%
for s in data[45_000:46_000]:
    idx.insert(s)
idx.insert(Interval(10**9, 64_000_000, 64_000_010))
idx.delete(0)
print("results before", before, "after", len(idx.range_query(q)))
print(idx.stats())

# %% [markdown]
# Snapshots keep the delta and the tombstones.

# %%
import os
import tempfile

path = os.path.join(tempfile.mkdtemp(), "hybrid.bin")
print("wrote", save_index(idx, path), "bytes")
back = load_index(path)
assert np.array_equal(np.sort(back.range_query(q)), np.sort(idx.range_query(q)))

# %%
idx.flush_delta()
print("after flush:", idx.stats())
