"""In-memory hierarchical interval indexes for overlap and stabbing queries.

``HintIndex`` is the comparison-free index over a small discrete domain,
``HintMIndex`` the general bulk-loaded index over arbitrary integer
endpoints, ``HybridIndex`` adds inserts and deletes on top of it.
``BruteForce`` and ``Grid1D`` are the baselines.
"""

from ._search import combine_folds, fold_result
from .baselines import BruteForce, Grid1D, brute_force_query
from .core import (DomainMapper, DuplicateIdError, HintError, Interval, IntervalArray,
                   OutOfDomainError, QueryRange, UnknownIdError, prefix)
from .hint import HintIndex, PartitionAddress, assign_partitions
from .hintm import HintMIndex, HintMOptions
from .serialize import dumps, load_index, loads, save_index
from .tuning import (CostCoefficients, DatasetStats, calibrate_betas, estimate_m_opt,
                     estimate_query_cost, estimate_result_size, predict_replication)
from .updates import HybridIndex, UpdatableHintMIndex
from .workload import (WorkloadSpec, gen_intervals, gen_queries, load_dataset, load_queries,
                       save_dataset, save_queries)

__version__ = "0.1.0"

__all__ = [
    "BruteForce", "CostCoefficients", "DatasetStats", "DomainMapper", "DuplicateIdError",
    "Grid1D", "HintError", "HintIndex", "HintMIndex", "HintMOptions", "HybridIndex",
    "Interval", "IntervalArray", "OutOfDomainError", "PartitionAddress", "QueryRange",
    "UnknownIdError", "UpdatableHintMIndex", "WorkloadSpec", "assign_partitions",
    "brute_force_query", "calibrate_betas", "combine_folds", "dumps", "estimate_m_opt",
    "estimate_query_cost", "estimate_result_size", "fold_result", "gen_intervals",
    "gen_queries", "load_dataset", "load_index", "load_queries", "loads", "predict_replication",
    "prefix", "save_dataset", "save_index", "save_queries",
]
