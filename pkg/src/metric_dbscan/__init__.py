"""Exact metric DBSCAN with randomized k-center range-query acceleration."""

from ._kernels import ACTIVE_BACKEND
from .data_io import (ParseError, SyntheticSpec, generate_synthetic, load_points,
                      save_clustering, save_points)
from .engine import (BORDER, CORE, NOISE, OUTLIER, Clustering, DbscanParams,
                     LabelSet, QueryStats, brute_force_dbscan, build_clusters,
                     candidate_set, check_equivalence, classify,
                     epsilon_neighborhood)
from .metrics import (METRICS, Dataset, DistanceOracle, distance,
                      estimate_diameter, set_distance)
from .partition import (Batch, CoarsePartition, GonzalezParams,
                        build_coarse_partition, farthest_q, filtration_mis,
                        run_fixed_rounds, sample_initial_batch)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND", "BORDER", "Batch", "CORE", "Clustering", "CoarsePartition",
    "Dataset", "DbscanParams", "DistanceOracle", "GonzalezParams", "LabelSet",
    "METRICS", "NOISE", "OUTLIER", "ParseError", "QueryStats", "SyntheticSpec",
    "brute_force_dbscan", "build_clusters", "build_coarse_partition",
    "candidate_set", "check_equivalence", "classify", "distance",
    "epsilon_neighborhood", "estimate_diameter", "farthest_q", "filtration_mis",
    "generate_synthetic", "load_points", "run_fixed_rounds",
    "sample_initial_batch", "save_clustering", "save_points", "set_distance",
]
