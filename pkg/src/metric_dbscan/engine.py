"""Core/border/outlier classification and density-reachable cluster joining.

The accelerated path answers each range query against a candidate set pulled
from the coarse partition (own-ball neighbors plus nearby balls plus the
uncovered points); the brute-force path scans everything.  Both share the
same labeling and joining code, so they can only differ if a candidate set
ever misses a true neighbor — which the partition geometry rules out.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import metrics
from .partition import CoarsePartition

CORE = 2
BORDER = 1
OUTLIER = 0
LABEL_NAMES = {CORE: "core", BORDER: "border", OUTLIER: "outlier"}
NOISE = -1


@dataclass
class DbscanParams:
    epsilon: float
    min_pts: int

    def validate(self) -> None:
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive finite real, got %r" % (self.epsilon,))
        if not (isinstance(self.min_pts, (int, np.integer)) and self.min_pts >= 1):
            raise ValueError("min_pts must be an integer >= 1, got %r" % (self.min_pts,))


@dataclass
class LabelSet:
    """Per-point labels plus the data needed to join clusters afterwards.

    neighborhood_sizes[p] counts p itself.  core_neighborhoods maps each core
    point to its epsilon-neighbors (self excluded, ascending); only cores are
    retained, which is all the joining step needs.
    """

    labels: np.ndarray              # int8[n] of CORE/BORDER/OUTLIER
    neighborhood_sizes: np.ndarray  # int64[n]
    core_neighborhoods: dict


@dataclass
class Clustering:
    cluster_ids: np.ndarray  # int64[n], NOISE for unclustered
    cluster_count: int


@dataclass
class QueryStats:
    """candidate_sizes[p] = candidates examined for p's query, self excluded
    (n-1 for a full scan); their sum equals total_evals exactly."""

    candidate_sizes: np.ndarray
    total_evals: int


def candidate_set(partition: CoarsePartition, p: int, epsilon: float) -> np.ndarray:
    """Superset of p's epsilon-neighborhood, from stored distances only.

    Takes the members of every center-ball within 2*cover_radius + epsilon
    of p's own center, plus all uncovered points.  No distance evaluations.
    """
    ordinal = int(partition.nearest_center[p])
    if partition.nearest_dist[p] > partition.cover_radius:
        raise ValueError("point %d is uncovered; run a full scan instead" % p)
    return _ball_candidates(partition, ordinal, epsilon)


def _ball_candidates(partition: CoarsePartition, ordinal: int, epsilon: float) -> np.ndarray:
    reach = 2.0 * partition.cover_radius + epsilon
    near = np.flatnonzero(partition.center_dists[ordinal] <= reach)
    chunks = [partition.members[int(t)] for t in near]
    chunks.append(partition.uncovered)
    return np.sort(np.concatenate(chunks))


def epsilon_neighborhood(dataset: metrics.Dataset, oracle: metrics.DistanceOracle,
                         candidates, p: int, epsilon: float) -> np.ndarray:
    """{q in candidates : d(p,q) <= epsilon} plus p itself, ascending.

    Exact for the full dataset provided candidates ⊇ the true neighborhood.
    """
    ids = np.asarray(sorted(candidates) if isinstance(candidates, (set, frozenset))
                     else candidates, dtype=np.int64)
    d = oracle.subset(p, ids)
    inside = ids[(d <= epsilon) & (ids != p)]
    return np.sort(np.append(inside, np.int64(p)))


def _scan_all(dataset, oracle, params, ids_for_point, workers):
    """Label every point by querying it against its candidate ids.

    ids_for_point(p) must include p and be a superset of p's true
    neighborhood.  Returns (LabelSet, QueryStats); evaluation tallies are
    accumulated per worker chunk and merged into the oracle counter once, in
    chunk order, so the count is identical for any worker count.
    """
    n = dataset.n
    eps = params.epsilon
    counts = np.zeros(n, dtype=np.int64)
    csizes = np.zeros(n, dtype=np.int64)
    neigh: list = [None] * n

    def run_chunk(lo: int, hi: int) -> int:
        tally = 0
        for p in range(lo, hi):
            ids = ids_for_point(p)
            d, k = oracle.subset_nocount(p, ids)
            tally += k
            csizes[p] = k
            inside = ids[(d <= eps) & (ids != p)]
            counts[p] = inside.size + 1
            if counts[p] >= params.min_pts:
                neigh[p] = inside
        return tally

    if workers <= 1:
        total = run_chunk(0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(run_chunk, int(lo), int(hi))
                    for lo, hi in zip(bounds[:-1], bounds[1:])]
            total = sum(f.result() for f in futs)
    oracle.add_evals(total)

    core_mask = counts >= params.min_pts
    labels = np.full(n, OUTLIER, dtype=np.int8)
    labels[core_mask] = CORE
    core_neigh = {}
    for p in np.flatnonzero(core_mask):
        nb = neigh[p]
        core_neigh[int(p)] = nb
        stragglers = nb[~core_mask[nb]]
        labels[stragglers] = BORDER
    return (LabelSet(labels, counts, core_neigh),
            QueryStats(candidate_sizes=csizes, total_evals=int(total)))


def classify(dataset: metrics.Dataset, oracle: metrics.DistanceOracle,
             partition: CoarsePartition, params: DbscanParams,
             workers: int = 1):
    """Label all points using candidate sets from the coarse partition.

    Uncovered points fall back to full scans.  Candidate arrays are built
    once per center ball and shared by all points assigned to it.
    """
    params.validate()
    uncovered_mask = np.zeros(dataset.n, dtype=bool)
    uncovered_mask[partition.uncovered] = True
    used = np.unique(partition.nearest_center[~uncovered_mask])
    per_ball = {int(t): _ball_candidates(partition, int(t), params.epsilon) for t in used}
    all_ids = np.arange(dataset.n, dtype=np.int64)

    def ids_for_point(p: int) -> np.ndarray:
        if uncovered_mask[p]:
            return all_ids
        return per_ball[int(partition.nearest_center[p])]

    return _scan_all(dataset, oracle, params, ids_for_point, workers)


def build_clusters(labels: LabelSet, core_neighborhoods, n: int) -> Clustering:
    """Connected components of the core graph, with borders tagging along.

    Breadth-first from each unvisited core in ascending id order; cluster ids
    count up from 0 in discovery order.  A border point keeps the id of the
    first cluster to reach it.
    """
    cluster = np.full(n, NOISE, dtype=np.int64)
    core_mask = labels.labels == CORE
    cid = 0
    for seed in np.flatnonzero(core_mask):
        if cluster[seed] != NOISE:
            continue
        cluster[seed] = cid
        queue = deque([int(seed)])
        while queue:
            q = queue.popleft()
            nb = core_neighborhoods[q]
            fresh = nb[cluster[nb] == NOISE]
            if fresh.size:
                cluster[fresh] = cid
                queue.extend(fresh[core_mask[fresh]].tolist())
        cid += 1
    return Clustering(cluster_ids=cluster, cluster_count=cid)


def brute_force_dbscan(dataset: metrics.Dataset, oracle: metrics.DistanceOracle,
                       params: DbscanParams, workers: int = 1):
    """Reference DBSCAN: full scans for every point, then the shared joining."""
    params.validate()
    all_ids = np.arange(dataset.n, dtype=np.int64)
    labels, _ = _scan_all(dataset, oracle, params, lambda p: all_ids, workers)
    clustering = build_clusters(labels, labels.core_neighborhoods, dataset.n)
    return labels, clustering


def check_equivalence(dataset, oracle, params,
                      got_labels: LabelSet, got_clust: Clustering,
                      want_labels: LabelSet, want_clust: Clustering):
    """First discrepancy between an accelerated result and the oracle, or None.

    Labels and neighborhood sizes must match exactly; core points must induce
    a cluster-id bijection; every border's assigned cluster must actually
    hold a core within epsilon of it.  Distances drawn here bypass the
    evaluation counter (verification cost is not benchmark cost).
    """
    n = dataset.n
    for p in range(n):
        if got_labels.labels[p] != want_labels.labels[p]:
            return ("point %d: label %s vs oracle %s"
                    % (p, LABEL_NAMES[int(got_labels.labels[p])],
                       LABEL_NAMES[int(want_labels.labels[p])]))
        if got_labels.neighborhood_sizes[p] != want_labels.neighborhood_sizes[p]:
            return ("point %d: neighborhood size %d vs oracle %d"
                    % (p, got_labels.neighborhood_sizes[p],
                       want_labels.neighborhood_sizes[p]))
    fwd: dict = {}
    rev: dict = {}
    for p in np.flatnonzero(got_labels.labels == CORE):
        a, b = int(got_clust.cluster_ids[p]), int(want_clust.cluster_ids[p])
        if fwd.setdefault(a, b) != b or rev.setdefault(b, a) != a:
            return "core point %d breaks the cluster-id bijection" % p
    for p in np.flatnonzero(got_labels.labels == BORDER):
        cid = int(got_clust.cluster_ids[p])
        if cid == NOISE:
            return "border point %d has no cluster" % p
        cores = np.flatnonzero((got_labels.labels == CORE) & (got_clust.cluster_ids == cid))
        d, _ = oracle.subset_nocount(p, cores)
        if not (d <= params.epsilon).any():
            return "border point %d: no core of its cluster %d within epsilon" % (p, cid)
    for p in np.flatnonzero(got_labels.labels == OUTLIER):
        if got_clust.cluster_ids[p] != NOISE:
            return "outlier point %d carries cluster id %d" % (p, got_clust.cluster_ids[p])
    return None
