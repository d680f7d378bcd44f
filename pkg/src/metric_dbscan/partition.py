"""Randomized farthest-point center sampling and the coarse partition.

Builds the center set E batch by batch: an initial uniform sample, then each
round samples from the points currently farthest from E.  The loop stops once
even the farthest batch of points sits within the cover radius of E, leaving
at most a bounded set of uncovered points.  The second variant thins every
batch to points pairwise >= r apart before adding it, which keeps |E| small
at the cost of a doubled cover radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics


@dataclass
class GonzalezParams:
    """Knobs for the center sampler.

    r is the target radius and stopping threshold; z_tilde the assumed upper
    bound on the outlier count; delta widens the far-point pool to
    (1+delta)*z_tilde; eta is the per-round sampling failure probability.
    """

    r: float
    z_tilde: int
    delta: float = 1.0
    eta: float = 0.1
    variant: str = "metric1"
    seed: int = 0
    max_rounds: int | None = None

    def validate(self, n: int) -> None:
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError("r must be a positive finite real, got %r" % (self.r,))
        if not (isinstance(self.z_tilde, (int, np.integer)) and 0 < self.z_tilde < n):
            raise ValueError("z_tilde must be an integer in (0, n=%d), got %r" % (n, self.z_tilde))
        if not self.delta > 0:
            raise ValueError("delta must be positive, got %r" % (self.delta,))
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1), got %r" % (self.eta,))
        if self.variant not in ("metric1", "metric2"):
            raise ValueError("variant must be metric1 or metric2, got %r" % (self.variant,))
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be positive when given")
        if self.q_size(n) > n:
            raise ValueError(
                "q_size = ceil((1+delta)*z_tilde) = %d exceeds n = %d" % (self.q_size(n), n)
            )

    def initial_batch_size(self, n: int) -> int:
        gamma = self.z_tilde / n
        return min(n, math.ceil(math.log(1.0 / self.eta) / (1.0 - gamma)))

    def round_batch_size(self) -> int:
        return math.ceil((1.0 + self.delta) / self.delta * math.log(1.0 / self.eta))

    def q_size(self, n: int) -> int:
        return math.ceil((1.0 + self.delta) * self.z_tilde)

    def cover_radius(self) -> float:
        # Doubles under metric2: filtration may drop the sampled point that
        # would have covered its neighborhood, leaving a kept point within r
        # of the dropped one to cover it at 2r.
        return self.r if self.variant == "metric1" else 2.0 * self.r

    def resolved_max_rounds(self, n: int) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        return 10 * (1 + math.ceil(n / self.z_tilde))


@dataclass
class Batch:
    """One round's additions to E, in the order they were drawn."""

    round: int
    members: np.ndarray  # int64 point ids, post-filtration under metric2


@dataclass
class CoarsePartition:
    """Output of the center-sampling phase, consumed by the range queries.

    nearest_center holds ordinals into ``centers`` (not point ids);
    nearest_dist the distance to that center.  Points farther than
    cover_radius from every center make up ``uncovered``.
    """

    centers: np.ndarray                 # int64 point ids, in insertion order
    batches: list = field(default_factory=list)
    center_dists: np.ndarray = None     # |E| x |E| float64, exact pairwise
    nearest_center: np.ndarray = None   # int64[n], ordinal into centers
    nearest_dist: np.ndarray = None     # float64[n]
    members: list = field(default_factory=list)  # per-ordinal int64 id arrays
    uncovered: np.ndarray = None        # int64 ids with d(p, E) > cover_radius
    cover_radius: float = 0.0
    rounds_run: int = 0
    stopped_by_rule: bool = False


def sample_initial_batch(dataset: metrics.Dataset, params: GonzalezParams, rng) -> Batch:
    """Uniform sample without replacement of the round-0 batch."""
    size = params.initial_batch_size(dataset.n)
    members = rng.choice(dataset.n, size=size, replace=False).astype(np.int64)
    return Batch(round=0, members=members)


def farthest_q(dist_to_E: np.ndarray, q_size: int) -> np.ndarray:
    """Ids of the q_size points with largest distance-to-E, ascending.

    Selection runs in expected linear time via introselect partitioning.
    Ties at the cutoff value go to smaller ids.
    """
    n = dist_to_E.shape[0]
    if q_size > n:
        raise ValueError("q_size %d exceeds n %d" % (q_size, n))
    if q_size == n:
        return np.arange(n, dtype=np.int64)
    part = np.argpartition(dist_to_E, n - q_size)
    cutoff = dist_to_E[part[n - q_size]]
    above = np.flatnonzero(dist_to_E > cutoff)
    need = q_size - above.size
    at_cutoff = np.flatnonzero(dist_to_E == cutoff)[:need]
    return np.sort(np.concatenate([above, at_cutoff])).astype(np.int64)


def filtration_mis(batch: Batch, r: float, oracle: metrics.DistanceOracle) -> Batch:
    """Greedy maximal independent set over the batch, in member order.

    A member survives iff it lies >= r from every earlier survivor; so the
    kept points are pairwise >= r apart and every dropped point sits within
    < r of some kept one.
    """
    kept: list[int] = []
    for p in batch.members:
        p = int(p)
        ok = True
        for q in kept:
            if metrics.distance(oracle, p, q) < r:
                ok = False
                break
        if ok:
            kept.append(p)
    return Batch(round=batch.round, members=np.asarray(kept, dtype=np.int64))


def _sampling_loop(dataset, oracle, params, rng, use_stopping_rule, max_batches):
    """Shared body of build_coarse_partition and run_fixed_rounds."""
    n = dataset.n
    q_size = params.q_size(n)
    round_size = params.round_batch_size()
    threshold = params.cover_radius()

    centers: list[int] = []
    batches: list[Batch] = []
    blocks: list = []  # (first ordinal, rows-to-all-points) for matrix assembly
    dist = np.full(n, np.inf)
    nearest = np.full(n, -1, dtype=np.int64)

    def add_batch(batch: Batch) -> None:
        rows = np.empty((batch.members.size, n))
        for k, p in enumerate(batch.members):
            row = oracle.row(int(p))
            rows[k] = row
            ordinal = len(centers)
            closer = row < dist  # strict: ties stay with the earlier center
            dist[closer] = row[closer]
            nearest[closer] = ordinal
            centers.append(int(p))
        blocks.append((len(centers) - batch.members.size, rows))
        batches.append(batch)

    first = sample_initial_batch(dataset, params, rng)
    if params.variant == "metric2":
        first = filtration_mis(first, params.r, oracle)
    add_batch(first)

    stopped = False
    while True:
        if use_stopping_rule:
            q = farthest_q(dist, q_size)
            if dist[q].min() <= threshold:
                stopped = True
                break
            if len(batches) >= max_batches:
                break
        else:
            if len(batches) >= max_batches:
                break
            q = farthest_q(dist, q_size)
            q = q[dist[q] > 0.0]  # fixed-round harness: never resample a center
            if q.size == 0:
                break
        take = min(q.size, round_size)
        members = rng.choice(q, size=take, replace=False).astype(np.int64)
        batch = Batch(round=len(batches), members=members)
        if params.variant == "metric2":
            batch = filtration_mis(batch, params.r, oracle)
        add_batch(batch)

    # Assemble the center-distance matrix from the rows already computed
    # while updating distance-to-E; no fresh evaluations are needed, and the
    # entries are bit-identical to what a direct recomputation would give.
    m = len(centers)
    center_ids = np.asarray(centers, dtype=np.int64)
    cdists = np.zeros((m, m))
    for start, rows in blocks:
        end = start + rows.shape[0]
        sub = rows[:, center_ids[:end]]
        cdists[start:end, :end] = sub
        cdists[:end, start:end] = sub.T

    covered = dist <= threshold
    members = [np.flatnonzero((nearest == t) & covered).astype(np.int64) for t in range(m)]
    part = CoarsePartition(
        centers=center_ids,
        batches=batches,
        center_dists=cdists,
        nearest_center=nearest,
        nearest_dist=dist,
        members=members,
        uncovered=np.flatnonzero(~covered).astype(np.int64),
        cover_radius=threshold,
        rounds_run=len(batches),
        stopped_by_rule=stopped,
    )
    return part


def build_coarse_partition(dataset: metrics.Dataset, oracle: metrics.DistanceOracle,
                           params: GonzalezParams) -> CoarsePartition:
    """Run the sampler until the farthest batch is covered (or max_rounds).

    Every point ends up either assigned to its nearest center within
    cover_radius, or in the uncovered set.  When the stopping rule (rather
    than the round cap) ended the loop, the uncovered set is smaller than
    (1+delta)*z_tilde.
    """
    params.validate(dataset.n)
    rng = np.random.default_rng(params.seed)
    return _sampling_loop(dataset, oracle, params, rng,
                          use_stopping_rule=True,
                          max_batches=params.resolved_max_rounds(dataset.n))


def run_fixed_rounds(dataset: metrics.Dataset, oracle: metrics.DistanceOracle,
                     params: GonzalezParams, t: int) -> CoarsePartition:
    """Center sampling for exactly t rounds, ignoring the stopping rule.

    Test harness for the coverage guarantee of the fixed-round sampler; not
    part of the clustering pipeline.
    """
    params.validate(dataset.n)
    if t < 1:
        raise ValueError("need at least one round, got %d" % t)
    rng = np.random.default_rng(params.seed)
    return _sampling_loop(dataset, oracle, params, rng,
                          use_stopping_rule=False, max_batches=t)
