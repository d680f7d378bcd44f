"""Point storage and distance oracles with exact evaluation counting."""

from __future__ import annotations

import numpy as np

from . import _kernels

METRICS = ("euclidean", "manhattan", "angular")


class Dataset:
    """Immutable collection of n points in R^D, indexed 0..n-1.

    Coordinates are stored as a C-contiguous float64 array; every value must
    be finite.
    """

    def __init__(self, points):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-D array, got shape %r" % (pts.shape,))
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("dataset needs at least one point and one dimension")
        if not np.isfinite(pts).all():
            raise ValueError("dataset contains non-finite coordinates")
        self.points = pts
        self.points.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


class DistanceOracle:
    """Computes distances of one kind over a dataset, counting every evaluation.

    The counter is exact: each pairwise distance handed out increments it by
    one, with the single exception of self-distances inside bulk scans, which
    are short-circuited to 0.0 and not counted.  Parallel callers must not
    touch the counter directly; they tally locally and merge via
    ``add_evals`` at a synchronization point.
    """

    def __init__(self, dataset: Dataset, kind: str):
        if kind not in METRICS:
            raise ValueError("unknown metric kind %r (choose from %s)" % (kind, ", ".join(METRICS)))
        self.dataset = dataset
        self.kind = kind
        self.kind_code = _kernels.KIND_CODES[kind]
        if kind == "angular":
            norms = np.sqrt((dataset.points * dataset.points).sum(axis=1))
            zero = np.flatnonzero(norms == 0.0)
            if zero.size:
                raise ValueError(
                    "angular metric is undefined for the zero vector (point %d)" % zero[0]
                )
            self.norms = norms
        else:
            self.norms = np.empty(0, dtype=np.float64)
        self._all_ids = np.arange(dataset.n, dtype=np.int64)
        self._evals = 0

    @property
    def eval_count(self) -> int:
        return self._evals

    def add_evals(self, k: int) -> None:
        """Merge a worker-local evaluation tally into the counter."""
        self._evals += int(k)

    def _check_id(self, p: int) -> None:
        if not 0 <= p < self.dataset.n:
            raise ValueError("point id %d out of range [0, %d)" % (p, self.dataset.n))

    def subset_nocount(self, i: int, ids: np.ndarray):
        """Distances from i to ids, plus the evaluation count the caller owes.

        Does not touch the counter; meant for parallel workers that merge
        their tallies later.  The self slot, if present, is 0.0 and free.
        """
        d = _kernels.subset_dists(self.dataset.points, self.norms, self.kind_code, i, ids)
        return d, int(ids.size - int((ids == i).sum()))

    def subset(self, i: int, ids: np.ndarray) -> np.ndarray:
        self._check_id(i)
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        d, k = self.subset_nocount(i, ids)
        self._evals += k
        return d

    def row(self, i: int) -> np.ndarray:
        """All n distances from point i (self slot 0.0); counts n-1 evaluations."""
        self._check_id(i)
        d, _ = self.subset_nocount(i, self._all_ids)
        self._evals += self.dataset.n - 1
        return d


def distance(oracle: DistanceOracle, a: int, b: int) -> float:
    """d(a, b) under the oracle's kind.  Counts exactly one evaluation."""
    oracle._check_id(a)
    oracle._check_id(b)
    d, _ = oracle.subset_nocount(a, np.array([b], dtype=np.int64))
    oracle.add_evals(1)  # by contract, even a self-distance costs one here
    return float(d[0])


def set_distance(oracle: DistanceOracle, U, V) -> float:
    """min over u in U, v in V of d(u, v); counts exactly |U|*|V| evaluations."""
    U = np.asarray(list(U) if not isinstance(U, np.ndarray) else U, dtype=np.int64)
    V = np.asarray(list(V) if not isinstance(V, np.ndarray) else V, dtype=np.int64)
    if U.size == 0 or V.size == 0:
        raise ValueError("set_distance requires nonempty sets")
    best = np.inf
    for u in U:
        d, _ = oracle.subset_nocount(int(u), V)
        m = d.min()
        if m < best:
            best = m
    oracle.add_evals(U.size * V.size)
    return float(best)


def estimate_diameter(dataset: Dataset, oracle: DistanceOracle, seed: int) -> float:
    """Single-scan diameter estimate: the farthest distance from one point.

    The anchor is chosen by the seed.  By the triangle inequality the result
    lands in [diameter/2, diameter].  Costs exactly n-1 evaluations.
    """
    if dataset.n == 1:
        return 0.0
    rng = np.random.default_rng(seed)
    anchor = int(rng.integers(dataset.n))
    return float(oracle.row(anchor).max())
