"""Center-sampler tests: batch sizes, selection, filtration, coverage."""

import math

import numpy as np
import pytest

from metric_dbscan import metrics, partition


def planted(seed=0, k=5, per=100, radius=0.5, outliers=10, spread=100.0):
    """k tight 2-D clusters plus far-flung outliers; returns (Dataset, centers)."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0, spread, size=(k, 2))
    pts = [centers[i] + radius * rng.uniform(-1, 1, size=(per, 2)) / np.sqrt(2)
           for i in range(k)]
    pts.append(rng.uniform(2 * spread, 4 * spread, size=(outliers, 2)))
    return metrics.Dataset(np.concatenate(pts)), centers


def fresh(ds, kind="euclidean"):
    return metrics.DistanceOracle(ds, kind)


# --- batch-size formulas ---------------------------------------------------

def test_initial_batch_size_examples():
    p = partition.GonzalezParams(r=1.0, z_tilde=10, eta=math.exp(-1))
    assert p.initial_batch_size(1000) == 2  # gamma = 0.01
    p = partition.GonzalezParams(r=1.0, z_tilde=10, eta=0.1)
    assert p.initial_batch_size(1000) == 3
    # independent recomputation of the same formula
    assert p.initial_batch_size(1000) == math.ceil((1 / (1 - 0.01)) * math.log(10))


def test_initial_batch_capped_by_n():
    p = partition.GonzalezParams(r=1.0, z_tilde=1, eta=0.001)
    assert p.initial_batch_size(2) == 2


def test_round_batch_size():
    p = partition.GonzalezParams(r=1.0, z_tilde=10, delta=1.0, eta=0.1)
    assert p.round_batch_size() == 5  # ceil(2 * ln 10)
    p = partition.GonzalezParams(r=1.0, z_tilde=10, delta=0.5, eta=0.1)
    assert p.round_batch_size() == math.ceil(3.0 * math.log(10.0))


def test_sample_initial_batch_uniform_distinct():
    ds, _ = planted(seed=1)
    p = partition.GonzalezParams(r=1.0, z_tilde=50, eta=0.01, seed=77)
    rng = np.random.default_rng(p.seed)
    b = partition.sample_initial_batch(ds, p, rng)
    assert b.round == 0
    assert b.members.size == p.initial_batch_size(ds.n)
    assert np.unique(b.members).size == b.members.size
    rng2 = np.random.default_rng(77)
    b2 = partition.sample_initial_batch(ds, p, rng2)
    assert np.array_equal(b.members, b2.members)


def test_params_validation():
    ds, _ = planted()
    n = ds.n
    for bad in (partition.GonzalezParams(r=-1.0, z_tilde=10),
                partition.GonzalezParams(r=1.0, z_tilde=0),
                partition.GonzalezParams(r=1.0, z_tilde=n),
                partition.GonzalezParams(r=1.0, z_tilde=10, delta=0.0),
                partition.GonzalezParams(r=1.0, z_tilde=10, eta=1.0),
                partition.GonzalezParams(r=1.0, z_tilde=10, variant="metric3"),
                # q_size = ceil((1+delta) z) beyond n
                partition.GonzalezParams(r=1.0, z_tilde=(n // 2) + 40, delta=1.0)):
        with pytest.raises(ValueError):
            bad.validate(n)
    partition.GonzalezParams(r=1.0, z_tilde=10).validate(n)


# --- farthest_q ------------------------------------------------------------

def test_farthest_q_examples():
    d = np.array([1.0, 5.0, 3.0, 2.0])
    assert set(partition.farthest_q(d, 2)) == {1, 2}
    assert np.array_equal(partition.farthest_q(d, 4), np.arange(4))
    with pytest.raises(ValueError):
        partition.farthest_q(d, 5)


def test_farthest_q_matches_full_sort():
    rng = np.random.default_rng(23)
    d = rng.uniform(0, 100, size=200)
    got = partition.farthest_q(d, 17)
    want = np.sort(np.argsort(-d, kind="stable")[:17])  # sort-based oracle
    assert np.array_equal(got, want)
    assert np.all(np.diff(got) > 0)  # ascending ids


def test_farthest_q_tie_break_smaller_ids():
    d = np.array([2.0, 7.0, 2.0, 2.0, 7.0, 1.0])
    got = partition.farthest_q(d, 3)
    # both 7s, then the tie among the three 2s goes to id 0
    assert np.array_equal(got, np.array([0, 1, 4]))


# --- filtration ------------------------------------------------------------

def line_oracle(coords):
    ds = metrics.Dataset(np.asarray(coords, float).reshape(-1, 1))
    return ds, metrics.DistanceOracle(ds, "euclidean")


def test_filtration_spread_batch_unchanged():
    _, orc = line_oracle([0.0, 5.0, 10.0])
    b = partition.Batch(round=1, members=np.array([0, 1, 2], dtype=np.int64))
    out = partition.filtration_mis(b, 1.0, orc)
    assert np.array_equal(out.members, b.members)
    assert out.round == 1


def test_filtration_clique_keeps_first():
    _, orc = line_oracle([0.0, 0.1, 0.2, 0.15])
    b = partition.Batch(round=0, members=np.array([2, 0, 1, 3], dtype=np.int64))
    out = partition.filtration_mis(b, 1.0, orc)
    assert np.array_equal(out.members, np.array([2]))


def test_filtration_line_example():
    _, orc = line_oracle([0.0, 0.4, 0.8, 2.0, 2.3, 4.0, 6.0])
    b = partition.Batch(round=0, members=np.arange(7, dtype=np.int64))
    out = partition.filtration_mis(b, 1.0, orc)
    assert np.array_equal(out.members, np.array([0, 3, 5, 6]))  # coords 0, 2, 4, 6
    # maximality: every dropped point sits within r of a kept one
    for p in set(b.members) - set(out.members):
        assert min(metrics.distance(orc, int(p), int(q)) for q in out.members) < 1.0


# --- build_coarse_partition ------------------------------------------------

def test_all_identical_points():
    ds = metrics.Dataset(np.ones((40, 3)))
    p = partition.GonzalezParams(r=0.5, z_tilde=5, seed=4)
    part = partition.build_coarse_partition(ds, fresh(ds), p)
    assert part.rounds_run == 1
    assert part.stopped_by_rule
    assert part.uncovered.size == 0
    assert part.nearest_dist.max() == 0.0


def test_huge_r_stops_after_first_batch():
    ds, _ = planted(seed=2)
    orc = fresh(ds)
    diam = 1000.0  # generous upper bound on the spread
    p = partition.GonzalezParams(r=diam, z_tilde=20, seed=9)
    part = partition.build_coarse_partition(ds, orc, p)
    assert part.rounds_run == 1
    assert part.stopped_by_rule
    assert part.uncovered.size < 2 * p.z_tilde
    covered = part.nearest_dist <= part.cover_radius
    assert covered.sum() + part.uncovered.size == ds.n


def test_planted_instance_coverage():
    ds, _ = planted(seed=3, k=5, per=100, radius=0.5, outliers=10)
    orc = fresh(ds)
    p = partition.GonzalezParams(r=1.0, z_tilde=10, delta=1.0, seed=21)
    part = partition.build_coarse_partition(ds, orc, p)
    assert part.uncovered.size <= 20
    # exhaustive re-scan through a separate oracle
    check = fresh(ds)
    for q in range(ds.n):
        true_min = check.subset(q, part.centers).min()
        if q in set(part.uncovered.tolist()):
            assert true_min > part.cover_radius
        else:
            assert part.nearest_dist[q] <= part.cover_radius
            assert true_min == part.nearest_dist[q]
    # the 500 planted inliers all lie within cover radius of some center
    assert np.all(part.nearest_dist[:500] <= part.cover_radius)


def test_partition_fields_consistent_both_variants():
    for variant in ("metric1", "metric2"):
        for seed in range(4):
            ds, _ = planted(seed=seed + 10, k=4, per=60, outliers=8)
            orc = fresh(ds)
            p = partition.GonzalezParams(r=2.0, z_tilde=12, variant=variant,
                                         seed=seed, delta=1.0)
            part = partition.build_coarse_partition(ds, orc, p)
            n = ds.n
            # members plus uncovered partition [0, n)
            everything = np.concatenate(part.members + [part.uncovered])
            assert np.array_equal(np.sort(everything), np.arange(n))
            for t, mem in enumerate(part.members):
                assert np.all(part.nearest_center[mem] == t)
            assert np.all(part.nearest_dist[part.uncovered] > part.cover_radius)
            cov = np.concatenate(part.members) if part.members else np.array([], int)
            if cov.size:
                assert np.all(part.nearest_dist[cov] <= part.cover_radius)
            # center matrix is exact and symmetric
            m = part.centers.size
            check = fresh(ds)
            recomputed = np.zeros((m, m))
            for i in range(m):
                recomputed[i] = check.subset(int(part.centers[i]), part.centers)
            assert np.array_equal(part.center_dists, recomputed)
            if variant == "metric2" and m > 1:
                off = part.center_dists[~np.eye(m, dtype=bool)]
                assert off.min() >= p.r
            if part.stopped_by_rule:
                assert part.uncovered.size < (1 + p.delta) * p.z_tilde
            assert part.batches[0].round == 0
            assert [b.round for b in part.batches] == list(range(part.rounds_run))


def test_uncovered_bound_nondefault_delta():
    for delta in (0.5, 2.0):
        ds, _ = planted(seed=31, k=3, per=80, outliers=12)
        p = partition.GonzalezParams(r=3.0, z_tilde=15, delta=delta, seed=2)
        part = partition.build_coarse_partition(ds, fresh(ds), p)
        if part.stopped_by_rule:
            assert part.uncovered.size < (1 + delta) * p.z_tilde


def test_determinism_same_seed():
    ds, _ = planted(seed=6)
    p = partition.GonzalezParams(r=2.0, z_tilde=10, seed=123, variant="metric2")
    a = partition.build_coarse_partition(ds, fresh(ds), p)
    b = partition.build_coarse_partition(ds, fresh(ds), p)
    assert np.array_equal(a.centers, b.centers)
    assert np.array_equal(a.nearest_dist, b.nearest_dist)
    assert np.array_equal(a.nearest_center, b.nearest_center)
    assert np.array_equal(a.uncovered, b.uncovered)
    assert np.array_equal(a.center_dists, b.center_dists)
    c = partition.build_coarse_partition(ds, fresh(ds),
                                         partition.GonzalezParams(r=2.0, z_tilde=10,
                                                                  seed=124,
                                                                  variant="metric2"))
    assert not np.array_equal(a.centers, c.centers)  # seed actually matters


def test_max_rounds_cap_flagged():
    ds, _ = planted(seed=8)
    p = partition.GonzalezParams(r=0.01, z_tilde=10, seed=5, max_rounds=2)
    part = partition.build_coarse_partition(ds, fresh(ds), p)
    assert part.rounds_run == 2
    assert not part.stopped_by_rule


def test_eval_accounting_metric1():
    ds, _ = planted(seed=12)
    orc = fresh(ds)
    p = partition.GonzalezParams(r=2.0, z_tilde=10, seed=3)
    before = orc.eval_count
    part = partition.build_coarse_partition(ds, orc, p)
    # one full row scan per center and nothing else
    assert orc.eval_count - before == part.centers.size * (ds.n - 1)


def test_eval_accounting_metric2_includes_filtration():
    ds, _ = planted(seed=13)
    orc = fresh(ds)
    p = partition.GonzalezParams(r=2.0, z_tilde=10, seed=3, variant="metric2")
    before = orc.eval_count
    part = partition.build_coarse_partition(ds, orc, p)
    scans = part.centers.size * (ds.n - 1)
    extra = orc.eval_count - before - scans
    # filtration pays at most one comparison per ordered pair per batch
    assert extra >= 0


def test_run_fixed_rounds_executes_exactly_t():
    ds, _ = planted(seed=14)
    p = partition.GonzalezParams(r=0.001, z_tilde=10, seed=1)
    part = partition.run_fixed_rounds(ds, fresh(ds), p, t=4)
    assert part.rounds_run == 4
    assert not part.stopped_by_rule
    assert part.batches[-1].round == 3
    with pytest.raises(ValueError):
        partition.run_fixed_rounds(ds, fresh(ds), p, t=0)
