import itertools

import numpy as np
import pytest

from citefield import ISOLATE, louvain, synth
from citefield.errors import ValidationError


def bell(n):
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def test_spec_validation():
    with pytest.raises(ValidationError):
        synth.PlantedSpec(within_rate=1.0, cross_rate=1.0)
    with pytest.raises(ValidationError):
        synth.PlantedSpec(cross_rate=-0.5)
    with pytest.raises(ValidationError):
        synth.PlantedSpec(n_fields=0)
    with pytest.raises(ValidationError):
        synth.PlantedSpec(size_spread=1.0)


def test_zero_cross_rate_is_block_diagonal():
    pl = synth.generate_planted(synth.PlantedSpec(n_fields=4, journals_per_field=5, cross_rate=0.0, seed=1))
    a = pl.matrix.square()
    off = pl.labels[:, None] != pl.labels[None, :]
    assert a[off].sum() == 0
    assert a[~off].sum() > 0


def test_within_block_mean_near_rate():
    spec = synth.PlantedSpec(n_fields=5, journals_per_field=20, within_rate=10.0, cross_rate=1.0, seed=9)
    pl = synth.generate_planted(spec)
    a = pl.matrix.square()
    same = pl.labels[:, None] == pl.labels[None, :]
    assert abs(a[same].mean() - spec.within_rate) <= 0.15 * spec.within_rate
    assert abs(a[~same].mean() - spec.cross_rate) <= 0.15 * spec.cross_rate


def test_same_seed_same_matrix():
    spec = synth.PlantedSpec(n_fields=3, journals_per_field=7, generalist_count=2, seed=42)
    a, b = synth.generate_planted(spec), synth.generate_planted(spec)
    assert a.matrix == b.matrix
    assert np.array_equal(a.labels, b.labels)
    other = synth.generate_planted(synth.PlantedSpec(n_fields=3, journals_per_field=7, generalist_count=2, seed=43))
    assert other.matrix != a.matrix


def test_generalists_and_silent_layout():
    spec = synth.PlantedSpec(n_fields=2, journals_per_field=4, generalist_count=1, silent_count=2, seed=0)
    pl = synth.generate_planted(spec)
    assert pl.matrix.abbreviations[-3:] == ["GEN0", "SIL0", "SIL1"]
    assert pl.generalists == (8,) and pl.silent == (9, 10)
    assert np.all(pl.labels[8:] == ISOLATE)
    a = pl.matrix.square()
    assert a[9:, :].sum() == 0 and a[:, 9:].sum() == 0
    assert pl.truth().n == 8 and pl.truth().n_groups == 2


def test_poisson_sampler_matches_scipy_quantiles():
    from scipy import stats

    rng = np.random.default_rng(0)
    u = rng.random(2000)
    for rate in (0.3, 2.0, 10.0, 40.0):
        k = synth.poisson_inverse_transform(np.full(u.shape, rate), u)
        assert np.array_equal(k, stats.poisson.ppf(u, rate).astype(np.int64))
    assert synth.poisson_inverse_transform(np.zeros(3), np.array([0.1, 0.5, 0.99])).tolist() == [0, 0, 0]


@pytest.mark.parametrize("n", range(0, 8))
def test_set_partitions_count_and_order(n):
    parts = list(synth.set_partitions(n))
    assert len(parts) == bell(n)
    assert parts == sorted(parts)
    assert len(set(parts)) == len(parts)


def test_best_partition_two_triangles():
    tri = [(0, 1, 1), (1, 2, 1), (0, 2, 1)]
    g = louvain.from_edges(6, tri + [(i + 3, j + 3, w) for i, j, w in tri])
    p, q = synth.brute_force_best_partition(g)
    assert p.labels.tolist() == [0, 0, 0, 1, 1, 1]
    assert q == pytest.approx(0.5, abs=1e-15)


def test_best_partition_single_edge():
    g = louvain.from_edges(2, [(0, 1, 1.0)])
    # the two candidates: together (Q = 0) or apart (Q = -1/2)
    assert louvain.modularity(g, [0, 1]) == pytest.approx(-0.5)
    p, q = synth.brute_force_best_partition(g)
    assert p.labels.tolist() == [0, 0]
    assert q == pytest.approx(0.0, abs=1e-15)


def test_best_partition_limits():
    with pytest.raises(ValidationError):
        synth.brute_force_best_partition(louvain.from_edges(11, [(0, 1, 1)]))
    with pytest.raises(ValidationError):
        synth.brute_force_best_partition(louvain.WeightedGraph(np.zeros((3, 3)), np.zeros(3)))


def test_best_partition_matches_loop_over_labelings():
    rng = np.random.default_rng(4)
    w = np.triu(rng.integers(0, 4, (5, 5)), 1).astype(float)
    g = louvain.WeightedGraph(w + w.T, rng.integers(0, 2, 5).astype(float))
    best = max(louvain.modularity(g, lab) for lab in itertools.product(range(5), repeat=5))
    assert synth.brute_force_best_partition(g)[1] == pytest.approx(best, abs=1e-12)


def test_ward_oracle_trivial_sizes():
    assert synth.brute_force_ward(np.zeros((1, 1))) == []
    (a, b, c), = synth.brute_force_ward(np.array([[0.0, 2.5], [2.5, 0.0]]))
    assert (a, b) == (frozenset({0}), frozenset({1}))
    assert c == pytest.approx(2.5, abs=1e-15)
    with pytest.raises(ValidationError):
        synth.brute_force_ward(np.zeros((7, 7)))


def test_ward_oracle_four_points_by_centroids():
    rng = np.random.default_rng(17)
    x = rng.normal(size=(4, 2))
    d = np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))

    def centroid_cost(a, b):
        ca, cb = x[sorted(a)].mean(0), x[sorted(b)].mean(0)
        return np.sqrt(2 * len(a) * len(b) / (len(a) + len(b)) * ((ca - cb) ** 2).sum())

    clusters = [frozenset([i]) for i in range(4)]
    expected = []
    while len(clusters) > 1:
        a, b = min(itertools.combinations(clusters, 2), key=lambda ab: centroid_cost(*ab))
        expected.append((min(a, b, key=min), max(a, b, key=min), centroid_cost(a, b)))
        clusters = [c for c in clusters if c not in (a, b)] + [a | b]
    got = synth.brute_force_ward(d)
    assert [(a, b) for a, b, _ in got] == [(a, b) for a, b, _ in expected]
    assert np.allclose([c for *_, c in got], [c for *_, c in expected], atol=1e-12)


def test_expected_sparsity_no_spread():
    spec = synth.PlantedSpec(n_fields=2, journals_per_field=3, within_rate=2.0, cross_rate=0.5, size_spread=0.0)
    same = 2 * 9
    cross = 36 - same
    assert synth.expected_sparsity(spec) == pytest.approx((same * np.exp(-2.0) + cross * np.exp(-0.5)) / 36)
