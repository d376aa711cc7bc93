import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citefield import corpus, louvain, synth
from citefield.errors import ValidationError
from citefield.partition import Partition, adjusted_rand_index


def naive_modularity(g, labels):
    """Direct double sum with self-loops placed on the adjacency diagonal as 2*self."""
    n = g.n
    a = [[g.weights[i][j] for j in range(n)] for i in range(n)]
    for i in range(n):
        a[i][i] = 2.0 * g.self_loops[i]
    k = [sum(row) for row in a]
    two_m = sum(k)
    q = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                q += a[i][j] - k[i] * k[j] / two_m
    return q / two_m


def random_graph(rng, n, density=0.5, loops=False):
    w = np.triu(rng.integers(1, 6, (n, n)) * (rng.random((n, n)) < density), 1).astype(float)
    w = w + w.T
    s = rng.integers(0, 3, n).astype(float) if loops else np.zeros(n)
    if w.sum() + s.sum() == 0:
        w[0, 1] = w[1, 0] = 1.0
    return louvain.WeightedGraph(w, s)


def cliques(sizes, bridge=0.0):
    n = sum(sizes)
    w = np.zeros((n, n))
    start = 0
    for sz in sizes:
        w[start : start + sz, start : start + sz] = 1.0
        start += sz
    np.fill_diagonal(w, 0.0)
    if bridge:
        ends = np.cumsum(sizes)
        for a, b in zip(ends[:-1] - 1, ends[:-1]):
            w[a, b] = w[b, a] = bridge
    return louvain.WeightedGraph(w, np.zeros(n))


graphs = st.tuples(st.integers(2, 8), st.integers(0, 2**32 - 1), st.booleans()).map(
    lambda t: random_graph(np.random.default_rng(t[1]), t[0], loops=t[2])
)


# symmetrize


def test_symmetrize_single_entry():
    g = louvain.symmetrize(corpus.from_dense([[0, 3], [0, 0]]))
    assert g.weights[0, 1] == 3 and g.weights[1, 0] == 3


def test_symmetrize_adds_both_directions():
    g = louvain.symmetrize(corpus.from_dense([[0, 2], [5, 0]]))
    assert g.weights[0, 1] == 7


def test_symmetrize_self_loops_and_zero_graph():
    m = corpus.from_dense([[4, 1], [0, 0]])
    assert louvain.symmetrize(m).self_loops.tolist() == [0.0, 0.0]
    assert louvain.symmetrize(m, include_self=True).self_loops.tolist() == [4.0, 0.0]
    with pytest.raises(ValidationError):
        louvain.symmetrize(corpus.from_dense(np.zeros((3, 3), int)))
    with pytest.raises(ValidationError):
        louvain.symmetrize(corpus.from_dense([[3, 0], [0, 0]]))


def test_degrees_match_row_sums(planted5):
    g = louvain.symmetrize(planted5.matrix, include_self=True)
    a = planted5.matrix.square()
    for i in range(g.n):
        expected = sum(a[i, j] + a[j, i] for j in range(g.n) if j != i) + 2 * a[i, i]
        assert g.degrees()[i] == expected


def test_graph_validation():
    with pytest.raises(ValidationError):
        louvain.WeightedGraph(np.array([[0.0, 1.0], [2.0, 0.0]]), np.zeros(2))
    with pytest.raises(ValidationError):
        louvain.WeightedGraph(np.array([[1.0, 0.0], [0.0, 0.0]]), np.zeros(2))
    with pytest.raises(ValidationError):
        louvain.WeightedGraph(np.array([[0.0, -1.0], [-1.0, 0.0]]), np.zeros(2))


# modularity


def test_modularity_one_community_is_zero():
    g = cliques([3, 4], bridge=1.0)
    assert louvain.modularity(g, np.zeros(7, int)) == pytest.approx(0.0, abs=1e-15)


def test_modularity_two_equal_cliques():
    g = cliques([4, 4])
    assert louvain.modularity(g, [0] * 4 + [1] * 4) == pytest.approx(0.5, abs=1e-15)


def test_modularity_matches_oracle_on_six_node_graphs():
    rng = np.random.default_rng(6)
    for _ in range(40):
        g = random_graph(rng, 6, loops=bool(rng.integers(2)))
        labels = rng.integers(0, 3, 6)
        assert louvain.modularity(g, labels) == pytest.approx(naive_modularity(g, labels), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(0, 2**32 - 1))
def test_modularity_bounds(g, seed):
    labels = np.random.default_rng(seed).integers(0, g.n, g.n)
    q = louvain.modularity(g, labels)
    assert -0.5 - 1e-12 <= q <= 1.0


def test_modularity_rejects_wrong_length():
    with pytest.raises(ValidationError):
        louvain.modularity(cliques([3]), [0, 0])


# aggregation


@settings(max_examples=80, deadline=None)
@given(graphs, st.integers(0, 2**32 - 1))
def test_aggregation_preserves_modularity(g, seed):
    labels = np.random.default_rng(seed).integers(0, 3, g.n)
    p = Partition.from_labels(labels)
    agg = louvain.aggregate(g, p)
    assert agg.total_weight() == pytest.approx(g.total_weight(), rel=1e-12)
    singleton = np.arange(agg.n)
    assert louvain.modularity(agg, singleton) == pytest.approx(louvain.modularity(g, p), abs=1e-10)


# louvain


def test_isolated_cliques_recovered():
    g = cliques([4, 5, 3])
    res = louvain.louvain(g)
    assert adjusted_rand_index(res.partition.labels, [0] * 4 + [1] * 5 + [2] * 3) == 1.0
    assert len(res.q_history) <= 2


def test_louvain_bounded_by_exhaustive_on_eight_nodes():
    rng = np.random.default_rng(8)
    for _ in range(10):
        g = random_graph(rng, 8, density=0.4)
        res = louvain.louvain(g)
        _, q_best = synth.brute_force_best_partition(g)
        assert 0.0 <= res.modularity <= q_best + 1e-12
        assert res.modularity == pytest.approx(louvain.modularity(g, res.partition), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(graphs, st.sampled_from(["by_index", "seeded_shuffle"]), st.integers(0, 1000))
def test_q_history_strictly_increasing(g, order, seed):
    res = louvain.louvain(g, order, seed)
    q = np.array(res.q_history)
    assert np.all(np.diff(q) > 1e-9)
    assert res.partition.n == g.n


def test_planted_five_fields(planted5):
    t0 = time.perf_counter()
    res = louvain.louvain(louvain.symmetrize(planted5.matrix))
    assert time.perf_counter() - t0 < 1.0
    assert adjusted_rand_index(res.partition.labels, planted5.labels) >= 0.9


def test_louvain_reproducible(planted5):
    g = louvain.symmetrize(planted5.matrix)
    a = louvain.louvain(g)
    b = louvain.louvain(g)
    assert a.partition == b.partition and a.q_history == b.q_history
    c = louvain.louvain(g, "seeded_shuffle", 4)
    d = louvain.louvain(g, "seeded_shuffle", 4)
    assert c.partition == d.partition and c.q_history == d.q_history


def test_louvain_rejects_bad_order():
    with pytest.raises(ValidationError):
        louvain.louvain(cliques([3, 3]), order="random")


def test_from_edges_sums_repeats():
    g = louvain.from_edges(3, [(0, 1, 2), (1, 0, 1), (2, 2, 4)])
    assert g.weights[0, 1] == 3
    assert g.self_loops.tolist() == [0, 0, 4]
    assert g.total_weight() == 7
