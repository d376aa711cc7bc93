import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from citefield import corpus, simmat
from citefield.errors import ParseError, ValidationError


def two_pass_pearson(x, y):
    """Textbook formula: means first, then centred sums."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def naive_cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    return dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))


def columns(*cols):
    return np.array(cols, dtype=np.int64).T


profile_pairs = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        arrays(np.int64, n, elements=st.integers(0, 50)),
        arrays(np.int64, n, elements=st.integers(0, 50)),
    )
)


# cosine


def test_cosine_orthogonal():
    assert simmat.cosine([1, 0], [0, 1]) == 0.0
    s, _ = simmat.cosine_matrix(columns([1, 0], [0, 1]))
    assert s[0, 1] == 0.0


def test_cosine_identical():
    s, _ = simmat.cosine_matrix(columns([3, 1, 4], [3, 1, 4]))
    assert s[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_cosine_hand_value():
    s, _ = simmat.cosine_matrix(columns([2, 0, 1], [1, 0, 2]))
    assert s[0, 1] == pytest.approx(4 / (math.sqrt(5) * math.sqrt(5)), abs=1e-15)
    assert s[0, 1] == pytest.approx(0.8, abs=1e-15)


def test_cosine_zero_profile_flagged():
    m = corpus.from_dense([[0, 2, 0], [1, 0, 0], [3, 1, 0]], ["A", "B", "C"])
    s = simmat.cosine_similarity(m)
    assert s.degenerate == ("C",)
    assert s.values[2].tolist() == [0.0, 0.0, 0.0]
    assert s.values[0, 0] == 1.0


def test_cosine_similarity_excludes_self_by_default():
    # with the diagonal, A and B share mass on row 0; without it they are orthogonal
    m = corpus.from_dense([[5, 1], [0, 0]], ["A", "B"])
    assert simmat.cosine_similarity(m).values[0, 1] == 0.0
    assert simmat.cosine_similarity(m, include_self=True).values[0, 1] > 0.0


def test_cosine_citing_axis_uses_rows():
    a = np.array([[0, 2, 1], [0, 0, 3], [1, 1, 0]])
    m = corpus.from_dense(a, list("ABC"))
    s = simmat.cosine_similarity(m, axis="citing", include_self=True)
    assert s.values[0, 1] == pytest.approx(naive_cosine(a[0], a[1]), abs=1e-15)
    with pytest.raises(ValidationError):
        simmat.cosine_similarity(m, axis="sideways")


@settings(max_examples=100, deadline=None)
@given(profile_pairs)
def test_cosine_matches_naive(pair):
    u, v = pair
    assume(u.any() and v.any())
    s, _ = simmat.cosine_matrix(np.column_stack([u, v]))
    assert s[0, 1] == pytest.approx(naive_cosine(u.tolist(), v.tolist()), abs=1e-12)
    assert 0.0 <= s[0, 1] <= 1.0
    assert s[0, 1] == s[1, 0]


@settings(max_examples=100, deadline=None)
@given(profile_pairs, st.integers(1, 20))
def test_cosine_zero_padding_exact(pair, pad):
    u, v = pair
    x = np.column_stack([u, v])
    padded = np.vstack([x, np.zeros((pad, 2), np.int64)])
    assert simmat.cosine_matrix(x)[0][0, 1] == simmat.cosine_matrix(padded)[0][0, 1]


@settings(max_examples=60, deadline=None)
@given(arrays(np.int64, 6, elements=st.integers(0, 30)), st.integers(1, 9))
def test_cosine_equals_one_for_scaled_profiles(u, c):
    assume(u.any())
    s, _ = simmat.cosine_matrix(np.column_stack([u, c * u]))
    assert s[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_cosine_below_one_for_non_multiples():
    s, _ = simmat.cosine_matrix(columns([1, 2, 3], [1, 2, 4]))
    assert s[0, 1] < 1.0 - 1e-6


def test_cosine_matrix_symmetric_unit_diagonal(planted5):
    s = simmat.cosine_similarity(planted5.matrix)
    assert np.array_equal(s.values, s.values.T)
    assert np.all(np.diag(s.values) == 1.0)
    assert s.values.min() >= 0.0


# pearson


def test_pearson_self_and_anti():
    r, _ = simmat.pearson_matrix(columns([1, 2, 3], [1, 2, 3], [3, 2, 1]))
    assert r[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert r[0, 2] == pytest.approx(-1.0, abs=1e-15)


def test_pearson_matches_two_pass_oracle():
    x, y = [1, 0, 2, 4], [2, 1, 1, 3]
    r, _ = simmat.pearson_matrix(columns(x, y))
    assert r[0, 1] == pytest.approx(two_pass_pearson(x, y), abs=1e-12)


def test_pearson_constant_column_degenerate():
    m = corpus.from_dense([[0, 1, 0], [3, 0, 0], [1, 4, 0]], list("ABC"))
    assert simmat.pearson_correlation(m).degenerate == ("C",)
    r, const = simmat.pearson_matrix(columns([1, 2, 3], [5, 5, 5]))
    assert const.tolist() == [False, True]
    assert r[0, 1] == 0.0 and r[1, 1] == 0.0


def test_pearson_needs_two_observations():
    with pytest.raises(ValidationError):
        simmat.pearson_matrix(np.array([[1, 2, 3]]))
    m = corpus.clean(corpus.from_dense([[0, 3], [0, 0]]))
    with pytest.raises(ValidationError):
        simmat.pearson_correlation(m)


@settings(max_examples=80, deadline=None)
@given(
    arrays(np.float64, 8, elements=st.floats(-50, 50)),
    arrays(np.float64, 8, elements=st.floats(-50, 50)),
    st.floats(0.1, 20),
    st.floats(-100, 100),
)
def test_pearson_affine_invariance(x, y, a, b):
    assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
    r0 = simmat.pearson_matrix(np.column_stack([x, y]))[0][0, 1]
    r1 = simmat.pearson_matrix(np.column_stack([a * x + b, y]))[0][0, 1]
    r2 = simmat.pearson_matrix(np.column_stack([x, a * y + b]))[0][0, 1]
    assert r1 == pytest.approx(r0, abs=1e-10)
    assert r2 == pytest.approx(r0, abs=1e-10)


def test_pearson_changes_under_zero_padding():
    x, y = [1, 0, 2, 4], [2, 1, 1, 3]
    r0 = simmat.pearson_matrix(columns(x, y))[0][0, 1]
    r1 = simmat.pearson_matrix(columns(x + [0] * 6, y + [0] * 6))[0][0, 1]
    assert abs(r1 - r0) > 0.05
    assert r1 == pytest.approx(two_pass_pearson(x + [0] * 6, y + [0] * 6), abs=1e-12)


# distance and CSV


def test_distance_basic_values():
    d = simmat.distance_from_similarity(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert d.tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_distance_elementwise(rng):
    a = rng.uniform(-1, 1, (7, 7))
    s = (a + a.T) / 2
    np.fill_diagonal(s, 1.0)
    d = simmat.distance_from_similarity(s)
    for i in range(7):
        for j in range(7):
            expected = 0.0 if i == j else min(max(1.0 - s[i, j], 0.0), 2.0)
            assert d[i, j] == expected
    assert np.array_equal(d, d.T)


def test_similarity_csv_round_trip(tmp_path, planted5):
    s = simmat.pearson_correlation(planted5.matrix)
    simmat.write_similarity_csv(s, tmp_path / "s.csv")
    back = simmat.read_similarity_csv(tmp_path / "s.csv")
    assert back.kind == "pearson"
    assert back.labels == s.labels
    assert np.array_equal(back.values, s.values)
    assert (tmp_path / "s.csv").read_text().splitlines()[0].startswith("pearson,F0J00,")


def test_matrix_csv_rejects_ragged(tmp_path):
    (tmp_path / "bad.csv").write_text(",A,B\nA,1,0\n")
    with pytest.raises(ParseError):
        simmat.read_matrix_csv(tmp_path / "bad.csv")
