import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gwmds.relational import (
    DegenerateInputError,
    MultiViewDataset,
    RelationalMatrix,
    SampleMatrix,
    distance_correlation,
    load_relational,
    mean_relational,
    pairwise_euclidean,
    save_relational,
)

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def points(n_min=3, n_max=12, dim=3):
    return st.integers(n_min, n_max).flatmap(lambda n: arrays(float, (n, dim), elements=finite))


def sym_matrices(n_min=3, n_max=10):
    def build(n):
        return arrays(float, (n, n), elements=st.floats(0, 50, allow_nan=False)).map(
            lambda A: np.triu(A, 1) + np.triu(A, 1).T
        )

    return st.integers(n_min, n_max).flatmap(build)


def test_three_four_five():
    D = pairwise_euclidean(np.array([[0.0, 0.0], [3.0, 4.0]]))
    np.testing.assert_array_equal(D.values, [[0, 5], [5, 0]])
    assert D.metric_tag == "euclidean"


def test_duplicate_rows_give_zero():
    X = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    assert pairwise_euclidean(X).values[0, 1] == 0.0


def test_pairwise_matches_loop(rng):
    X = rng.normal(size=(10, 3))
    D = pairwise_euclidean(X).values
    for i in range(10):
        for j in range(10):
            assert abs(D[i, j] - np.sqrt(sum((X[i, c] - X[j, c]) ** 2 for c in range(3)))) < 1e-12


def test_nonfinite_row_is_named():
    X = np.zeros((4, 2))
    X[2, 1] = np.nan
    with pytest.raises(ValueError, match="row 2"):
        pairwise_euclidean(X)
    with pytest.raises(ValueError, match="row 2"):
        SampleMatrix(X)


@pytest.mark.parametrize(
    "values, message",
    [
        (np.ones((2, 3)), "square"),
        (np.array([[0.0, -1.0], [-1.0, 0.0]]), "negative"),
        (np.array([[0.0, 1.0], [2.0, 0.0]]), "symmetric"),
        (np.array([[1.0, 1.0], [1.0, 0.0]]), "diagonal"),
        (np.array([[0.0, np.inf], [np.inf, 0.0]]), "non-finite"),
    ],
)
def test_relational_matrix_validation(values, message):
    with pytest.raises(ValueError, match=message):
        RelationalMatrix(values)


def test_relational_matrix_is_read_only():
    D = RelationalMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        D.values[0, 1] = 3.0


def test_mean_examples():
    D = pairwise_euclidean(np.arange(6.0).reshape(3, 2))
    np.testing.assert_array_equal(mean_relational([D, D]).values, D.values)
    out = mean_relational([np.array([[0, 2], [2, 0.0]]), np.array([[0, 4], [4, 0.0]])])
    np.testing.assert_array_equal(out.values, [[0, 3], [3, 0]])
    assert out.metric_tag == "precomputed"


def test_mean_matches_scalar_loop(rng):
    Ds = []
    for _ in range(3):
        A = rng.uniform(size=(5, 5))
        Ds.append(np.triu(A, 1) + np.triu(A, 1).T)
    out = mean_relational(Ds).values
    for i in range(5):
        for j in range(5):
            assert abs(out[i, j] - (Ds[0][i, j] + Ds[1][i, j] + Ds[2][i, j]) / 3) < 1e-15


def test_mean_shape_mismatch_names_view():
    with pytest.raises(ValueError, match="view 1"):
        mean_relational([np.zeros((3, 3)), np.zeros((4, 4))])
    with pytest.raises(ValueError):
        mean_relational([])


def test_weighted_mean():
    A = np.array([[0, 1], [1, 0.0]])
    B = np.array([[0, 3], [3, 0.0]])
    np.testing.assert_allclose(mean_relational([A, B], [3, 1]).values, [[0, 1.5], [1.5, 0]])


def test_correlation_examples(rng):
    D = pairwise_euclidean(rng.normal(size=(8, 2))).values
    assert distance_correlation(D, D) == pytest.approx(1.0, abs=1e-12)
    off = np.ones((8, 8)) - np.eye(8)
    assert distance_correlation(D, 2.5 * D + 0.7 * off) == pytest.approx(1.0, abs=1e-12)


def test_correlation_matches_pearson_oracle(rng):
    A = rng.uniform(size=(6, 6))
    B = rng.uniform(size=(6, 6))
    A = np.triu(A, 1) + np.triu(A, 1).T
    B = np.triu(B, 1) + np.triu(B, 1).T
    a = [A[i, j] for i in range(6) for j in range(i + 1, 6)]
    b = [B[i, j] for i in range(6) for j in range(i + 1, 6)]
    assert len(a) == 15
    ma, mb = sum(a) / 15, sum(b) / 15
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    assert abs(distance_correlation(A, B) - cov / np.sqrt(va * vb)) < 1e-12


def test_correlation_degenerate():
    D = np.ones((4, 4)) - np.eye(4)
    E = pairwise_euclidean(np.arange(4.0)).values
    with pytest.raises(DegenerateInputError):
        distance_correlation(D, E)
    with pytest.raises(DegenerateInputError):
        distance_correlation(E, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        distance_correlation(np.zeros((2, 2)), np.zeros((2, 2)))


def test_csv_and_json_round_trip(tmp_path, rng):
    D = pairwise_euclidean(rng.normal(size=(7, 3)))
    for name in ("d.csv", "d.json"):
        save_relational(D, tmp_path / name)
        back = load_relational(tmp_path / name)
        np.testing.assert_array_equal(back.values, D.values)
    obj = json.loads(D.to_json())
    assert obj["n"] == 7 and obj["metric_tag"] == "euclidean" and len(obj["values"]) == 49


def test_dataset_checks_views():
    a = SampleMatrix(np.zeros((3, 2)), ("a", "b", "c"))
    b = SampleMatrix(np.ones((3, 4)), ("a", "b", "c"))
    data = MultiViewDataset((a, b))
    assert data.n_views == 2 and data.n_samples == 3 and data.row_ids == ("a", "b", "c")
    with pytest.raises(ValueError, match="view 1"):
        MultiViewDataset((a, SampleMatrix(np.zeros((4, 2)))))
    with pytest.raises(ValueError, match="row ids"):
        MultiViewDataset((a, SampleMatrix(np.zeros((3, 2)), ("c", "b", "a"))))
    with pytest.raises(ValueError):
        MultiViewDataset(())
    with pytest.raises(ValueError):
        SampleMatrix(np.zeros((1, 3)))


# properties


@pytest.mark.invariant
@given(st.lists(sym_matrices(4, 4), min_size=1, max_size=4))
def test_mean_stays_symmetric_zero_diagonal(Ds):
    M = mean_relational(Ds).values
    assert np.abs(M - M.T).max() <= 1e-12
    assert np.abs(np.diag(M)).max() <= 1e-12


@pytest.mark.invariant
@given(sym_matrices(), st.randoms(use_true_random=False))
def test_correlation_symmetric_and_permutation_invariant(A, r):
    n = A.shape[0]
    rng = np.random.default_rng(r.randint(0, 2**32 - 1))
    B = rng.uniform(size=(n, n))
    B = np.triu(B, 1) + np.triu(B, 1).T
    try:
        rab = distance_correlation(A, B)
    except DegenerateInputError:
        return
    assert abs(rab - distance_correlation(B, A)) <= 1e-12
    p = rng.permutation(n)
    assert abs(rab - distance_correlation(A[np.ix_(p, p)], B[np.ix_(p, p)])) <= 1e-12
    assert -1.0 <= rab <= 1.0


@pytest.mark.invariant
@given(points(3, 30))
def test_triangle_inequality(X):
    D = pairwise_euclidean(X).values
    n = D.shape[0]
    rng = np.random.default_rng(n)
    for i, j, k in rng.integers(0, n, size=(100, 3)):
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-9 * max(1.0, D.max())
