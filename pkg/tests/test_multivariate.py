import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from coherent_layers import LayerParams, expected_charge
from coherent_layers.ensemble import ResponseMatrix
from coherent_layers.errors import DomainError
from coherent_layers.multivariate import correlation_matrix, histogram, pairwise_r2, pca

from oracles import REFERENCE_LAYERS

B12 = np.arange(1, 13)
CURVES = {k: expected_charge(LayerParams(*v), B12) for k, v in REFERENCE_LAYERS.items()}


def test_correlation_matrix_examples():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    C = correlation_matrix({"a": x, "b": x})
    assert C[0, 1] == pytest.approx(1.0)
    assert correlation_matrix({"a": x, "b": -x})[0, 1] == pytest.approx(-1.0)
    np.testing.assert_array_equal(np.diag(C), 1.0)
    with pytest.raises(DomainError, match="'flat'"):
        correlation_matrix({"a": x, "flat": np.ones(4)})
    with pytest.raises(DomainError):
        correlation_matrix({"a": x})


def test_reference_curves_highly_correlated():
    C = correlation_matrix(CURVES)
    assert C.shape == (7, 7)
    assert np.all(C[~np.eye(7, dtype=bool)] > 0.95)


def test_pca_identical_variables():
    res = pca(np.ones((7, 7)))
    assert res.eigenvalues[0] == pytest.approx(7.0)
    assert res.n_retained == 1
    np.testing.assert_allclose(res.loadings[:, 0], 1.0)
    np.testing.assert_allclose(res.communalities, 1.0)


def test_pca_identity_retains_nothing():
    res = pca(np.eye(5))
    np.testing.assert_allclose(res.eigenvalues, 1.0)
    assert res.n_retained == 0


def test_pca_rejects_bad_input():
    with pytest.raises(DomainError):
        pca(np.array([[1.0, 0.2], [0.3, 1.0]]))
    with pytest.raises(DomainError):
        pca(np.array([[2.0, 0.2], [0.2, 1.0]]))


def test_pca_on_reference_curves():
    res = pca(correlation_matrix(CURVES))
    assert res.n_retained == 1
    assert res.eigenvalues[0] == pytest.approx(6.95, abs=0.05)
    assert res.retained_share >= 0.95
    assert np.all(res.loadings[:, 0] > 0.98)
    assert np.all(res.communalities > 0.97)


@st.composite
def correlation_matrices(draw):
    n = draw(st.integers(2, 7))
    X = draw(arrays(float, (n, 12), elements=st.floats(-10, 10)))
    X += np.arange(12) * np.arange(1, n + 1)[:, None] * 1e-3  # avoid flat rows
    return np.corrcoef(X)


@settings(max_examples=60)
@given(correlation_matrices())
def test_pca_reconstruction_and_trace(C):
    if not np.all(np.isfinite(C)):
        return
    res = pca(C)
    V = res.loadings  # = eigvec * sqrt(eigval)
    np.testing.assert_allclose(V @ V.T, C, atol=1e-9)
    assert res.eigenvalues.sum() == pytest.approx(C.shape[0], abs=1e-9)
    assert np.all(res.communalities <= 1 + 1e-9)


def test_pca_rank_one_plus_noise():
    rng = np.random.default_rng(0)
    v = np.ones(6) / np.sqrt(6)
    C = 0.6 * 6 * np.outer(v, v) + 0.4 * np.eye(6) + 0.01 * rng.normal(size=(6, 6))
    C = (C + C.T) / 2
    np.fill_diagonal(C, 1.0)
    res = pca(C)
    assert res.eigenvalues[0] > 1 > res.eigenvalues[1]
    assert res.n_retained == 1


def test_pairwise_r2():
    x = np.array([1.0, 3.0, 2.0, 5.0])
    y = np.array([2.0, 1.0, 4.0, 3.0])
    assert pairwise_r2(x, x) == pytest.approx(1.0)
    assert pairwise_r2(x, y) == pairwise_r2(y, x)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    assert pairwise_r2(x, y) == pytest.approx(1 - resid @ resid / np.sum((y - y.mean()) ** 2))
    assert pairwise_r2(CURVES["O7.5"], CURVES["A7.5"]) == pytest.approx(0.999, abs=0.05)
    assert pairwise_r2(CURVES["O7.5"], CURVES["A3.5"]) == pytest.approx(0.996, abs=0.05)
    with pytest.raises(DomainError):
        pairwise_r2(x, np.ones(4))


def qm(rows):
    rows = np.asarray(rows)
    return ResponseMatrix("q", list(range(len(rows))), rows, "questionnaire")


EDGES = np.arange(-1, 9.0)


def test_histogram_right_closed():
    m = qm(np.full((10, 12), 4))
    counts = histogram(m, 3, EDGES)
    upper = EDGES[1:]
    assert counts.tolist() == [10 if u == 4 else 0 for u in upper]
    # value on an edge belongs to the bin it closes
    assert histogram(m, 1, [0.0, 4.0, 8.0]).tolist() == [10, 0]
    with pytest.raises(DomainError):
        histogram(m, 13, EDGES)
    with pytest.raises(DomainError):
        histogram(m, 1, [0.0, 0.0, 1.0])


@given(arrays(np.int64, (20, 12), elements=st.integers(0, 8)), st.integers(1, 12))
def test_histogram_counts_sum_to_n(rows, B):
    assert histogram(qm(rows), B, EDGES).sum() == 20
