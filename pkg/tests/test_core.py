import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import brute_distances, brute_scatter, random_mask
from mpca import _fallback
from mpca.core import (
    FULL_SCALE,
    Dataset,
    ScaleInterval,
    WeightMask,
    binary_weights,
    center,
    covariance_pca,
    eigendecompose,
    laplacian,
    mpca,
    normalize,
    pairwise_distances,
    scale_scatter,
    scatter_matrix,
)
from mpca.errors import DegenerateColumnError, EmptyScaleError, InvalidInputError
from mpca.projector import projector_distance, projector_from_decomposition


def mask_from(W):
    W = np.asarray(W, dtype=float)
    return WeightMask(W, int(np.triu(W, 1).sum()))


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(3, 9), st.integers(1, 4)).flatmap(
    lambda s: arrays(np.float64, s, elements=finite))


# center / normalize

def test_center_two_points():
    ds = center([[1, 1], [3, 3]])
    np.testing.assert_array_equal(ds.values, [[-1, -1], [1, 1]])
    np.testing.assert_array_equal(ds.mean, [2, 2])
    assert ds.centered


def test_center_zero_mean_unchanged():
    X = np.array([[1.0, -2.0], [-1.0, 2.0]])
    ds = center(X)
    np.testing.assert_array_equal(ds.values, X)
    np.testing.assert_array_equal(ds.mean, [0, 0])


def test_center_hand_means():
    ds = center([[0, 0], [0, 0], [3, 0]])
    np.testing.assert_allclose(ds.values, [[-1, 0], [-1, 0], [2, 0]])
    np.testing.assert_allclose(ds.mean, [1, 0])


def test_center_needs_two_rows():
    with pytest.raises(InvalidInputError):
        center([[1.0, 2.0]])


def test_dataset_values_read_only():
    ds = center([[0.0], [1.0]])
    with pytest.raises(ValueError):
        ds.values[0, 0] = 5.0


@given(matrices)
def test_centered_columns_sum_to_zero(X):
    ds = center(X)
    scale = max(1.0, float(np.abs(X).max()))
    assert np.all(np.abs(ds.values.sum(axis=0)) <= 1e-9 * ds.n * scale)


def test_normalize_none_identity():
    X = np.array([[1.0, 5.0], [2.0, 7.0]])
    np.testing.assert_array_equal(normalize(X, "none"), X)


def test_normalize_mean_divide():
    out = normalize(np.array([[2.0], [4.0]]), "mean-divide")
    np.testing.assert_allclose(out[:, 0], [2 / 3, 4 / 3])


def test_normalize_zscore_sample_std():
    out = normalize(np.array([[0.0], [2.0]]), "z-score")
    # sample std of {0, 2} is sqrt(2)
    np.testing.assert_allclose(out[:, 0], [-1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_normalize_degenerate_columns():
    with pytest.raises(DegenerateColumnError) as e:
        normalize(np.array([[1.0, -1.0], [2.0, 1.0]]), "mean")
    assert e.value.column == 1
    with pytest.raises(DegenerateColumnError) as e:
        normalize(np.array([[3.0, 1.0], [3.0, 2.0]]), "zscore")
    assert e.value.column == 0


def test_normalize_unknown_mode():
    with pytest.raises(InvalidInputError):
        normalize(np.eye(2), "minmax")


# distances

def test_distance_345():
    d = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert d.entries[0, 1] == 5.0
    assert d.d_min == d.d_max == 5.0


def test_distance_collinear():
    d = pairwise_distances(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    assert sorted(d.entries[np.triu_indices(3, 1)]) == [1.0, 1.0, 2.0]
    assert (d.d_min, d.d_max) == (1.0, 2.0)


def test_distance_oracle(rng):
    X = rng.standard_normal((10, 3))
    np.testing.assert_allclose(pairwise_distances(X).entries, brute_distances(X), rtol=0, atol=1e-12)


def test_all_rows_identical():
    d = pairwise_distances(np.ones((4, 2)))
    assert d.all_zero and d.d_min is None and d.d_max == 0.0
    with pytest.raises(InvalidInputError):
        mpca(np.ones((4, 2)), FULL_SCALE, 1)


@given(matrices)
def test_distance_matrix_invariants(X):
    d = pairwise_distances(X)
    E = d.entries
    assert np.all(np.diag(E) == 0)
    assert np.array_equal(E, E.T)
    assert np.all(E >= 0)
    if not d.all_zero:
        assert 0 < d.d_min <= d.d_max


# scale intervals and weights

def test_scale_interval_validation():
    with pytest.raises(InvalidInputError):
        ScaleInterval(0.5, 0.5)
    with pytest.raises(InvalidInputError):
        ScaleInterval(0.2, 1.5, standard=True)
    with pytest.raises(InvalidInputError):
        ScaleInterval(-1.0, 2.0)
    assert ScaleInterval(0.25, 0.5, standard=True).resolve(4.0) == (1.0, 2.0)
    assert ScaleInterval(1.0, 3.0).resolve(100.0) == (1.0, 3.0)


def test_weights_out_and_in_range():
    d = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
    w = binary_weights(d, ScaleInterval(0, 4))
    assert w.selected_pair_count == 0 and w.weights[0, 1] == 0
    w = binary_weights(d, ScaleInterval(0, 6))
    assert w.selected_pair_count == 1 and w.weights[0, 1] == 1


def test_weights_standard_resolution():
    d = pairwise_distances(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    w = binary_weights(d, ScaleInterval(0, 0.6, standard=True))
    assert w.selected_pair_count == 2
    np.testing.assert_array_equal(w.weights, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def test_weights_inclusive_endpoints():
    d = pairwise_distances(np.array([[0.0], [1.0], [3.0]]))
    w = binary_weights(d, ScaleInterval(1.0, 2.0))
    assert w.weights[0, 1] == 1 and w.weights[1, 2] == 1 and w.weights[0, 2] == 0


@given(matrices, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_widening_keeps_selected_pairs(X, a, b, c, e):
    lo_in, hi_in = sorted((a, b))
    if hi_in - lo_in < 1e-6:
        return
    lo_out, hi_out = min(lo_in, c * lo_in), max(hi_in, hi_in + e * (1 - hi_in))
    d = pairwise_distances(X)
    inner = binary_weights(d, ScaleInterval(lo_in, hi_in, True)).weights
    outer = binary_weights(d, ScaleInterval(lo_out, hi_out, True)).weights
    assert np.all(outer >= inner)


# Laplacian and scatter

def test_laplacian_path():
    L = laplacian(mask_from([[0, 1, 0], [1, 0, 1], [0, 1, 0]]))
    np.testing.assert_array_equal(L, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_laplacian_empty_and_complete():
    np.testing.assert_array_equal(laplacian(mask_from(np.zeros((3, 3)))), np.zeros((3, 3)))
    np.testing.assert_array_equal(laplacian(mask_from(np.ones((3, 3)) - np.eye(3))),
                                  [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_laplacian_invariants(rng):
    for n in (2, 5, 12):
        W = random_mask(rng, n)
        L = laplacian(mask_from(W))
        assert np.all(np.abs(L.sum(axis=0)) <= 1e-9 * n)
        assert np.all(np.abs(L.sum(axis=1)) <= 1e-9 * n)
        off = L[~np.eye(n, dtype=bool)]
        assert set(np.unique(off)) <= {0.0, -1.0}
        np.testing.assert_array_equal(np.diag(L), W.sum(axis=1))
        assert np.linalg.eigvalsh(L).min() >= -1e-9


def test_scatter_two_points():
    ds = center([[1.0, 0.0], [-1.0, 0.0]])
    L = laplacian(mask_from([[0, 1], [1, 0]]))
    np.testing.assert_array_equal(scatter_matrix(ds, L), [[4, 0], [0, 0]])


def test_scatter_zero_laplacian(rng):
    ds = center(rng.standard_normal((5, 3)))
    np.testing.assert_array_equal(scatter_matrix(ds, np.zeros((5, 5))), np.zeros((3, 3)))


def test_scatter_oracle(rng):
    ds = center(rng.standard_normal((8, 3)))
    W = random_mask(rng, 8)
    M = scatter_matrix(ds, laplacian(mask_from(W)))
    np.testing.assert_allclose(M, brute_scatter(ds.values, W), rtol=0, atol=1e-10)


def test_scatter_dimension_mismatch(rng):
    with pytest.raises(InvalidInputError):
        scatter_matrix(center(rng.standard_normal((4, 2))), np.zeros((3, 3)))


def test_full_weights_give_scaled_covariance(rng):
    for _ in range(5):
        n = int(rng.integers(3, 30))
        ds = center(rng.standard_normal((n, 4)))
        L = laplacian(mask_from(np.ones((n, n)) - np.eye(n)))
        np.testing.assert_allclose(L, n * np.eye(n) - np.ones((n, n)), atol=1e-12)
        cov = np.cov(ds.values, rowvar=False, bias=True)
        np.testing.assert_allclose(scatter_matrix(ds, L), n * n * cov, rtol=1e-10, atol=1e-9)


def test_fused_scatter_matches_laplacian_route(rng):
    ds = center(rng.standard_normal((30, 4)))
    d = pairwise_distances(ds)
    for lo, hi in [(0, 1), (0, 0.3), (0.2, 0.7), (0.6, 1.0)]:
        iv = ScaleInterval(lo, hi, standard=True)
        mask = binary_weights(d, iv)
        M_route = scatter_matrix(ds, laplacian(mask))
        M_fused, count = scale_scatter(ds, d, iv)
        assert count == mask.selected_pair_count
        np.testing.assert_allclose(M_fused, M_route, rtol=1e-12, atol=1e-10)


@given(matrices, st.integers(0, 2**32 - 1))
def test_scatter_is_psd(X, seed):
    ds = center(X)
    W = random_mask(np.random.default_rng(seed), ds.n)
    M = scatter_matrix(ds, laplacian(mask_from(W)))
    scale = max(1.0, float(np.abs(M).max()))
    assert np.linalg.eigvalsh(M).min() >= -1e-9 * scale


@given(matrices, st.integers(0, 2**32 - 1))
def test_quadratic_form_identity(X, seed):
    ds = center(X)
    W = random_mask(np.random.default_rng(seed), ds.n)
    L = laplacian(mask_from(W))
    lhs = sum(float(ds.values[:, a] @ L @ ds.values[:, a]) for a in range(ds.m))
    iu = np.triu_indices(ds.n, 1)
    D2 = brute_distances(ds.values) ** 2
    rhs = float((W[iu] * D2[iu]).sum())
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


# backend agreement

def test_backend_matches_fallback(rng):
    from mpca import _backend

    X = rng.standard_normal((40, 5))
    D = _fallback.pairwise_distances(X)
    np.testing.assert_allclose(_backend.pairwise_distances(X), D, atol=1e-12)
    Y = X[:, :2]
    for lo, hi in [(0.0, np.inf), (0.5, 2.0), (10.0, 20.0)]:
        Mb, cb = _backend.masked_scatter(X, D, lo, hi)
        Mf, cf = _fallback.masked_scatter(X, D, lo, hi)
        assert cb == cf
        np.testing.assert_allclose(Mb, Mf, rtol=1e-12, atol=1e-10)
        sb, sf = _backend.masked_pair_sums(Y, D, lo, hi), _fallback.masked_pair_sums(Y, D, lo, hi)
        assert sb[2] == sf[2]
        np.testing.assert_allclose(sb[:2], sf[:2], rtol=1e-12, atol=1e-12)
        assert _backend.count_in_range(D, lo, hi) == _fallback.count_in_range(D, lo, hi) == cb


# eigendecomposition

def test_eig_diagonal():
    dec = eigendecompose(np.diag([2.0, 1.0]))
    np.testing.assert_array_equal(dec.eigenvalues, [2, 1])
    np.testing.assert_allclose(np.abs(dec.eigenvectors[:, 0]), [1, 0])


def test_eig_identity_orthonormal():
    dec = eigendecompose(np.eye(3))
    np.testing.assert_allclose(dec.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(dec.eigenvectors.T @ dec.eigenvectors, np.eye(3), atol=1e-12)


def test_eig_two_by_two():
    dec = eigendecompose(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(dec.eigenvalues, [3, 1], atol=1e-12)
    np.testing.assert_allclose(dec.eigenvectors[:, 0], np.array([1, 1]) / np.sqrt(2), atol=1e-12)


def test_eig_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        eigendecompose(np.array([[1.0, np.nan], [np.nan, 1.0]]))


@given(matrices, st.integers(0, 2**32 - 1))
def test_eig_invariants(X, seed):
    ds = center(X)
    W = random_mask(np.random.default_rng(seed), ds.n)
    M = scatter_matrix(ds, laplacian(mask_from(W)))
    dec = eigendecompose(M)
    lam, E = dec.eigenvalues, dec.eigenvectors
    scale = max(1.0, float(np.abs(M).max()))
    assert np.all(np.diff(lam) <= 0)
    assert lam[-1] >= -1e-9 * scale
    np.testing.assert_allclose(E.T @ E, np.eye(ds.m), atol=1e-9)
    for i in range(ds.m):
        assert np.all(np.abs(M @ E[:, i] - lam[i] * E[:, i]) <= 1e-7 * (scale + abs(lam[i])))
        col = E[:, i]
        assert col[np.argmax(np.abs(col))] > 0


# mpca

def test_mpca_full_scale_matches_covariance(rng):
    ds = center(rng.standard_normal((40, 4)) * [3, 2, 1, 0.5])
    dec, proj, mask = mpca(ds, FULL_SCALE, 2)
    ref = covariance_pca(ds)
    for k in (1, 2, 3):
        assert projector_distance(projector_from_decomposition(dec, k),
                                  projector_from_decomposition(ref, k)) < 1e-8
    assert proj.shape == (40, 2)
    assert mask.selected_pair_count == mask.total_pairs


def test_mpca_four_points():
    dec, proj, _ = mpca(np.array([[1, 0], [-1, 0], [0, 0.1], [0, -0.1]]), FULL_SCALE, 1)
    np.testing.assert_allclose(dec.eigenvectors[:, 0], [1, 0], atol=1e-12)
    np.testing.assert_allclose(proj[:, 0], [1, -1, 0, 0], atol=1e-12)


def test_mpca_empty_scale(rng):
    X = rng.standard_normal((10, 2))
    d = pairwise_distances(center(X))
    with pytest.raises(EmptyScaleError) as e:
        mpca(X, ScaleInterval(0, d.d_min / 2), 1)
    assert e.value.upper == d.d_min / 2


def test_mpca_centers_raw_input(rng):
    X = rng.standard_normal((15, 3)) + 100.0
    a = mpca(X, FULL_SCALE, 2)
    b = mpca(center(X), FULL_SCALE, 2)
    np.testing.assert_array_equal(a.projections, b.projections)


def test_mpca_k_bounds(rng):
    with pytest.raises(InvalidInputError):
        mpca(rng.standard_normal((5, 2)), FULL_SCALE, 3)
    with pytest.raises(InvalidInputError):
        mpca(rng.standard_normal((5, 2)), FULL_SCALE, 0)


def test_full_scale_projection_covariance_is_diagonal(rng):
    ds = center(rng.standard_normal((60, 4)) @ rng.standard_normal((4, 4)))
    _, proj, _ = mpca(ds, FULL_SCALE, 4)
    C = np.cov(proj, rowvar=False)
    off = C - np.diag(np.diag(C))
    assert np.abs(off).max() < 1e-8 * max(1.0, np.abs(C).max())


def test_dataset_requires_shape():
    with pytest.raises(InvalidInputError):
        Dataset(np.zeros(3))


def test_pure_python_backend_selectable():
    import os
    import subprocess
    import sys

    code = "import mpca; print(mpca.BACKEND)"
    env = dict(os.environ, MPCA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
