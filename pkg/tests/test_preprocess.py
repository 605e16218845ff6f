import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochsep.errors import DegenerateInput, SingularComponent
from stochsep.preprocess import (
    ConditionNumber,
    Kaiser,
    SpectralModel,
    VarianceFraction,
    WhiteningModel,
    fit_pca,
    fit_whitening,
    gram_preprocess,
    gram_project,
    select_components,
    whiten,
)
from stochsep.separability import dataset_separability


def model_with(eigvals):
    d = len(eigvals)
    return SpectralModel(np.zeros(d), np.eye(d), np.asarray(eigvals, dtype=float))


# -- fit_pca -----------------------------------------------------------------


def test_fit_pca_axis_variance():
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]])
    model = fit_pca(X)
    np.testing.assert_allclose(model.mean, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(model.eigvals, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(np.abs(model.eigvecs[:, 0]), [1.0, 0.0], atol=1e-15)


def test_fit_pca_repeated_point_has_zero_spectrum():
    X = np.tile([3.0, -1.0, 2.0], (7, 1))
    np.testing.assert_array_equal(fit_pca(X).eigvals, 0.0)


def test_fit_pca_standard_normal_spectrum():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((500, 5))
    model = fit_pca(X)
    assert np.all((model.eigvals > 0.7) & (model.eigvals < 1.3))
    # Independent covariance route.
    ref = np.sort(np.linalg.eigvalsh(np.cov(X, rowvar=False)))[::-1]
    np.testing.assert_allclose(model.eigvals, ref, rtol=1e-10)


def test_fit_pca_reconstructs_covariance():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((40, 6)) @ rng.standard_normal((6, 6))
    model = fit_pca(X)
    cov = np.cov(X, rowvar=False)
    err = np.linalg.norm(model.covariance() - cov) / np.linalg.norm(cov)
    assert err < 1e-8
    np.testing.assert_allclose(model.eigvecs.T @ model.eigvecs, np.eye(6), atol=1e-8)
    assert np.all(np.diff(model.eigvals) <= 0)


def test_fit_pca_sign_convention():
    rng = np.random.default_rng(3)
    model = fit_pca(rng.standard_normal((30, 4)))
    V = model.eigvecs
    idx = np.argmax(np.abs(V), axis=0)
    assert np.all(V[idx, np.arange(4)] > 0)


@pytest.mark.parametrize("bad", [np.ones((1, 3)), np.array([[1.0, np.nan], [0.0, 1.0]])])
def test_fit_pca_rejects_degenerate(bad):
    with pytest.raises(DegenerateInput):
        fit_pca(bad)


# -- select_components -------------------------------------------------------


def test_condition_number_rule():
    assert select_components(model_with([4, 1, 0.25]), ConditionNumber(10)) == 2


def test_variance_fraction_rule():
    assert select_components(model_with([4, 1, 0.25]), VarianceFraction(0.95)) == 2


def test_kaiser_rule_equal_eigvals():
    assert select_components(model_with([2, 2, 2]), Kaiser(1.0)) == 3


def test_rule_never_returns_zero():
    assert select_components(model_with([1.0, 0.5]), Kaiser(100.0)) == 1


def test_all_zero_spectrum_rejected():
    with pytest.raises(DegenerateInput):
        select_components(model_with([0.0, 0.0]), ConditionNumber(10))


@given(
    st.lists(st.floats(1e-6, 1e3), min_size=1, max_size=12),
    st.floats(1.0, 1e4),
    st.floats(1.0, 1e4),
)
def test_condition_rule_monotone_in_kappa(vals, k1, k2):
    m = model_with(sorted(vals, reverse=True))
    lo, hi = sorted((k1, k2))
    assert select_components(m, ConditionNumber(lo)) <= select_components(m, ConditionNumber(hi))


@given(
    st.lists(st.floats(1e-6, 1e3), min_size=1, max_size=12),
    st.floats(1e-3, 1.0),
    st.floats(1e-3, 1.0),
)
def test_variance_rule_monotone_in_fraction(vals, f1, f2):
    m = model_with(sorted(vals, reverse=True))
    lo, hi = sorted((f1, f2))
    assert select_components(m, VarianceFraction(lo)) <= select_components(m, VarianceFraction(hi))


# -- whiten ------------------------------------------------------------------


def test_whiten_symmetric_cross():
    X = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, -2.0]])
    Z, wm = whiten(X, fit_pca(X), 2)
    assert Z.shape == (4, 2)
    np.testing.assert_allclose(np.cov(Z, rowvar=False), np.eye(2), atol=1e-12)
    assert wm.kappa == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(0, 100))
def test_whitening_idempotent(seed, d, extra):
    rng = np.random.default_rng(seed)
    m = d + 2 + extra
    X = rng.standard_normal((m, d)) @ (rng.standard_normal((d, d)) + 3 * np.eye(d)) + rng.normal(size=d)
    model = fit_pca(X)
    k = select_components(model, ConditionNumber(1e6))
    Z, _ = whiten(X, model, k)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-8)
    assert np.linalg.norm(np.cov(Z, rowvar=False) - np.eye(k)) < 1e-6
    np.testing.assert_allclose(fit_pca(Z).eigvals, 1.0, atol=1e-6)


def test_whitened_anisotropic_gaussian_is_isotropic():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((1000, 2)) * np.array([3.0, 1.0])
    Z, _ = whiten(X, fit_pca(X), 2)
    v = Z.var(axis=0, ddof=1)
    assert abs(v[0] - v[1]) / v.max() < 0.05
    # Pairwise differences: per-axis spread of x_i - x_j also matches.
    i, j = rng.integers(0, 1000, (2, 20000))
    dv = (Z[i] - Z[j]).var(axis=0)
    assert abs(dv[0] - dv[1]) / dv.max() < 0.05


def test_whiten_rejects_singular_component():
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SingularComponent):
        whiten(X, fit_pca(X), 2)


def test_whitening_model_json_roundtrip():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 4))
    Z, wm = fit_whitening(X)
    back = WhiteningModel.from_dict(wm.to_dict())
    np.testing.assert_array_equal(back.transform(X), Z)
    assert back.retained == wm.retained and back.kappa == wm.kappa


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_verdicts_after_whitening_invariant_under_affine_maps(seed):
    rng = np.random.default_rng(seed)
    d, m = 6, 120
    X = rng.standard_normal((m, d))
    A = rng.standard_normal((d, d)) + 2 * np.eye(d)
    if np.linalg.cond(A) > 1e3:
        A += 5 * np.eye(d)
    b = rng.normal(scale=5.0, size=d)
    keep_all = ConditionNumber(1e12)
    Z1, _ = fit_whitening(X, keep_all)
    Z2, _ = fit_whitening(X @ A.T + b, keep_all)
    for alpha in (0.3, 0.6, 0.9):
        r1 = dataset_separability(Z1, alpha)
        r2 = dataset_separability(Z2, alpha)
        assert set(r1.violating_pairs) == set(r2.violating_pairs)


# -- Gram preprocessing ------------------------------------------------------


def test_gram_hand_example():
    G = gram_preprocess(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    np.testing.assert_allclose(G, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_gram_symmetric_and_psd():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((9, 40))
    G = gram_preprocess(X)
    assert np.array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() >= -1e-8 * np.trace(G)


def test_gram_spectrum_matches_covariance_small():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((5, 20))
    g = np.sort(np.linalg.eigvalsh(gram_preprocess(X)))[::-1]
    c = np.sort(np.linalg.eigvalsh(np.cov(X, rowvar=False)))[::-1][:5]
    # Centering leaves rank m - 1.
    np.testing.assert_allclose(g[:4], c[:4] * 4, rtol=1e-6)
    assert abs(g[4]) < 1e-10 * g[0]


def test_gram_correlation_mode():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((4, 30))
    np.testing.assert_allclose(gram_preprocess(X, correlation=True), np.corrcoef(X), atol=1e-12)


def test_gram_rejects_tall_input():
    with pytest.raises(DegenerateInput):
        gram_preprocess(np.ones((5, 3)))


def test_gram_projection_of_training_rows_reproduces_gram():
    rng = np.random.default_rng(12)
    X = rng.standard_normal((6, 50))
    np.testing.assert_allclose(gram_project(X, X), gram_preprocess(X), atol=1e-12)
    np.testing.assert_allclose(gram_project(X, X, correlation=True), np.corrcoef(X), atol=1e-12)


@pytest.mark.slow
def test_gram_wide_case_study_scale():
    m, d = 64, 500_000
    X = np.empty((m, d))
    for i in range(m):
        X[i] = np.random.default_rng([7, i]).standard_normal(d)
    G = gram_preprocess(X)
    assert G.shape == (m, m)
    assert np.array_equal(G, G.T)
    ev = np.linalg.eigvalsh(G)
    assert ev.min() >= -1e-8 * np.trace(G)
    # Centering removes exactly one direction.
    assert np.sum(ev > 1e-8 * ev.max()) == m - 1
