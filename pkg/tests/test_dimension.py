import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochsep.bounds import log_sphere_py_asymptotic, sphere_cap_measure, sphere_py_asymptotic
from stochsep.dimension import (
    effective_dimension,
    effective_dimension_grid,
    empirical_py,
    estimate_from_py,
    invert_log_sphere_formula,
    invert_sphere_formula,
    sphere_normalize,
    witness_limit_dimension,
)
from stochsep.errors import DegenerateInput
from stochsep.sampling import uniform_sphere


def test_orthonormal_rows_have_zero_py():
    np.testing.assert_array_equal(empirical_py(np.eye(5), 0.5), 0.0)


def test_duplicate_point_counts():
    Y = np.vstack([np.eye(4), [[1.0, 0.0, 0.0, 0.0]]])
    py = empirical_py(Y, 0.5)
    assert py[0] >= 1 / 4 and py[4] >= 1 / 4
    assert py[1] == 0.0


def test_empirical_py_brute_force():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((60, 3))
    ref = [sum(1 for i in range(60) if i != j and Y[i] @ Y[j] > 0.5 * (Y[i] @ Y[i])) / 59 for j in range(60)]
    np.testing.assert_array_equal(empirical_py(Y, 0.5), ref)


def test_empirical_py_on_sphere_matches_prediction():
    Y = uniform_sphere(20, 2000, seed=11)
    p_bar = empirical_py(Y, 0.6).mean()
    predicted = sphere_py_asymptotic(20, 0.6, "n-1")
    assert predicted == pytest.approx(2.198e-3, rel=1e-3)
    assert abs(p_bar / predicted - 1) < 0.15
    # Closer still to the exact cap measure.
    assert abs(p_bar / sphere_cap_measure(20, 0.6) - 1) < 0.08


@pytest.mark.parametrize("variant", ["n", "n-1"])
@pytest.mark.parametrize("n", [2.5, 7.0, 30.0, 123.4, 900.0])
def test_inversion_roundtrip(n, variant):
    p = sphere_py_asymptotic(n, 0.8, variant)
    assert invert_sphere_formula(p, 0.8, variant) == pytest.approx(n, rel=1e-9)


@pytest.mark.parametrize("n", [5000.0, 2e5])
def test_log_inversion_beyond_float_range(n):
    lp = log_sphere_py_asymptotic(n, 0.8)
    assert sphere_py_asymptotic(n, 0.8) == 0.0
    assert invert_log_sphere_formula(lp, 0.8) == pytest.approx(n, rel=1e-9)


def test_inversion_example_n30():
    p = sphere_py_asymptotic(30, 0.8)
    est = estimate_from_py(np.full(100, p), 0.8)
    assert abs(est.n_eff - 30.0) < 30 * 1e-9
    assert not est.saturated_zero and not est.saturated_one


@given(st.floats(2.0, 1e5), st.floats(0.0, 1e5), st.floats(0.05, 0.95))
def test_formula_strictly_decreasing_in_n(n, dn, alpha):
    if dn < 1e-6 * n:
        return
    assert sphere_py_asymptotic(n + dn, alpha) < sphere_py_asymptotic(n, alpha) or sphere_py_asymptotic(n, alpha) == 0


def test_saturation_zero_reports_witness_limit():
    est = effective_dimension(np.eye(6) * 3.0, alpha=0.5, preprocess=False)
    assert est.saturated_zero and est.p_bar == 0.0
    m = 6
    n_star = witness_limit_dimension(m, 0.5)
    assert est.n_eff == n_star
    assert m * (m - 1) * sphere_py_asymptotic(n_star, 0.5) == pytest.approx(1.0, rel=1e-9)


def test_saturation_one():
    est = estimate_from_py(np.ones(10), 0.5)
    assert est.saturated_one and est.n_eff == 2.0


def test_estimate_invariants():
    per = np.array([0.0, 0.01, 0.02, 0.03])
    est = estimate_from_py(per, 0.6)
    assert est.p_bar == per.mean()
    assert est.n_eff > 0


def test_sphere_normalize_output_on_sphere():
    rng = np.random.default_rng(2)
    Z = sphere_normalize(rng.standard_normal((300, 8)) @ rng.standard_normal((8, 8)))
    np.testing.assert_allclose(np.linalg.norm(Z, axis=1), 1.0, atol=1e-12)


def test_needs_two_points():
    with pytest.raises(DegenerateInput):
        empirical_py([[1.0, 0.0]], 0.5)


def test_subspace_data_reports_low_dimension():
    rng = np.random.default_rng(1)
    basis = np.linalg.qr(rng.standard_normal((50, 5)))[0]
    Y = rng.standard_normal((3000, 5)) @ basis.T + 1e-9 * rng.standard_normal((3000, 50))
    est = effective_dimension(Y, alpha=0.8)
    assert abs(est.n_eff - 5) <= 1


def test_invariant_under_scale_and_rotation():
    Y = uniform_sphere(12, 1500, seed=3) * np.linspace(0.5, 2.0, 12)
    rng = np.random.default_rng(4)
    Q = np.linalg.qr(rng.standard_normal((12, 12)))[0]
    base = effective_dimension(Y, alpha=0.6)
    for Z in (7.5 * Y, Y @ Q.T):
        other = effective_dimension(Z, alpha=0.6)
        # Whitening removes both maps up to rounding; allow a boundary pair to flip.
        assert abs(other.p_bar - base.p_bar) <= 2 / (1500 * 1499)
        assert other.n_eff == pytest.approx(base.n_eff, rel=1e-3)


def test_no_bias_across_sample_sizes():
    n, alpha = 10, 0.6
    ests = {}
    for m in (1000, 2000, 5000):
        vals = [effective_dimension(uniform_sphere(n, m, seed=100 + s), alpha).n_eff for s in range(3)]
        ests[m] = (np.mean(vals), np.std(vals) / math.sqrt(len(vals)) + 0.05)
    means = [v[0] for v in ests.values()]
    err = max(v[1] for v in ests.values())
    assert max(means) - min(means) < 4 * err + 0.3


def test_grid_reports_every_alpha():
    Y = uniform_sphere(15, 2000, seed=5)
    grid = effective_dimension_grid(Y, [0.4, 0.5, 0.6])
    assert [e.alpha for e in grid.estimates] == [0.4, 0.5, 0.6]
    assert abs(grid.n_eff - 15) < 2
    d = grid.to_dict()
    assert len(d["per_alpha"]) == 3
