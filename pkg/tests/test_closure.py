"""Cell problems and transport coefficients."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kinsirs.closure import (averaged_rates, compute_closure, compute_D_Gamma,
                             compute_kappa_theta, confinement_coefficients,
                             solve_reorientation_inverse)
from kinsirs.grids import (ParamFields, SpatialGrid,
                           make_circle_velocity_set, make_two_speed_set)


def _constant_params(grid, vs, lam, eta=0.0, xi=0.0):
    return ParamFields.constant(grid, vs, 0.1, 0.75, 0.5, lam, eta=eta, xi=xi)


def test_circle_coefficients_reference_values():
    """v0 = 1, lam = 0.5, eta = xi = 1: the trace diffusivity is
    v0^2 / lam = 2 for every class and the drift response is
    (eta + xi) v0^2 / lam = 4; the circle quadrature is exact here."""
    grid = SpatialGrid.square(1, 1.0)
    vs = make_circle_velocity_set(64, 1.0)
    params = _constant_params(grid, vs, 0.5, eta=1.0, xi=1.0)
    c = compute_closure(params, vs)
    assert np.max(np.abs(c.D - 2.0)) < 1e-12
    assert np.max(np.abs(c.Gamma - 4.0)) < 1e-12


def test_diffusivity_scales_per_class_with_lambda():
    grid = SpatialGrid.square(2, 1.0)
    vs = make_circle_velocity_set(16, 1.0)
    params = _constant_params(grid, vs, (1.0, 2.0, 4.0))
    c = compute_closure(params, vs)
    assert_allclose(c.D[0], 1.0, rtol=1e-14)
    assert_allclose(c.D[1], 0.5, rtol=1e-14)
    assert_allclose(c.D[2], 0.25, rtol=1e-14)


def test_kappa_theta_shapes_and_proportionality():
    grid = SpatialGrid.square(2, 1.0)
    vs = make_circle_velocity_set(8, 1.0)
    params = _constant_params(grid, vs, 2.0, eta=0.5, xi=1.0)
    kappa, theta = compute_kappa_theta(params, vs)
    assert kappa.shape == (3, 2, 2, 8, 2)
    assert theta.shape == (2, 2, 8, 2)
    # theta = (eta + xi) * lam_S / lam * kappa_S pointwise
    assert_allclose(theta, 1.5 * kappa[0], rtol=1e-14)


def test_generic_solver_matches_closed_forms():
    grid = SpatialGrid.square(3, 1.0)
    vs = make_circle_velocity_set(16, 1.0)
    r = np.random.default_rng(12)
    lam = r.uniform(0.5, 2.0, size=(3, 3, 3))
    params = ParamFields(
        alpha=np.full((3, 3, vs.nv), 0.1),
        beta=np.full((3, 3, vs.nv), 0.75),
        gamma=np.full((3, 3, vs.nv), 0.5),
        lam=lam,
        eta=np.full((3, 3), 0.7),
        xi=np.full((3, 3), 0.9),
    )
    generic = compute_closure(params, vs, method="generic")
    analytic = compute_closure(params, vs, method="analytic")
    assert np.max(np.abs(generic.kappa - analytic.kappa)) < 1e-12
    assert np.max(np.abs(generic.theta - analytic.theta)) < 1e-12
    assert np.max(np.abs(generic.D - analytic.D)) < 1e-12
    assert np.max(np.abs(generic.Gamma - analytic.Gamma)) < 1e-12


def test_unknown_method_is_rejected():
    grid = SpatialGrid.square(1, 1.0)
    vs = make_circle_velocity_set(4, 1.0)
    with pytest.raises(ValueError):
        compute_closure(_constant_params(grid, vs, 1.0), vs, method="spectral")


def test_inverse_solve_satisfies_the_kernel_equation():
    vs = make_circle_velocity_set(12, 1.0)
    g = vs.velocities[:, 0] * vs.equilibrium
    lam = 0.7
    f = solve_reorientation_inverse(g, lam, vs)
    # Q[f] = lam (mean - f) must equal -g
    q = lam * ((vs.weights @ f) / vs.total_measure - f)
    assert np.max(np.abs(q + g)) < 1e-14
    # and the solution is the closed form vF / lam
    assert_allclose(f, g / lam, atol=1e-14)


def test_inverse_solve_rejects_rhs_with_mass():
    vs = make_circle_velocity_set(8, 1.0)
    with pytest.raises(ValueError, match="incompatible"):
        solve_reorientation_inverse(np.ones(vs.nv), 1.0, vs)


def test_averaged_rates_reproduce_constants():
    vs = make_circle_velocity_set(8, 1.0)
    shape = (4, 4, vs.nv)
    a0, b0, g0 = averaged_rates(np.full(shape, 0.1), np.full(shape, 0.75),
                                np.full(shape, 0.5), vs)
    assert_allclose(a0, 0.1, rtol=1e-14)
    assert_allclose(b0, 0.75, rtol=1e-14)
    assert_allclose(g0, 0.5, rtol=1e-14)


def test_spatial_means_keys_and_values():
    grid = SpatialGrid.square(2, 1.0)
    vs = make_circle_velocity_set(8, 1.0)
    c = compute_closure(_constant_params(grid, vs, 2.0), vs)
    means = c.spatial_means()
    assert set(means) == {"alpha", "beta", "gamma", "D", "Gamma"}
    assert means["beta"] == pytest.approx(0.75, rel=1e-14)
    assert means["D"][0] == pytest.approx(0.5, rel=1e-14)


def test_confinement_coefficients_squared_speed_law():
    conf = confinement_coefficients((1.0, 0.0, 0.5), (1.0, 1.0, 1.0), 0.0, 0.0)
    assert np.array_equal(conf.D, [1.0, 0.0, 0.25])
    assert np.array_equal(conf.kappa_plus, [0.5, 0.0, 0.25])
    assert np.array_equal(conf.kappa_minus, -conf.kappa_plus)

    drift = confinement_coefficients((2.0, 1.0, 1.0), (4.0, 1.0, 1.0), 2.0, 1.0)
    assert drift.Gamma == 3.0      # (eta + xi) v_S^2 / lam_S = 3 * 4 / 4


def test_confinement_coefficients_input_validation():
    with pytest.raises(ValueError):
        confinement_coefficients((1.0, 1.0), (1.0, 1.0, 1.0), 0.0, 0.0)
    with pytest.raises(ValueError):
        confinement_coefficients((1.0, 1.0, 1.0), (1.0, 0.0, 1.0), 0.0, 0.0)
    with pytest.raises(ValueError):
        confinement_coefficients((1.0, -1.0, 1.0), (1.0, 1.0, 1.0), 0.0, 0.0)


def test_two_speed_set_closure_matches_confinement_values():
    """The generic machinery on a symmetric two-speed set must give the
    same D as the dedicated confinement formula."""
    grid = SpatialGrid.line(2, 1.0)
    vs = make_two_speed_set(1.0)
    params = ParamFields.constant(grid, vs, 0.0, 0.75, 0.5, (1.0, 2.0, 0.5))
    c = compute_closure(params, vs)
    conf = confinement_coefficients((1.0, 1.0, 1.0), (1.0, 2.0, 0.5), 0.0, 0.0)
    for j in range(3):
        assert_allclose(c.D[j], conf.D[j], rtol=1e-14)
