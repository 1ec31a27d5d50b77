import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nskfluid import FluidField1D, GaussianState, ModelParameters, quantum_preset, uncertainty_report
from nskfluid.states import gaussian_uncertainty_product, make_min_uncertainty_state, sample_on_grid
from nskfluid.uncertainty import (
    DensityFloorError,
    FieldError,
    expectation,
    log_density_gradient,
    min_std_product,
    momentum_fields,
)


def test_field_validation():
    x = np.linspace(0, 1, 5)
    with pytest.raises(FieldError):
        FluidField1D(x[:2], np.ones(2), np.zeros(2))
    with pytest.raises(FieldError):
        FluidField1D(x, -np.ones(5), np.zeros(5))
    with pytest.raises(FieldError):
        FluidField1D(x[::-1], np.ones(5), np.zeros(5))
    with pytest.raises(FieldError):
        FluidField1D(np.array([0, 0.1, 0.5, 0.6, 1.0]), np.ones(5), np.zeros(5))
    with pytest.raises(FieldError):
        FluidField1D(x, np.ones(5), np.array([0, np.nan, 0, 0, 0]))


def test_check_mass():
    x = np.linspace(0, 1, 11)
    f = FluidField1D(x, 2 * np.ones(11), np.zeros(11))
    with pytest.raises(FieldError):
        f.check_mass()
    FluidField1D(x, np.ones(11), np.zeros(11)).check_mass()


def test_expectation_normalises(grid):
    s = GaussianState(a=1.0)
    f = FluidField1D(grid, 3.0 * s.density(grid), np.zeros_like(grid))
    assert expectation(f, grid**2) == pytest.approx(0.5, rel=1e-10)


def test_log_gradient_of_gaussian(grid):
    s = GaussianState(a=1.5, x0=0.2)
    g = log_density_gradient(sample_on_grid(s, grid))
    core = np.abs(grid - 0.2) < 4
    np.testing.assert_allclose(g[core], -3.0 * (grid[core] - 0.2), atol=1e-5)


def test_log_gradient_rejects_zeros():
    x = np.linspace(-1, 1, 9)
    rho = np.array([0, 0, 1, 2, 0, 2, 1, 0, 0], dtype=float)
    with pytest.raises(DensityFloorError):
        log_density_gradient(FluidField1D(x, rho, np.zeros(9)), rho_floor=0.0)


def test_quantum_momenta_are_osmotic_plus_current(grid):
    p = quantum_preset()
    f = sample_on_grid(GaussianState(a=1.0, b=0.4), grid)
    plus, minus = momentum_fields(f, p)
    osm = p.nu * log_density_gradient(f)
    np.testing.assert_allclose(0.5 * (plus + minus), f.v, atol=1e-12)
    np.testing.assert_allclose(0.5 * (plus - minus), osm, atol=1e-12)


def test_report_matches_analytic_gaussian(grid, viscous_params):
    s = GaussianState(a=0.9, b=-0.6)
    rep = uncertainty_report(sample_on_grid(s, grid), viscous_params)
    var, std = gaussian_uncertainty_product(s, viscous_params)
    assert rep.lhs == pytest.approx(var, rel=1e-6)
    assert rep.sigma2_x == pytest.approx(s.sigma2_x, rel=1e-10)
    assert rep.cov_xv == pytest.approx(s.cov_xv, rel=1e-10)
    assert rep.holds


def test_minimum_state_saturates(grid, viscous_params):
    s = make_min_uncertainty_state(viscous_params, 1.1)
    rep = uncertainty_report(sample_on_grid(s, grid), viscous_params, rel_tol=1e-6)
    assert rep.margin == pytest.approx(0.0, abs=1e-6 * rep.lhs)
    assert rep.std_product == pytest.approx(min_std_product(viscous_params), rel=1e-6)


def test_as_row_keys(grid):
    rep = uncertainty_report(sample_on_grid(GaussianState(a=1.0), grid), quantum_preset())
    assert list(rep.as_row()) == ["sigma2_x", "sigma2_p", "cov_xv", "lhs", "rhs", "std_product",
                                  "rhs_sqrt", "margin", "holds"]


component = st.tuples(st.floats(0.2, 1.0), st.floats(-3.0, 3.0), st.floats(0.5, 3.0))


@settings(max_examples=60, deadline=None)
@given(st.lists(component, min_size=1, max_size=3), st.floats(-1.0, 1.0), st.floats(-0.5, 0.5),
       st.floats(0.0, 2.0), st.floats(0.0, 1.5), st.floats(0.3, 2.0))
def test_inequality_on_gaussian_mixtures(comps, b, c2, kappa, xi, nu):
    if abs(kappa - xi * xi) < 1e-6:
        return
    x = np.linspace(-14, 14, 6001)
    rho = sum(w * math.sqrt(a / math.pi) * np.exp(-a * (x - m) ** 2) for w, m, a in comps)
    rho /= np.trapezoid(rho, x)
    v = b * x + c2 * np.tanh(x)
    params = ModelParameters.from_transport(kappa, xi, nu)
    rep = uncertainty_report(FluidField1D(x, rho, v), params, rel_tol=1e-6)
    assert rep.holds, rep
