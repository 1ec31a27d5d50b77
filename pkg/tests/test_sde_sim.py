import math

import numpy as np
import pytest

from nskfluid import GaussianState, quantum_preset
from nskfluid.sde_sim import (
    Ensemble,
    EnsembleDivergence,
    GridDrift,
    drift_field,
    empirical_compare,
    mean_momentum,
    propagate_ensemble,
    sample_positions,
)
from nskfluid.states import sample_on_grid

X = np.linspace(-8, 8, 2049)


def test_sampling_reproducible():
    f = sample_on_grid(GaussianState(a=1.0), X)
    a = sample_positions(f, 1000, 7)
    b = sample_positions(f, 1000, 7)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, sample_positions(f, 1000, 8).positions)


def test_restart_is_bitwise_identical():
    f = sample_on_grid(GaussianState(a=1.0), X)
    drift = drift_field(f, quantum_preset())
    e = sample_positions(f, 500, 3)
    whole = propagate_ensemble(e, drift, 0.5, 1e-3, 20)
    split = propagate_ensemble(propagate_ensemble(e, drift, 0.5, 1e-3, 8), drift, 0.5, 1e-3, 12)
    np.testing.assert_array_equal(whole.positions, split.positions)
    assert split.step == 20


def test_ground_state_drift_is_ou():
    f = sample_on_grid(GaussianState(a=1.0), X)
    d = drift_field(f, quantum_preset())
    core = np.abs(X) < 4
    np.testing.assert_allclose(d.values[core], -X[core], atol=1e-5)


def test_grid_drift_interpolates_and_clamps():
    d = GridDrift(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 0.0]))
    np.testing.assert_allclose(d(np.array([-5.0, 0.5, 1.5, 9.0])), [0.0, 1.0, 1.0, 0.0])


def test_ou_variance_relaxation():
    # dx = -x dt + dW : var(t) = 1/2 + (var0 - 1/2) e^{-2t}
    f = sample_on_grid(GaussianState(a=1.0), X)
    d = drift_field(f, quantum_preset())
    e = Ensemble(np.zeros(20000), seed=5)
    e = propagate_ensemble(e, d, 0.5, 1e-3, 500)
    expected = 0.5 * (1 - math.exp(-1.0))
    se = expected * math.sqrt(2 / e.size)
    assert abs(e.variance() - expected) < 4 * se + 1e-3


def test_self_comparison_is_zero():
    f = sample_on_grid(GaussianState(a=1.0), np.linspace(-5, 5, 11))
    e = Ensemble(np.repeat(f.grid, (f.rho * f.dx * 1e4).round().astype(int)), seed=0)
    cmp_ = empirical_compare(e, f, bins=11)
    assert cmp_.hist_l1_error < 1e-3


def test_mean_momentum_consistent():
    f = sample_on_grid(GaussianState(a=1.0, v0=0.3, b=0.2), X)
    e = sample_positions(f, 50000, 1)
    mean, se = mean_momentum(e, f, mass=2.0)
    assert abs(mean - 0.6) < 4 * se


def test_divergence_detected():
    e = Ensemble(np.array([0.0, 1.0]), seed=0)
    with pytest.raises(EnsembleDivergence):
        propagate_ensemble(e, lambda x: 1e6 * np.ones_like(x), 0.0, 1.0, 5, domain_width=1.0)


def test_bad_arguments():
    e = Ensemble(np.zeros(3), seed=0)
    with pytest.raises(ValueError):
        propagate_ensemble(e, lambda x: x, 0.5, 0.0, 1)
    with pytest.raises(ValueError):
        Ensemble(np.array([np.nan]), seed=0)
