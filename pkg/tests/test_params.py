import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nskfluid import (
    DegenerateParametersError,
    ModelParameters,
    ParameterError,
    derive_transport,
    lagrangian_matrix_det,
    momentum_matrix_spectrum,
    natural_units,
    quantum_preset,
)


def test_quantum_preset_transport():
    p = quantum_preset()
    assert p.nu == 0.5
    assert p.kappa == pytest.approx(0.25)
    assert p.xi == 0.0
    assert p.det_mcal == pytest.approx(0.25)


def test_quantum_preset_scales_with_hbar_and_mass():
    p = quantum_preset(mass=2.0, hbar=3.0)
    assert p.nu == pytest.approx(0.75)
    assert p.kappa == pytest.approx(2 * 0.5 * 0.75**2)


def test_transport_from_alphas():
    t = derive_transport(ModelParameters(mass=2.0, nu=0.5, alpha_a=0.3, alpha_b=1.0))
    assert t.kappa == pytest.approx(0.5)
    assert t.xi == pytest.approx(0.45)
    assert t.eta_per_density == pytest.approx(1.8)
    assert t.eta(np.array([2.0]))[0] == pytest.approx(3.6)


def test_from_transport_round_trip():
    p = ModelParameters.from_transport(0.7, 0.3, 1.3, mass=2.0)
    assert p.kappa == pytest.approx(0.7, rel=1e-14)
    assert p.xi == pytest.approx(0.3, rel=1e-14)
    assert p.mass == 2.0


def test_degenerate_set_rejected():
    # alpha_B/2 = alpha_A^2 (1/2 + alpha_B)^2  with alpha_B = 1/2, alpha_A = 1/2
    with pytest.raises(DegenerateParametersError):
        ModelParameters(mass=1.0, nu=1.0, alpha_a=0.5, alpha_b=0.5)
    with pytest.raises(ParameterError):
        ModelParameters(mass=1.0, nu=1.0, alpha_a=0.0, alpha_b=0.0)


@pytest.mark.parametrize("kw", [dict(nu=0.0), dict(nu=-1.0), dict(mass=0.0), dict(nu=float("nan")),
                                dict(alpha_a=float("inf")), dict(hbar=-1.0)])
def test_invalid_inputs(kw):
    with pytest.raises(ParameterError):
        natural_units(**kw)


def test_require_physical():
    p = natural_units(alpha_a=-0.1)
    with pytest.raises(ParameterError):
        p.require_physical()
    q = natural_units(alpha_b=-0.2)
    with pytest.raises(ParameterError):
        q.require_physical()
    q.require_physical(kappa_nonneg=False)


def test_to_dict_keys():
    d = quantum_preset().to_dict()
    assert set(d) == {"mass", "nu", "alpha_a", "alpha_b", "mu", "hbar", "kappa", "xi",
                      "det_mcal", "lambda_plus", "lambda_minus"}


def test_quantum_spectrum_is_identity():
    s = quantum_preset().spectrum()
    np.testing.assert_allclose(s.g_mat, np.eye(2), atol=1e-15)
    assert s.lambda_plus == pytest.approx(1.0)
    assert s.lambda_minus == pytest.approx(1.0)


alphas = st.floats(-3.0, 3.0, allow_nan=False)
nus = st.floats(1e-3, 1e3)


@settings(max_examples=300, deadline=None)
@given(alphas, alphas, nus)
def test_structural_identities(a_a, a_b, nu):
    _, det, degenerate = lagrangian_matrix_det(a_a, a_b)
    if degenerate:
        return
    p = ModelParameters(mass=1.0, nu=nu, alpha_a=a_a, alpha_b=a_b)
    s = p.spectrum()
    scale = p.kappa**2 / nu**4 + p.xi**2 / nu**2 + 1.0
    # det G = (kappa - xi^2) / nu^2 = 4 det M_cal
    assert np.linalg.det(s.g_mat) == pytest.approx(4 * det, rel=1e-9, abs=1e-12 * scale)
    assert s.lambda_plus * s.lambda_minus == pytest.approx(np.linalg.det(s.g_mat), rel=1e-9, abs=1e-12 * scale)
    assert s.lambda_plus + s.lambda_minus == pytest.approx(np.trace(s.g_mat), rel=1e-12, abs=1e-12)
    ev = np.linalg.eigvalsh(s.g_mat)
    assert sorted([s.lambda_plus, s.lambda_minus]) == pytest.approx(ev, rel=1e-8, abs=1e-10 * math.sqrt(scale))


def test_spectrum_without_alphas_matches():
    p = ModelParameters(mass=1.0, nu=0.8, alpha_a=0.2, alpha_b=0.9)
    s1 = p.spectrum()
    s2 = momentum_matrix_spectrum(p.transport, p.nu)
    np.testing.assert_allclose(s1.m_cal, s2.m_cal, rtol=1e-12)
