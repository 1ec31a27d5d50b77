"""Closed-form Gaussian states of the NSK fluid."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .params import ModelParameters, ParameterError
from .uncertainty import FluidField1D

RHO_SAMPLE_FLOOR = 1e-300


class TruncationWarning(UserWarning):
    """The sampling grid cuts off a noticeable part of the density."""


@dataclass(frozen=True)
class GaussianState:
    """rho(x) = sqrt(A/pi) exp(-A (x - x0)^2),  v(x) = v0 + B x."""

    a: float
    b: float = 0.0
    x0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.a, self.b, self.x0, self.v0)):
            raise ParameterError("Gaussian state coefficients must be finite")
        if self.a <= 0:
            raise ParameterError(f"A must be positive, got {self.a!r}")

    @property
    def sigma2_x(self) -> float:
        return 0.5 / self.a

    @property
    def cov_xv(self) -> float:
        return self.b / (2.0 * self.a)

    def density(self, x):
        return np.sqrt(self.a / np.pi) * np.exp(-self.a * (np.asarray(x) - self.x0) ** 2)

    def velocity(self, x):
        return self.v0 + self.b * np.asarray(x)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "x0": self.x0, "v0": self.v0}


@dataclass(frozen=True)
class CoherentSpec:
    c: float
    alpha_r: float = 0.0
    alpha_i: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"C must be positive, got {self.c!r}")


def optimal_gradient(params: ModelParameters, a: float) -> float:
    """Velocity gradient B that minimises the uncertainty product at width ``a``."""
    nu2, xi, kappa = params.nu**2, params.xi, params.kappa
    return 2.0 * a * xi * (nu2 + kappa) / (nu2 + xi * xi)


def make_min_uncertainty_state(params: ModelParameters, a: float, x0: float = 0.0,
                               v0: float = 0.0) -> GaussianState:
    if not a > 0:
        raise ParameterError(f"A must be positive, got {a!r}")
    params.require_physical(kappa_nonneg=True)
    return GaussianState(a=a, b=optimal_gradient(params, a), x0=x0, v0=v0)


def gaussian_uncertainty_product(state: GaussianState, params: ModelParameters) -> tuple[float, float]:
    """Variance product and standard-deviation product of a Gaussian state."""
    m, nu, kappa, xi = params.mass, params.nu, params.kappa, params.xi
    nu2, xi2 = nu * nu, xi * xi
    floor_term = m * m * (kappa - xi2) ** 2 / (nu2 + xi2)
    excess = state.cov_xv - xi * (nu2 + kappa) / (nu2 + xi2)
    var_product = floor_term + m * m * (1.0 + xi2 / nu2) * excess**2
    return var_product, math.sqrt(var_product)


def from_coherent_state(spec: CoherentSpec, mass: float = 1.0, hbar: float = 1.0) -> GaussianState:
    """Madelung (rho, v) of the harmonic-oscillator coherent state <x|alpha>."""
    root_c = math.sqrt(spec.c)
    return GaussianState(
        a=spec.c,
        b=0.0,
        x0=spec.alpha_r / root_c,
        v0=(hbar / mass) * root_c * spec.alpha_i,
    )


def euler_korteweg_stationary(omega: float, c_pre: float, kappa: float, mass: float = 1.0) -> GaussianState:
    """Static Gaussian solving the Euler-Korteweg equation.

    Potential M omega^2 x^2 / 2 and pressure P = c_pre rho.  Stationarity
    requires 4 kappa A^2 + (2 c_pre / M) A - omega^2 = 0; the positive root is
    returned.
    """
    if not omega > 0:
        raise ParameterError(f"omega must be positive, got {omega!r}")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa!r}")
    if c_pre < 0:
        raise ParameterError(f"c_pre must be non-negative, got {c_pre!r}")
    c = c_pre / mass
    disc = math.sqrt(c * c + 4.0 * kappa * omega**2)
    # rationalised root, accurate when kappa*omega^2 << c^2
    a = omega**2 / (c + disc)
    return GaussianState(a=a)


def inviscid_minimum(kappa: float, nu: float, mass: float = 1.0) -> float:
    """M kappa / nu, the minimum std product at vanishing viscosity."""
    if kappa < 0:
        raise ParameterError(f"kappa must be non-negative, got {kappa!r}")
    if not nu > 0:
        raise ParameterError(f"nu must be positive, got {nu!r}")
    return mass * kappa / nu


def sample_on_grid(state: GaussianState, grid) -> FluidField1D:
    grid = np.asarray(grid, dtype=float)
    rho = np.maximum(state.density(grid), RHO_SAMPLE_FLOOR)
    field = FluidField1D(grid=grid, rho=rho, v=state.velocity(grid))
    lost = 1.0 - field.mass()
    if lost > 1e-8:
        warnings.warn(f"grid truncates {lost:.3e} of the mass", TruncationWarning, stacklevel=2)
    return field
