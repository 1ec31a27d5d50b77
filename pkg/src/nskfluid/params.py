"""Model parameters of the stochastic-variational NSK fluid.

The fluid is specified by the particle mass ``M``, the noise intensity ``nu``
and the two Lagrangian weights ``alpha_A``/``alpha_B``.  Everything else
(capillarity ``kappa``, kinematic viscosity ``xi``, the matrices ``M_cal`` and
``G``) follows in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Invalid or non-finite model input."""


class DegenerateParametersError(ParameterError):
    """det(M_cal) vanishes, i.e. kappa == xi**2; momenta are undefined."""


def _finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")


def degeneracy_tolerance(alpha_a: float, alpha_b: float) -> float:
    return 1e-14 * (1.0 + abs(alpha_a) + abs(alpha_b)) ** 2


def lagrangian_matrix_det(alpha_a: float, alpha_b: float) -> tuple[np.ndarray, float, bool]:
    """Return ``(M_cal, det, degenerate)`` for the stochastic Lagrangian weights."""
    _finite(alpha_a=alpha_a, alpha_b=alpha_b)
    off = 0.25 - 0.5 * alpha_b
    m_cal = np.array(
        [
            [(0.5 + alpha_a) * (0.5 + alpha_b), off],
            [off, (0.5 - alpha_a) * (0.5 + alpha_b)],
        ]
    )
    # expanded form; avoids the cancellation of the naive ad - bc
    det = 0.5 * alpha_b - alpha_a**2 * (0.5 + alpha_b) ** 2
    return m_cal, det, abs(det) < degeneracy_tolerance(alpha_a, alpha_b)


@dataclass(frozen=True)
class TransportSet:
    kappa: float
    xi: float
    eta_per_density: float

    def eta(self, rho):
        """Shear viscosity at local density ``rho``."""
        return self.eta_per_density * rho


@dataclass(frozen=True)
class StructuralMatrices:
    m_cal: np.ndarray
    g_mat: np.ndarray
    lambda_plus: float
    lambda_minus: float


@dataclass(frozen=True)
class ModelParameters:
    """Stochastic-variational inputs.

    Construction validates the inputs and refuses the degenerate set
    ``det(M_cal) == 0``.  ``mu`` is the second viscosity, taken as given.
    """

    mass: float
    nu: float
    alpha_a: float
    alpha_b: float
    mu: float = 0.0
    hbar: float = 1.0
    _transport: TransportSet = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _finite(
            mass=self.mass, nu=self.nu, alpha_a=self.alpha_a,
            alpha_b=self.alpha_b, mu=self.mu, hbar=self.hbar,
        )
        for name in ("mass", "nu", "hbar"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        _, det, degenerate = lagrangian_matrix_det(self.alpha_a, self.alpha_b)
        if degenerate:
            raise DegenerateParametersError(
                f"det(M_cal) = {det:.3e} vanishes (kappa == xi^2); "
                f"alpha_a={self.alpha_a!r}, alpha_b={self.alpha_b!r}"
            )
        object.__setattr__(self, "_transport", derive_transport(self))

    @classmethod
    def from_transport(cls, kappa: float, xi: float, nu: float, mass: float = 1.0,
                       mu: float = 0.0, hbar: float = 1.0) -> "ModelParameters":
        """Invert the identification: pick (alpha_A, alpha_B) giving ``kappa`` and ``xi``."""
        _finite(kappa=kappa, xi=xi, nu=nu)
        if nu <= 0:
            raise ParameterError(f"nu must be positive, got {nu!r}")
        alpha_b = kappa / (2.0 * nu**2)
        if 1.0 + 2.0 * alpha_b == 0.0:
            if xi != 0.0:
                raise ParameterError("xi != 0 is unreachable when kappa == -nu^2")
            alpha_a = 0.0
        else:
            alpha_a = xi / ((1.0 + 2.0 * alpha_b) * nu)
        return cls(mass=mass, nu=nu, alpha_a=alpha_a, alpha_b=alpha_b, mu=mu, hbar=hbar)

    @property
    def transport(self) -> TransportSet:
        return self._transport

    @property
    def kappa(self) -> float:
        return self._transport.kappa

    @property
    def xi(self) -> float:
        return self._transport.xi

    @property
    def det_mcal(self) -> float:
        return lagrangian_matrix_det(self.alpha_a, self.alpha_b)[1]

    def spectrum(self) -> StructuralMatrices:
        return momentum_matrix_spectrum(self._transport, self.nu, self.alpha_a, self.alpha_b)

    def require_physical(self, *, kappa_nonneg: bool = True) -> None:
        """Reject parameter sets outside the physical domain (xi < 0, optionally kappa < 0)."""
        if self.xi < 0:
            raise ParameterError(f"negative kinematic viscosity xi={self.xi!r}")
        if kappa_nonneg and self.kappa < 0:
            raise ParameterError(f"negative kappa={self.kappa!r}")

    def to_dict(self) -> dict:
        spec = self.spectrum()
        return {
            "mass": self.mass,
            "nu": self.nu,
            "alpha_a": self.alpha_a,
            "alpha_b": self.alpha_b,
            "mu": self.mu,
            "hbar": self.hbar,
            "kappa": self.kappa,
            "xi": self.xi,
            "det_mcal": self.det_mcal,
            "lambda_plus": spec.lambda_plus,
            "lambda_minus": spec.lambda_minus,
        }


def derive_transport(p: ModelParameters) -> TransportSet:
    """kappa = 2 alpha_B nu^2, xi = alpha_A (1 + 2 alpha_B) nu, eta/rho = 2 M xi."""
    _finite(nu=p.nu, alpha_a=p.alpha_a, alpha_b=p.alpha_b, mass=p.mass)
    kappa = 2.0 * p.alpha_b * p.nu**2
    xi = p.alpha_a * (1.0 + 2.0 * p.alpha_b) * p.nu
    return TransportSet(kappa=kappa, xi=xi, eta_per_density=2.0 * p.mass * xi)


def momentum_matrix_spectrum(t: TransportSet, nu: float, alpha_a: float | None = None,
                             alpha_b: float | None = None) -> StructuralMatrices:
    """G = [[kappa/nu^2, -xi/nu], [-xi/nu, 1]] and its eigenvalues.

    ``M_cal`` needs the Lagrangian weights; when they are not given they are
    recovered from ``t`` and ``nu``.
    """
    _finite(nu=nu, kappa=t.kappa, xi=t.xi)
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu!r}")
    k = t.kappa / nu**2
    x = t.xi / nu
    g_mat = np.array([[k, -x], [-x, 1.0]])
    trace = 1.0 + k
    det = k - x * x
    root = math.hypot(1.0 - k, 2.0 * x)
    # larger-magnitude root first, the other from det/root (no cancellation)
    if trace >= 0:
        lam_p = 0.5 * (trace + root)
        lam_m = det / lam_p if lam_p != 0 else 0.0
    else:
        lam_m = 0.5 * (trace - root)
        lam_p = det / lam_m
    if alpha_a is None or alpha_b is None:
        alpha_b = k / 2.0
        alpha_a = x / (1.0 + 2.0 * alpha_b) if 1.0 + 2.0 * alpha_b != 0 else 0.0
    m_cal, _, _ = lagrangian_matrix_det(alpha_a, alpha_b)
    return StructuralMatrices(m_cal=m_cal, g_mat=g_mat, lambda_plus=lam_p, lambda_minus=lam_m)


def quantum_preset(mass: float = 1.0, hbar: float = 1.0) -> ModelParameters:
    """(alpha_A, alpha_B, nu) = (0, 1/2, hbar/2M): Madelung hydrodynamics."""
    if mass <= 0 or hbar <= 0:
        raise ParameterError("mass and hbar must be positive")
    return ModelParameters(mass=mass, nu=hbar / (2.0 * mass), alpha_a=0.0, alpha_b=0.5, hbar=hbar)


def natural_units(**overrides) -> ModelParameters:
    """Quantum preset with hbar = M = 1, fields optionally overridden."""
    base = dict(mass=1.0, nu=0.5, alpha_a=0.0, alpha_b=0.5, mu=0.0, hbar=1.0)
    base.update(overrides)
    return ModelParameters(**base)
