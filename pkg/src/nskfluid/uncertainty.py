"""Moments of a sampled 1-D fluid and the position-momentum uncertainty relation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .params import ModelParameters

DEFAULT_RHO_FLOOR = 1e-12


class FieldError(ValueError):
    pass


class DensityFloorError(FieldError):
    """A derivative stencil on the retained support touches non-positive density."""


@dataclass(frozen=True, eq=False)
class FluidField1D:
    """Density and velocity sampled on a uniform grid."""

    grid: np.ndarray
    rho: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if grid.ndim != 1 or grid.size < 3:
            raise FieldError("grid must be one-dimensional with at least 3 points")
        if rho.shape != grid.shape or v.shape != grid.shape:
            raise FieldError(
                f"length mismatch: grid {grid.size}, rho {rho.size}, v {v.size}"
            )
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(rho)) and np.all(np.isfinite(v))):
            raise FieldError("non-finite samples")
        steps = np.diff(grid)
        if np.any(steps <= 0):
            raise FieldError("grid must be strictly increasing")
        # tolerance is relative to the grid extent: linspace rounding alone
        # perturbs individual steps by ~eps * n
        uniform = np.linspace(grid[0], grid[-1], grid.size)
        if np.max(np.abs(grid - uniform)) > 1e-12 * np.max(np.abs(grid)):
            raise FieldError("grid spacing is not uniform")
        if np.any(rho < 0):
            raise FieldError("negative density")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "v", v)

    @property
    def dx(self) -> float:
        return (self.grid[-1] - self.grid[0]) / (self.grid.size - 1)

    def mass(self) -> float:
        return float(np.trapezoid(self.rho, dx=self.dx))

    def check_mass(self, tol: float = 1e-6) -> None:
        m = self.mass()
        if abs(m - 1.0) > tol:
            raise FieldError(f"density integrates to {m:.10g}, not 1 (tol {tol:g})")


@dataclass(frozen=True)
class UncertaintyReport:
    sigma2_x: float
    sigma2_p: float
    cov_xv: float
    lhs: float
    rhs: float
    std_product: float
    rhs_sqrt: float
    margin: float
    holds: bool

    def as_row(self) -> dict:
        return asdict(self)


def _weights(field: FluidField1D, rho_floor: float | None) -> np.ndarray:
    """Trapezoid weights times density, zero outside the retained support."""
    rel = DEFAULT_RHO_FLOOR if rho_floor is None else rho_floor
    rho = field.rho
    w = np.where(rho >= rel * rho.max(), rho, 0.0)
    tw = np.full(rho.size, field.dx)
    tw[0] = tw[-1] = 0.5 * field.dx
    return w * tw


def expectation(field: FluidField1D, f, rho_floor: float | None = None) -> float:
    """Density-weighted mean of ``f``, normalised by the retained grid mass."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        f = np.full(field.grid.shape, float(f))
    if f.shape != field.grid.shape:
        raise FieldError(f"samples of length {f.size} do not match grid of length {field.grid.size}")
    w = _weights(field, rho_floor)
    return float(np.dot(w, f) / w.sum())


def log_density_gradient(field: FluidField1D, rho_floor: float | None = None) -> np.ndarray:
    """d ln(rho)/dx by second-order finite differences.

    Values outside the retained support are set to zero; they carry no weight
    in any moment.
    """
    rel = DEFAULT_RHO_FLOOR if rho_floor is None else rho_floor
    rho = field.rho
    if rho.max() <= 0:
        raise DensityFloorError("density vanishes everywhere")
    keep = rho >= rel * rho.max()
    # every stencil touching a retained point must see positive density
    touched = keep.copy()
    touched[1:] |= keep[:-1]
    touched[:-1] |= keep[1:]
    touched[:3] |= keep[0]
    touched[-3:] |= keep[-1]
    if np.any(rho[touched] <= 0):
        bad = field.grid[touched & (rho <= 0)][0]
        raise DensityFloorError(f"non-positive density at x={bad:.6g} inside the retained support")
    log_rho = np.log(np.where(rho > 0, rho, 1.0))
    grad = np.gradient(log_rho, field.dx, edge_order=2)
    return np.where(keep, grad, 0.0)


def momentum_fields(field: FluidField1D, params: ModelParameters,
                    rho_floor: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Forward and backward momenta ``(p_plus, p_minus)``.

    (p- - p+, p- + p+) = 2M G (-nu dln(rho), v).
    """
    dlog = log_density_gradient(field, rho_floor)
    m, nu, kappa, xi = params.mass, params.nu, params.kappa, params.xi
    diff = 2.0 * m * ((kappa / nu**2) * (-nu * dlog) - (xi / nu) * field.v)
    total = 2.0 * m * (xi * dlog + field.v)
    return 0.5 * (total - diff), 0.5 * (total + diff)


def rhs_bound(params: ModelParameters, cov_xv: float) -> float:
    """Right-hand side of the uncertainty inequality at a given <dx dv>."""
    m, nu, kappa, xi = params.mass, params.nu, params.kappa, params.xi
    nu2, xi2 = nu * nu, xi * xi
    shift = xi * (nu2 + kappa) / (nu2 + xi2)
    return m * m * (xi2 - kappa) ** 2 / (nu2 + xi2) + m * m * (1.0 + xi2 / nu2) * (cov_xv - shift) ** 2


def uncertainty_report(field: FluidField1D, params: ModelParameters, tol: float | None = None,
                       rho_floor: float | None = None, rel_tol: float = 1e-8) -> UncertaintyReport:
    """Both sides of the uncertainty inequality for a sampled field.

    ``tol`` defaults to ``rel_tol * (1 + lhs)``.
    """
    x = field.grid
    p_plus, p_minus = momentum_fields(field, params, rho_floor)
    mean = lambda f: expectation(field, f, rho_floor)  # noqa: E731

    dx_ = x - mean(x)
    sigma2_x = mean(dx_**2)
    avg = 0.5 * (p_minus + p_plus)
    half = 0.5 * (p_minus - p_plus)
    sigma2_p = mean((avg - mean(avg)) ** 2) + mean((half - mean(half)) ** 2)
    cov = mean(dx_ * (field.v - mean(field.v)))

    lhs = sigma2_x * sigma2_p
    rhs = rhs_bound(params, cov)
    margin = lhs - rhs
    if tol is None:
        tol = rel_tol * (1.0 + abs(lhs))
    return UncertaintyReport(
        sigma2_x=sigma2_x,
        sigma2_p=sigma2_p,
        cov_xv=cov,
        lhs=lhs,
        rhs=rhs,
        std_product=math.sqrt(lhs),
        rhs_sqrt=math.sqrt(rhs),
        margin=margin,
        holds=bool(margin >= -tol),
    )


def min_std_product(params: ModelParameters) -> float:
    """Smallest attainable sigma_x sigma_p: M nu |k - s| / sqrt(1 + s)."""
    params.require_physical(kappa_nonneg=True)
    k = params.kappa / params.nu**2
    s = params.xi**2 / params.nu**2
    return params.mass * params.nu * abs(k - s) / math.sqrt(1.0 + s)
