"""Euler-Maruyama ensembles of the forward SDE dx = u_+ dt + sqrt(2 nu) dW."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .params import ModelParameters
from .uncertainty import FluidField1D, expectation, log_density_gradient


class EnsembleDivergence(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t


@dataclass(frozen=True, eq=False)
class Ensemble:
    positions: np.ndarray
    seed: int
    t: float = 0.0
    step: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1 or not np.all(np.isfinite(pos)):
            raise ValueError("positions must be a finite 1-D array")
        object.__setattr__(self, "positions", pos)

    @property
    def size(self) -> int:
        return self.positions.size

    def mean(self) -> float:
        return float(self.positions.mean())

    def variance(self) -> float:
        return float(self.positions.var())


def _noise(seed: int, step: int, n: int) -> np.ndarray:
    # one counter-based stream per (seed, step): restarts reproduce bitwise
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(step,))
    return np.random.Generator(np.random.Philox(ss)).standard_normal(n)


def sample_positions(field: FluidField1D, n: int, seed: int) -> Ensemble:
    """Draw ``n`` positions from the grid density by inverse CDF."""
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (field.rho[1:] + field.rho[:-1]) * field.dx)])
    cdf /= cdf[-1]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(2**32,))))
    u = rng.random(n)
    return Ensemble(np.interp(u, cdf, field.grid), seed=seed)


@dataclass(frozen=True, eq=False)
class GridDrift:
    """Drift sampled on a grid; linear in between, nearest-edge value outside."""

    grid: np.ndarray
    values: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        # uniform grid: direct cell lookup instead of a binary search
        g, u = self.grid, self.values
        h = (g[-1] - g[0]) / (g.size - 1)
        pos = np.clip((x - g[0]) / h, 0.0, g.size - 1.0)
        i = np.minimum(pos.astype(np.intp), g.size - 2)
        w = pos - i
        return (1.0 - w) * u[i] + w * u[i + 1]

    @property
    def width(self) -> float:
        return float(self.grid[-1] - self.grid[0])


def drift_field(field: FluidField1D, params: ModelParameters, rho_floor: float | None = None) -> GridDrift:
    """u_+ = v + nu d ln(rho)/dx, from v = (u_+ + u_-)/2 and the consistency condition."""
    u_plus = field.v + params.nu * log_density_gradient(field, rho_floor)
    return GridDrift(field.grid, u_plus)


def propagate_ensemble(e: Ensemble, drift: Callable[[np.ndarray], np.ndarray], nu: float, dt: float,
                       n_steps: int, domain_width: float | None = None) -> Ensemble:
    """``n_steps`` Euler-Maruyama steps; aborts when a particle runs off to 1e3 domain widths."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if nu < 0:
        raise ValueError("nu must be non-negative")
    if domain_width is None:
        domain_width = getattr(drift, "width", None) or max(1.0, float(np.ptp(e.positions)))
    limit = 1e3 * domain_width
    x = e.positions.copy()
    amp = math.sqrt(2.0 * nu * dt)
    for k in range(n_steps):
        x = x + drift(x) * dt
        if amp:
            x += amp * _noise(e.seed, e.step + k, x.size)
        if not np.all(np.abs(x) <= limit):
            raise EnsembleDivergence("particle escaped beyond 1e3 domain widths", e.t + (k + 1) * dt)
    return replace(e, positions=x, t=e.t + n_steps * dt, step=e.step + n_steps)


@dataclass(frozen=True)
class EnsembleComparison:
    hist_l1_error: float
    hist_l1_expected: float
    mean_error: float
    mean_se: float
    var_error: float
    var_se: float


def histogram_field(e: Ensemble, edges) -> FluidField1D:
    """Normalised histogram of the ensemble as a field on bin centres (v = 0)."""
    edges = np.asarray(edges, dtype=float)
    counts, _ = np.histogram(e.positions, edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    return FluidField1D(centers, counts / (e.size * np.diff(edges)), np.zeros(centers.size))


def _bin_masses(reference: FluidField1D, bins: int) -> tuple[np.ndarray, np.ndarray]:
    grid, rho, h = reference.grid, reference.rho, reference.dx
    if bins == grid.size:
        # grid points are the bin centres
        edges = np.concatenate([grid - 0.5 * h, [grid[-1] + 0.5 * h]])
        return edges, rho * h
    edges = np.linspace(grid[0], grid[-1], bins + 1)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * h)])
    return edges, np.diff(np.interp(edges, grid, cum))


def empirical_compare(e: Ensemble, reference: FluidField1D, bins: int = 50) -> EnsembleComparison:
    """Histogram / moment comparison of an ensemble with a reference density.

    Bins tile [grid[0], grid[-1]] and the reference mass of each bin is its
    trapezoid integral.  When ``bins`` equals the number of grid points the
    grid points are taken as bin centres instead.  Errors carry Monte Carlo
    standard errors.
    """
    if bins < 10:
        raise ValueError("need at least 10 bins")
    n = e.size
    x = e.positions
    edges, p = _bin_masses(reference, bins)
    counts, _ = np.histogram(x, edges)
    l1 = float(np.sum(np.abs(counts / n - p)))
    # E|binomial fluctuation| per bin, summed
    l1_expected = float(np.sum(np.sqrt(2.0 / np.pi * np.clip(p * (1.0 - p), 0.0, None) / n)))

    ref_mean = expectation(reference, reference.grid)
    ref_var = expectation(reference, (reference.grid - ref_mean) ** 2)
    mean = x.mean()
    dev = x - mean
    var = float(np.mean(dev**2))
    m4 = float(np.mean(dev**4))
    return EnsembleComparison(
        hist_l1_error=l1,
        hist_l1_expected=l1_expected,
        mean_error=float(mean - ref_mean),
        mean_se=math.sqrt(var / n),
        var_error=var - ref_var,
        var_se=math.sqrt(max(m4 - var * var, 0.0) / n),
    )


def mean_momentum(e: Ensemble, field: FluidField1D, mass: float) -> tuple[float, float]:
    """Particle average of M v(x_i) and its standard error."""
    mv = mass * np.interp(e.positions, field.grid, field.v)
    return float(mv.mean()), float(mv.std() / math.sqrt(mv.size))


def follow_trajectory(snapshots, times, params: ModelParameters, n_particles: int, seed: int,
                      substeps: int = 10) -> list[tuple[float, Ensemble, EnsembleComparison]]:
    """Drive an ensemble with drifts re-sampled from successive PDE snapshots.

    Between snapshot k and k+1 the drift of snapshot k is held fixed for
    ``substeps`` Euler-Maruyama steps.  Returns the comparison against each
    snapshot as it is reached.
    """
    e = sample_positions(snapshots[0], n_particles, seed)
    out = [(times[0], e, empirical_compare(e, snapshots[0]))]
    for k in range(1, len(snapshots)):
        drift = drift_field(snapshots[k - 1], params)
        dt = (times[k] - times[k - 1]) / substeps
        e = propagate_ensemble(e, drift, params.nu, dt, substeps)
        out.append((times[k], e, empirical_compare(e, snapshots[k])))
    return out
