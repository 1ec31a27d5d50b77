"""Viscosity phase diagram, minimum-uncertainty curve and viscosity bounds."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .params import ParameterError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class PhaseDiagramCell:
    k: float
    s: float
    min_over_mnu: float
    improves_paper: bool
    improves_direct: bool


def _xi_star_squares(k: float) -> tuple[float, float]:
    """Squared thresholds (xi*_min/nu)^2, (xi*_max/nu)^2; kept squared so k=1 gives exactly (0, 3)."""
    root = math.sqrt(k * (1.0 + 1.25 * k))
    lo = 0.0 if k < 1.0 else max(1.5 * k - root, 0.0)
    return lo, 1.5 * k + root


def xi_star_paper(k: float) -> tuple[float, float]:
    """Critical kinematic viscosities (xi*_min/nu, xi*_max/nu) at kappa/nu^2 = k."""
    if not k >= 0:
        raise ParameterError(f"k must be non-negative, got {k!r}")
    lo, hi = _xi_star_squares(k)
    return math.sqrt(lo), math.sqrt(hi)


def viscous_minimum_ratio(k, s):
    """min sigma_x sigma_p / (M nu) = |k - s| / sqrt(1 + s)."""
    return np.abs(np.asarray(k) - np.asarray(s)) / np.sqrt(1.0 + np.asarray(s))


def improvement_region(k: float, s: float) -> tuple[bool, bool]:
    """(improves_paper, improves_direct) at k = kappa/nu^2, s = xi^2/nu^2."""
    if k < 0 or s < 0:
        raise ParameterError("k and s must be non-negative")
    lo, hi = _xi_star_squares(k)
    improves_paper = lo < s < hi
    improves_direct = float(viscous_minimum_ratio(k, s)) < k
    return bool(improves_paper), bool(improves_direct)


def _scan_row(k: float, s_values: np.ndarray) -> list[PhaseDiagramCell]:
    ratios = viscous_minimum_ratio(k, s_values)
    lo, hi = _xi_star_squares(k)
    return [
        PhaseDiagramCell(k=float(k), s=float(s), min_over_mnu=float(r),
                         improves_paper=bool(lo < s < hi), improves_direct=bool(r < k))
        for s, r in zip(s_values, ratios)
    ]


def scan_phase_diagram(k_range: tuple[float, float], s_range: tuple[float, float], nk: int, ns: int,
                       workers: int | None = None) -> list[PhaseDiagramCell]:
    """Row-major (k outer, s inner) grid of phase-diagram cells."""
    if nk < 2 or ns < 2:
        raise ParameterError("nk and ns must be at least 2")
    (k0, k1), (s0, s1) = k_range, s_range
    if min(k0, k1, s0, s1) < 0:
        raise ParameterError("ranges must be non-negative")
    if k1 < k0 or s1 < s0:
        raise ParameterError("empty range")
    ks = np.linspace(k0, k1, nk)
    ss = np.linspace(s0, s1, ns)
    if workers is None:
        workers = int(os.environ.get("NSK_THREADS", "1") or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda k: _scan_row(k, ss), ks))
    else:
        rows = [_scan_row(k, ss) for k in ks]
    return [cell for row in rows for cell in row]


def min_curve(xi_over_nu, mass: float = 1.0, nu: float = 1.0) -> list[tuple[float, float]]:
    """Minimum std product along kappa = nu^2 as a function of xi/nu."""
    r = np.asarray(xi_over_nu, dtype=float)
    if np.any(r < 0):
        raise ParameterError("xi/nu samples must be non-negative")
    values = mass * nu * np.abs(1.0 - r**2) / np.sqrt(1.0 + r**2)
    return list(zip(r.tolist(), values.tolist()))


@dataclass(frozen=True)
class ViscosityBounds:
    xi_kss: float
    kappa_lb: float
    nu_lb: float
    xi_star_max_quantum: float
    ratio: float


def kss_and_kappa_bounds(mass: float, nu: float, hbar: float, alpha_b: float) -> ViscosityBounds:
    """KSS kinematic bound (entropy density ~ k_B rho) and the kappa / nu lower bounds."""
    if min(mass, nu, hbar) <= 0:
        raise ParameterError("mass, nu and hbar must be positive")
    if alpha_b == 0:
        raise ParameterError("alpha_b = 0 leaves the nu lower bound undefined")
    xi_kss = hbar / (8.0 * math.pi * mass)
    xi_max = 0.5 * SQRT3 * hbar / mass
    return ViscosityBounds(
        xi_kss=xi_kss,
        kappa_lb=hbar * nu / (2.0 * mass),
        nu_lb=hbar / (4.0 * mass * alpha_b),
        xi_star_max_quantum=xi_max,
        ratio=xi_max / xi_kss,
    )


@dataclass(frozen=True)
class MediaEstimate:
    std_product: float
    in_units_of_half_hbar: float


def media_estimate(mass: float, xi: float, nu: float, hbar: float) -> MediaEstimate:
    """NSF (kappa = 0) minimum std product M xi^2 / sqrt(nu^2 + xi^2)."""
    if mass <= 0 or nu <= 0 or hbar <= 0 or xi < 0:
        raise ParameterError("mass, nu, hbar must be positive and xi non-negative")
    value = mass * xi**2 / math.hypot(nu, xi)
    return MediaEstimate(std_product=value, in_units_of_half_hbar=value / (0.5 * hbar))


# room-temperature inputs quoted for water; vapor xi given at both readings
WATER_MOLECULE_MASS = 3e-26
LIQUID_WATER = {"xi": 1e-6, "nu": 1e-9}
WATER_VAPOR_PRINTED = {"xi": 0.3e-6, "nu": 1e-4}
WATER_VAPOR_ALT = {"xi": 3e-6, "nu": 1e-4}
