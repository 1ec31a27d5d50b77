"""Finite-difference solver for the 1-D continuity + NSK momentum equations.

State is (rho, v) on cell centres of [x_min, x_max].  Spatial derivatives are
central differences (2nd order by default, 4th order optional); time stepping is
classical RK4.  In one dimension the traceless stress vanishes, so viscosity
enters only through the bulk combination (mu + eta) dv/dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .params import ModelParameters, ParameterError
from .uncertainty import FluidField1D, UncertaintyReport, uncertainty_report

BOUNDARIES = ("periodic", "reflecting")
_TINY = 1e-300

_D1 = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]),
}
_D2 = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0]),
}


class ConfigError(ValueError):
    pass


class NumericalInstability(RuntimeError):
    """Negative density or non-finite state during time stepping."""

    def __init__(self, message: str, t: float, step: int, trajectory: "Trajectory | None" = None):
        super().__init__(f"{message} at t={t:.6g} (step {step})")
        self.t = t
        self.step = step
        self.trajectory = trajectory


@dataclass(frozen=True)
class PolytropicEOS:
    """P = K rho^gamma."""

    k: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.k < 0 or self.gamma < 1:
            raise ConfigError("eos requires K >= 0 and gamma >= 1")

    def pressure(self, rho):
        return self.k * rho**self.gamma

    def sound_speed2(self, rho, mass):
        return self.k * self.gamma * rho ** (self.gamma - 1.0) / mass


@dataclass(frozen=True)
class HarmonicPotential:
    """V = M omega^2 (x - center)^2 / 2."""

    omega: float = 0.0
    center: float = 0.0

    def __post_init__(self):
        if self.omega < 0:
            raise ConfigError("omega must be non-negative")

    def force_per_mass(self, x):
        """(1/M) dV/dx."""
        return self.omega**2 * (x - self.center)


@dataclass(frozen=True)
class SolverConfig:
    params: ModelParameters
    x_min: float
    x_max: float
    n_cells: int
    dt: float
    t_end: float
    boundary: str = "periodic"
    eos: PolytropicEOS = field(default_factory=PolytropicEOS)
    potential: HarmonicPotential = field(default_factory=HarmonicPotential)
    rho_floor: float = 1e-14
    diag_stride: int = 10
    c_safety: float = 0.4
    stencil_order: int = 2

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")
        if self.n_cells < 16:
            raise ConfigError("n_cells must be at least 16")
        if not (self.dt > 0 and self.t_end > 0):
            raise ConfigError("dt and t_end must be positive")
        if self.diag_stride < 1:
            raise ConfigError("diag_stride must be at least 1")
        if self.stencil_order not in _D1:
            raise ConfigError("stencil_order must be 2 or 4")
        if not 0 < self.rho_floor < 1:
            raise ConfigError("rho_floor is relative to max(rho) and must lie in (0, 1)")
        self.params.require_physical(kappa_nonneg=True)
        limit = self.dt_limit()
        if self.dt > limit:
            raise ConfigError(f"dt={self.dt:g} violates the parabolic CFL guard dt <= {limit:.6g}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def grid(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def dt_limit(self) -> float:
        """c_safety * min(dx^2 / (2 xi_eff), dx^2 / (2 sqrt(kappa))); xi_eff = 2 xi."""
        dx2 = self.dx**2
        bounds = [math.inf]
        xi_eff = 2.0 * self.params.xi
        if xi_eff > 0:
            bounds.append(dx2 / (2.0 * xi_eff))
        if self.params.kappa > 0:
            bounds.append(dx2 / (2.0 * math.sqrt(self.params.kappa)))
        return self.c_safety * min(bounds)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> tuple["SolverConfig", dict[str, float]]:
        """Build a config from flat key=value strings.

        Returns the config plus any ``init_*`` initial-condition keys.
        """
        return _config_from_mapping(values)


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    snapshots: list[FluidField1D] = field(default_factory=list)
    reports: list[UncertaintyReport] = field(default_factory=list)
    masses: list[float] = field(default_factory=list)
    clipped_mass: list[float] = field(default_factory=list)
    steps: int = 0

    def diagnostics_rows(self) -> list[dict]:
        rows = []
        for t, m, r in zip(self.times, self.masses, self.reports):
            rows.append({
                "t": t, "mass": m, "sigma2_x": r.sigma2_x, "sigma2_p": r.sigma2_p,
                "cov_xv": r.cov_xv, "lhs": r.lhs, "rhs": r.rhs,
                "std_product": r.std_product, "margin": r.margin, "holds": r.holds,
            })
        return rows


class _Operators:
    """Padded finite-difference stencils for one boundary type."""

    def __init__(self, n: int, dx: float, boundary: str, order: int):
        self.n = n
        self.dx = dx
        self.periodic = boundary == "periodic"
        self.d1 = _D1[order]
        self.d2 = _D2[order]
        self.g = order // 2

    def pad(self, q: np.ndarray, width: int, odd: bool = False) -> np.ndarray:
        if self.periodic:
            return np.pad(q, width, mode="wrap")
        qp = np.pad(q, width, mode="symmetric")
        if odd:
            qp[:width] *= -1.0
            qp[-width:] *= -1.0
        return qp

    def _apply(self, q, coeffs, odd):
        qp = self.pad(q, self.g, odd)
        n = self.n
        out = np.zeros(n)
        for j, c in enumerate(coeffs):
            if c != 0.0:
                out += c * qp[j:j + n]
        return out

    def ddx(self, q, odd=False):
        return self._apply(q, self.d1, odd) / self.dx

    def d2dx2(self, q, odd=False):
        return self._apply(q, self.d2, odd) / self.dx**2

    def diffusive(self, coef, v):
        """d/dx (coef dv/dx) in compact flux form; coef even, v odd under reflection."""
        cp = self.pad(coef, 1)
        vp = self.pad(v, 1, odd=True)
        face = 0.5 * (cp[1:] + cp[:-1]) * np.diff(vp) / self.dx
        return np.diff(face) / self.dx


def _rates(rho, v, x, config: SolverConfig, ops: _Operators, floor_abs: float, inviscid: bool = False):
    p = config.params
    m = p.mass
    rho_c = np.maximum(rho, _TINY)
    drho = -ops.ddx(rho * v, odd=True)

    acc = -v * ops.ddx(v, odd=True) - config.potential.force_per_mass(x)
    if p.kappa != 0.0:
        s = np.sqrt(rho_c)
        q_pot = ops.d2dx2(s) / s
        acc += 2.0 * p.kappa * ops.ddx(q_pot)
    if config.eos.k != 0.0:
        acc -= ops.ddx(config.eos.pressure(rho_c)) / (m * rho_c)
    if not inviscid and (p.xi != 0.0 or p.mu != 0.0):
        coef = p.mu + p.transport.eta(rho_c)
        acc += ops.diffusive(coef, v) / (m * rho_c)

    # low-density cells keep their velocity; their dynamics is not resolved
    acc = np.where(rho >= floor_abs, acc, 0.0)
    return drho, acc


def _check_grid(field_: FluidField1D, config: SolverConfig) -> None:
    if field_.grid.size != config.n_cells:
        raise ConfigError(f"field has {field_.grid.size} points, config expects {config.n_cells}")
    if not np.allclose(field_.grid, config.grid, rtol=0, atol=1e-9 * config.dx):
        raise ConfigError("field grid does not match the configured cell centres")


def spatial_rhs(field_: FluidField1D, config: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """(d rho/dt, d v/dt) for a sampled state."""
    _check_grid(field_, config)
    ops = _Operators(config.n_cells, config.dx, config.boundary, config.stencil_order)
    floor_abs = config.rho_floor * field_.rho.max()
    return _rates(field_.rho, field_.v, field_.grid, config, ops, floor_abs)


def stationarity_residual(field_: FluidField1D, config: SolverConfig) -> float:
    """Max-norm of dv/dt with eta = mu = 0, over cells above the density floor."""
    _check_grid(field_, config)
    ops = _Operators(config.n_cells, config.dx, config.boundary, config.stencil_order)
    floor_abs = config.rho_floor * field_.rho.max()
    _, acc = _rates(field_.rho, field_.v, field_.grid, config, ops, floor_abs, inviscid=True)
    return float(np.max(np.abs(acc)))


def _hyperbolic_limit(rho, v, config: SolverConfig, floor_abs: float) -> float:
    live = rho >= floor_abs
    c2 = config.eos.sound_speed2(rho[live], config.params.mass) if config.eos.k else 0.0
    speed = float(np.max(np.abs(v[live]) + np.sqrt(c2)))
    return math.inf if speed == 0 else config.c_safety * 2.0 * config.dx / speed


def evolve(initial: FluidField1D, config: SolverConfig, report_tol: float | None = None) -> Trajectory:
    """Integrate from ``initial`` to ``config.t_end``.

    Diagnostics are recorded at t = 0, every ``diag_stride`` steps and at the
    final time.  Raises :class:`NumericalInstability` (carrying the partial
    trajectory) when the density turns negative or the state blows up.
    """
    _check_grid(initial, config)
    x = config.grid
    ops = _Operators(config.n_cells, config.dx, config.boundary, config.stencil_order)
    rho = initial.rho.copy()
    v = initial.v.copy()
    floor_abs = config.rho_floor * rho.max()

    hyper = _hyperbolic_limit(rho, v, config, floor_abs)
    if config.dt > hyper:
        raise ConfigError(f"dt={config.dt:g} exceeds the advective limit {hyper:.6g}")

    n_steps = max(1, math.ceil(config.t_end / config.dt - 1e-9))
    dt = config.t_end / n_steps
    traj = Trajectory()

    def record(t):
        snap = FluidField1D(grid=x, rho=rho.copy(), v=v.copy())
        rep = uncertainty_report(snap, config.params, tol=report_tol, rel_tol=1e-6)
        traj.times.append(t)
        traj.snapshots.append(snap)
        traj.reports.append(rep)
        traj.masses.append(float(rho.sum() * config.dx))
        traj.clipped_mass.append(float(np.sum(np.maximum(floor_abs - rho, 0.0)) * config.dx))

    def f(r, u):
        return _rates(r, u, x, config, ops, floor_abs)

    record(0.0)
    for step in range(1, n_steps + 1):
        k1r, k1v = f(rho, v)
        k2r, k2v = f(rho + 0.5 * dt * k1r, v + 0.5 * dt * k1v)
        k3r, k3v = f(rho + 0.5 * dt * k2r, v + 0.5 * dt * k2v)
        k4r, k4v = f(rho + dt * k3r, v + dt * k3v)
        rho = rho + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        v = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t = step * dt
        traj.steps = step
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(v))):
            raise NumericalInstability("non-finite state", t, step, traj)
        if np.any(rho < 0):
            raise NumericalInstability("negative density", t, step, traj)
        if step % config.diag_stride == 0 or step == n_steps:
            record(t)
    return traj


# -- config files -----------------------------------------------------------

_PARAM_KEYS = {"mass", "nu", "alpha_a", "alpha_b", "mu", "hbar"}
_SCALAR_KEYS = {"x_min", "x_max", "dt", "t_end", "rho_floor", "c_safety"}
_INT_KEYS = {"n_cells", "diag_stride", "stencil_order"}
_INIT_KEYS = {"init_a", "init_b", "init_x0", "init_v0"}
_OTHER_KEYS = {"boundary", "eos_k", "eos_gamma", "omega", "center"}
CONFIG_KEYS = _PARAM_KEYS | _SCALAR_KEYS | _INT_KEYS | _INIT_KEYS | _OTHER_KEYS
_REQUIRED = {"nu", "alpha_a", "alpha_b", "x_min", "x_max", "n_cells", "dt", "t_end"}


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = value
    return values


def load_config(path) -> tuple[SolverConfig, dict[str, float]]:
    return _config_from_mapping(parse_config_text(Path(path).read_text()))


def _number(values, key, cast=float):
    try:
        return cast(values[key])
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {values[key]!r}") from None


def _config_from_mapping(values: dict[str, str]):
    unknown = set(values) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    missing = _REQUIRED - set(values)
    if missing:
        raise ConfigError(f"missing config key {sorted(missing)[0]!r}")
    try:
        pkw = {"mass": 1.0} | {k: _number(values, k) for k in _PARAM_KEYS if k in values}
        params = ModelParameters(**pkw)
    except ParameterError as exc:
        raise ConfigError(f"model parameters: {exc}") from None
    kwargs = {k: _number(values, k) for k in _SCALAR_KEYS if k in values}
    kwargs.update({k: _number(values, k, int) for k in _INT_KEYS if k in values})
    if "boundary" in values:
        kwargs["boundary"] = values["boundary"]
    eos = PolytropicEOS(
        k=_number(values, "eos_k") if "eos_k" in values else 0.0,
        gamma=_number(values, "eos_gamma") if "eos_gamma" in values else 1.0,
    )
    pot = HarmonicPotential(
        omega=_number(values, "omega") if "omega" in values else 0.0,
        center=_number(values, "center") if "center" in values else 0.0,
    )
    try:
        config = SolverConfig(params=params, eos=eos, potential=pot, **kwargs)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    init = {k[len("init_"):]: _number(values, k) for k in _INIT_KEYS if k in values}
    return config, init


def config_to_text(config: SolverConfig, init: dict[str, float] | None = None) -> str:
    p = config.params
    lines = [f"{k} = {getattr(p, k)!r}" for k in ("mass", "nu", "alpha_a", "alpha_b", "mu", "hbar")]
    for f_ in fields(config):
        if f_.name in ("params", "eos", "potential"):
            continue
        lines.append(f"{f_.name} = {getattr(config, f_.name)}")
    lines += [
        f"eos_k = {config.eos.k!r}", f"eos_gamma = {config.eos.gamma!r}",
        f"omega = {config.potential.omega!r}", f"center = {config.potential.center!r}",
    ]
    for k, val in (init or {}).items():
        lines.append(f"init_{k} = {val!r}")
    return "\n".join(lines) + "\n"
