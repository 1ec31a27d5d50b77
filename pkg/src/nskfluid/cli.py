"""Command-line entry point: ``nsk <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .nsk_solver import ConfigError, NumericalInstability, load_config, evolve
from .params import ModelParameters, ParameterError, quantum_preset
from .sde_sim import (
    Ensemble,
    EnsembleDivergence,
    drift_field,
    empirical_compare,
    propagate_ensemble,
    sample_positions,
)
from .states import GaussianState, gaussian_uncertainty_product, make_min_uncertainty_state, sample_on_grid
from .uncertainty import FieldError, FluidField1D, min_std_product, uncertainty_report


class UsageError(Exception):
    """Bad flags or input files; maps to exit code 1."""


@dataclass
class CommandResult:
    exit_code: int
    artifacts: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.16e}"


def write_csv(path, header, rows) -> str:
    """Single header row, comma separated, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            writer.writerow([_fmt(v) for v in row])
    return str(path)


def read_state_csv(path) -> FluidField1D:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"x", "rho", "v"} - set(reader.fieldnames or [])
            if missing:
                raise UsageError(f"{path}: missing column {sorted(missing)[0]!r}")
            rows = [(float(r["x"]), float(r["rho"]), float(r["v"])) for r in reader]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    data = np.array(rows, dtype=float).reshape(-1, 3)
    try:
        return FluidField1D(data[:, 0], data[:, 1], data[:, 2])
    except FieldError as exc:
        raise UsageError(f"{path}: {exc}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_param_flags(p, required=False):
    p.add_argument("--preset", choices=["quantum"])
    p.add_argument("--alpha-a", type=float)
    p.add_argument("--alpha-b", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)


def _params_from(args) -> ModelParameters:
    if getattr(args, "preset", None) == "quantum":
        return quantum_preset(args.mass, args.hbar)
    for flag in ("alpha_a", "alpha_b", "nu"):
        if getattr(args, flag) is None:
            raise UsageError(f"missing --{flag.replace('_', '-')} (or use --preset quantum)")
    return ModelParameters(mass=args.mass, nu=args.nu, alpha_a=args.alpha_a, alpha_b=args.alpha_b,
                           mu=args.mu, hbar=args.hbar)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("params", help="transport coefficients and structural matrices")
    _add_param_flags(p)

    p = sub.add_parser("min-state", help="viscous minimum-uncertainty Gaussian")
    _add_param_flags(p)
    p.add_argument("--A", dest="a", type=float, required=True)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--v0", type=float, default=0.0)

    p = sub.add_parser("uncertainty", help="uncertainty report for a sampled state")
    _add_param_flags(p)
    p.add_argument("--state-file", required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--out")

    p = sub.add_parser("phase-diagram", help="improvement region scan")
    p.add_argument("--k-max", type=float, required=True)
    p.add_argument("--s-max", type=float, required=True)
    p.add_argument("--nk", type=int, default=201)
    p.add_argument("--ns", type=int, default=201)
    p.add_argument("--out", required=True)

    p = sub.add_parser("min-curve", help="minimum std product along kappa = nu^2")
    p.add_argument("--xi-max", type=float, required=True)
    p.add_argument("--n", type=int, default=301)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bounds", help="KSS / kappa / nu bounds and media estimates")
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--nu", type=float)
    p.add_argument("--alpha-b", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--water", action="store_true")
    p.add_argument("--vapor", action="store_true")

    p = sub.add_parser("evolve", help="run the NSK solver from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sde", help="Euler-Maruyama ensemble of the forward SDE")
    p.add_argument("--drift", choices=["ground-state", "from-snapshot"], required=True)
    p.add_argument("--snapshot")
    p.add_argument("--A", dest="a", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--particles", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--rows", type=int, default=10)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out", required=True)

    sub.add_parser("verify", help="run the acceptance checks")
    return parser


def _cmd_params(args) -> CommandResult:
    return CommandResult(0, summary=_params_from(args).to_dict())


def _cmd_min_state(args) -> CommandResult:
    params = _params_from(args)
    state = make_min_uncertainty_state(params, args.a, args.x0, args.v0)
    var_product, std_product = gaussian_uncertainty_product(state, params)
    summary = {**state.to_dict(), "variance_product": var_product, "std_product": std_product,
               "min_std_product": min_std_product(params), "kappa": params.kappa, "xi": params.xi}
    return CommandResult(0, summary=summary)


def _cmd_uncertainty(args) -> CommandResult:
    params = _params_from(args)
    field_ = read_state_csv(args.state_file)
    try:
        field_.check_mass()
    except FieldError as exc:
        raise UsageError(f"{args.state_file}: {exc}") from None
    rep = uncertainty_report(field_, params)
    row = {"t": args.t, **rep.as_row()}
    artifacts = []
    if args.out:
        artifacts.append(write_csv(Path(args.out) / "uncertainty.csv", list(row), [row]))
    return CommandResult(0, artifacts, row)


def _cmd_phase_diagram(args) -> CommandResult:
    cells = bounds.scan_phase_diagram((0.0, args.k_max), (0.0, args.s_max), args.nk, args.ns)
    header = ["k", "s", "min_over_mnu", "improves_paper", "improves_direct"]
    path = write_csv(Path(args.out) / "phase_diagram.csv", header, [asdict(c) for c in cells])
    summary = {
        "cells": len(cells),
        "improves_paper_count": sum(c.improves_paper for c in cells),
        "improves_direct_count": sum(c.improves_direct for c in cells),
        "path": path,
    }
    return CommandResult(0, [path], summary)


def _cmd_min_curve(args) -> CommandResult:
    if args.n < 2 or args.xi_max < 0:
        raise UsageError("--n must be >= 2 and --xi-max non-negative")
    curve = bounds.min_curve(np.linspace(0.0, args.xi_max, args.n), args.mass, args.nu)
    path = write_csv(Path(args.out) / "min_curve.csv", ["xi_over_nu", "std_product"], curve)
    return CommandResult(0, [path], {"points": len(curve), "inviscid_minimum": args.mass * args.nu, "path": path})


def _cmd_bounds(args) -> CommandResult:
    if args.hbar is None:
        if args.water or args.vapor:
            from scipy.constants import hbar
            args.hbar = hbar
        else:
            args.hbar = 1.0
    m, hb = args.mass, args.hbar
    if m <= 0 or hb <= 0:
        raise UsageError("--mass and --hbar must be positive")
    summary = {
        "mass": m,
        "hbar": hb,
        "xi_kss": hb / (8.0 * math.pi * m),
        "xi_star_max_quantum": 0.5 * math.sqrt(3.0) * hb / m,
    }
    summary["ratio"] = summary["xi_star_max_quantum"] / summary["xi_kss"]
    if args.nu is not None:
        b = bounds.kss_and_kappa_bounds(m, args.nu, hb, args.alpha_b if args.alpha_b else 1.0)
        summary["nu"] = args.nu
        summary["kappa_lb"] = b.kappa_lb
        if args.alpha_b:
            summary["nu_lb"] = b.nu_lb
    if args.water:
        est = bounds.media_estimate(m, hbar=hb, **bounds.LIQUID_WATER)
        summary.update(water_std_product=est.std_product, in_units_of_half_hbar=est.in_units_of_half_hbar)
    if args.vapor:
        printed = bounds.media_estimate(m, hbar=hb, **bounds.WATER_VAPOR_PRINTED)
        alt = bounds.media_estimate(m, hbar=hb, **bounds.WATER_VAPOR_ALT)
        summary.update(
            vapor_std_product=printed.std_product,
            vapor_in_units_of_half_hbar=printed.in_units_of_half_hbar,
            vapor_alt_std_product=alt.std_product,
            vapor_alt_in_units_of_half_hbar=alt.in_units_of_half_hbar,
        )
    return CommandResult(0, summary=summary)


def _cmd_evolve(args) -> CommandResult:
    try:
        config, init = load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
    state = GaussianState(a=init.get("a", 1.0), b=init.get("b", 0.0), x0=init.get("x0", 0.0),
                          v0=init.get("v0", 0.0))
    initial = sample_on_grid(state, config.grid)
    out = Path(args.out)
    header = ["t", "mass", "sigma2_x", "sigma2_p", "cov_xv", "lhs", "rhs", "std_product", "margin", "holds"]
    artifacts = [write_csv(out / "snapshot_initial.csv", ["x", "rho", "v"],
                           zip(initial.grid, initial.rho, initial.v))]
    try:
        traj = evolve(initial, config)
    except NumericalInstability as exc:
        if exc.trajectory is not None:
            artifacts.append(write_csv(out / "diagnostics.csv", header, exc.trajectory.diagnostics_rows()))
        return CommandResult(2, artifacts, {"error": str(exc), "t": exc.t, "step": exc.step})
    final = traj.snapshots[-1]
    artifacts.append(write_csv(out / "diagnostics.csv", header, traj.diagnostics_rows()))
    artifacts.append(write_csv(out / "snapshot_final.csv", ["x", "rho", "v"], zip(final.grid, final.rho, final.v)))
    summary = {
        "steps": traj.steps,
        "t_end": traj.times[-1],
        "mass_drift": traj.masses[-1] - traj.masses[0],
        "all_hold": all(r.holds for r in traj.reports),
        "std_product_initial": traj.reports[0].std_product,
        "std_product_final": traj.reports[-1].std_product,
        "max_clipped_mass": max(traj.clipped_mass),
    }
    return CommandResult(0, artifacts, summary)


def _cmd_sde(args) -> CommandResult:
    if args.particles < 1 or args.steps < 1 or args.rows < 1 or not args.dt > 0:
        raise UsageError("--particles, --steps, --rows must be positive and --dt > 0")
    if args.drift == "ground-state":
        params = ModelParameters(mass=1.0, nu=args.nu, alpha_a=0.0, alpha_b=0.5)
        state = GaussianState(a=args.a)
        half = 10.0 * math.sqrt(state.sigma2_x)
        reference = sample_on_grid(state, np.linspace(-half, half, 2049))
    else:
        if not args.snapshot:
            raise UsageError("--drift from-snapshot requires --snapshot")
        params = ModelParameters(mass=1.0, nu=args.nu, alpha_a=0.0, alpha_b=0.5)
        reference = read_state_csv(args.snapshot)
    drift = drift_field(reference, params)
    e = sample_positions(reference, args.particles, args.seed)
    per_row = max(1, args.steps // args.rows)
    rows = []

    def summarize(ens: Ensemble):
        cmp_ = empirical_compare(ens, reference, args.bins)
        rows.append({"t": ens.t, "n_particles": ens.size, "mean": ens.mean(), "variance": ens.variance(),
                     "hist_l1_error": cmp_.hist_l1_error, "var_error": cmp_.var_error, "seed": args.seed})

    summarize(e)
    done = 0
    try:
        while done < args.steps:
            k = min(per_row, args.steps - done)
            e = propagate_ensemble(e, drift, params.nu, args.dt, k)
            done += k
            summarize(e)
    except EnsembleDivergence as exc:
        return CommandResult(2, [], {"error": str(exc), "t": exc.t})
    header = ["t", "n_particles", "mean", "variance", "hist_l1_error", "var_error", "seed"]
    path = write_csv(Path(args.out) / "ensemble_summary.csv", header, rows)
    return CommandResult(0, [path], {k: rows[-1][k] for k in header} | {"path": path})


def _cmd_verify(args) -> CommandResult:
    from .verify import run_all
    results = run_all(echo=print)
    passed = sum(r.passed for r in results)
    return CommandResult(0 if passed == len(results) else 1, [],
                         {"passed": passed, "total": len(results)})


_COMMANDS = {
    "params": _cmd_params,
    "min-state": _cmd_min_state,
    "uncertainty": _cmd_uncertainty,
    "phase-diagram": _cmd_phase_diagram,
    "min-curve": _cmd_min_curve,
    "bounds": _cmd_bounds,
    "evolve": _cmd_evolve,
    "sde": _cmd_sde,
    "verify": _cmd_verify,
}


def run(argv=None) -> CommandResult:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (UsageError, ParameterError, ConfigError, FieldError) as exc:
        return CommandResult(1, [], {"error": str(exc).splitlines()[0]})
    except NumericalInstability as exc:
        return CommandResult(2, [], {"error": str(exc), "t": exc.t, "step": exc.step})


def main(argv=None) -> int:
    result = run(argv)
    if result.exit_code == 1 and "error" in result.summary:
        print(f"error: {result.summary['error']}", file=sys.stderr)
    print(json.dumps(result.summary, default=_json_default))
    return result.exit_code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
