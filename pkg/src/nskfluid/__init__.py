"""Viscous (Navier-Stokes-Korteweg) fluids with a stochastic-variational uncertainty relation."""

from .params import (
    DegenerateParametersError,
    ModelParameters,
    ParameterError,
    derive_transport,
    lagrangian_matrix_det,
    momentum_matrix_spectrum,
    natural_units,
    quantum_preset,
)
from .uncertainty import FluidField1D, UncertaintyReport, min_std_product, uncertainty_report
from .states import GaussianState, make_min_uncertainty_state, sample_on_grid
from .bounds import improvement_region, min_curve, scan_phase_diagram, xi_star_paper
from .nsk_solver import SolverConfig, evolve, load_config

__all__ = [
    "DegenerateParametersError", "ModelParameters", "ParameterError", "derive_transport",
    "lagrangian_matrix_det", "momentum_matrix_spectrum", "natural_units", "quantum_preset",
    "FluidField1D", "UncertaintyReport", "min_std_product", "uncertainty_report",
    "GaussianState", "make_min_uncertainty_state", "sample_on_grid",
    "improvement_region", "min_curve", "scan_phase_diagram", "xi_star_paper",
    "SolverConfig", "evolve", "load_config",
]
