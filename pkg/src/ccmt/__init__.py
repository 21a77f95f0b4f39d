"""Exact semi-separation of variables for Laplace problems in periodic strips."""

from .basis import BasisEval, eval_basis, eval_boundary_mode, surface_gradient_traces
from .benchmarks import BenchmarkCase, PhiKappa, convergence_study, error_metrics, exact_modal_amplitudes_phikappa
from .ccms import assemble_coefficients, assemble_linear_system, solve_bvp, solve_ccms
from .dtn import DtnTrace, dtn_exact_benchmark, dtn_from_solution
from .eigensystem import ReferenceParams, make_station, solve_dispersion
from .expansion import ModalField, decay_diagnostics, loglog_slope, modal_amplitudes, reconstruct
from .geometry import (
    GeometryError,
    StripGeometry,
    build_custom_profile,
    build_flat,
    build_rough_profile,
    build_smooth_profile,
)
from .oracle import sigma_fd_solve

__version__ = "0.1.0"

__all__ = [
    "BasisEval",
    "BenchmarkCase",
    "DtnTrace",
    "GeometryError",
    "ModalField",
    "PhiKappa",
    "ReferenceParams",
    "StripGeometry",
    "assemble_coefficients",
    "assemble_linear_system",
    "build_custom_profile",
    "build_flat",
    "build_rough_profile",
    "build_smooth_profile",
    "convergence_study",
    "decay_diagnostics",
    "dtn_exact_benchmark",
    "dtn_from_solution",
    "error_metrics",
    "eval_basis",
    "eval_boundary_mode",
    "exact_modal_amplitudes_phikappa",
    "loglog_slope",
    "make_station",
    "modal_amplitudes",
    "reconstruct",
    "sigma_fd_solve",
    "solve_bvp",
    "solve_ccms",
    "solve_dispersion",
    "surface_gradient_traces",
]
