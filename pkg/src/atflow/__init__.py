"""Unilateral minimizing movements for the Ambrosio-Tortorelli energy on 2D grids."""

__version__ = "0.1.0"

from .grid import Grid, GridError
from .energy import (EnergyBreakdown, ParameterError, Params, diffuse_crack_length, grad_rho,
                     grad_u, make_params, ms_energy_estimate, normalizing_factor, total_energy)
from .u_step import SolveReport, SolverError, UOperator, solve_u_step
from .rho_step import init_rho, solve_rho_step
from .flow import (FlowError, FlowState, StepRecord, TimePartition, Tolerances, Trace, run_flow,
                   simulate, step_alternate, step_global, validate_partition)
from .audit import AuditReport, audit_step, slope
from .crack import CrackEstimate, extract_crack, level_set_perimeter
from .sweep import SweepReport, eps_sweep
from .config import ConfigError, RunConfig, load_config, parse_config

__all__ = [
    "Grid", "GridError", "EnergyBreakdown", "ParameterError", "Params", "diffuse_crack_length",
    "grad_rho", "grad_u", "make_params", "ms_energy_estimate", "normalizing_factor", "total_energy",
    "SolveReport", "SolverError", "UOperator", "solve_u_step", "init_rho", "solve_rho_step",
    "FlowError", "FlowState", "StepRecord", "TimePartition", "Tolerances", "Trace", "run_flow",
    "simulate", "step_alternate", "step_global", "validate_partition", "AuditReport", "audit_step",
    "slope", "CrackEstimate", "extract_crack", "level_set_perimeter", "SweepReport", "eps_sweep",
    "ConfigError", "RunConfig", "load_config", "parse_config",
]
