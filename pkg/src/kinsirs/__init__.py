"""Multiscale kinetic SIRS simulator.

Layers: a discrete-velocity kinetic solver (kinetic), its drift-diffusion
limit (meso) with coefficients from the closure module, the homogeneous
SIRS ODE (sirs), and a stochastic lattice agent model (abm).  The
validation module cross-checks the scales against each other; cli exposes
everything as subcommands.
"""

from .grids import (CLASSES, I, MesoField, ParamFields, PhaseField, R, S,
                    ScaleParams, SpatialGrid, VelocitySet, l2_cell_norm,
                    lp_phase_norm, make_circle_velocity_set,
                    make_two_speed_set, nondimensionalize, redimensionalize,
                    scale_quantity, velocity_moments)
from .kernels import full_kernel, q_preferred, q_reorientation, q_transition
from .kinetic import KineticConfig, kinetic_step, relaxation_step, \
    run_kinetic, transport_step
from .closure import (ClosureCoefficients, averaged_rates, compute_closure,
                      compute_D_Gamma, compute_kappa_theta,
                      confinement_coefficients, solve_reorientation_inverse)
from .meso import MesoCoefficients, MesoConfig, meso_rhs, meso_step, run_meso
from .sirs import basic_reproduction_number, endemic_equilibrium, rk4_step, \
    run_sirs, sirs_rhs
from .abm import ABMParams, AgentWorld, abm_step, init_population, run_abm
from .validation import (ComparisonReport, abm_vs_ode, closure_consistency,
                         decay_certificate, epsilon_convergence,
                         homogeneous_consistency, lp_bound_check, run_check)
from .config import ConfigError, parse_config, serialize_config

__version__ = "0.1.0"

__all__ = [
    "CLASSES", "S", "I", "R",
    "VelocitySet", "SpatialGrid", "PhaseField", "MesoField", "ParamFields",
    "ScaleParams", "make_circle_velocity_set", "make_two_speed_set",
    "velocity_moments", "nondimensionalize", "redimensionalize",
    "scale_quantity", "lp_phase_norm", "l2_cell_norm",
    "q_reorientation", "q_preferred", "q_transition", "full_kernel",
    "KineticConfig", "transport_step", "relaxation_step", "kinetic_step",
    "run_kinetic",
    "ClosureCoefficients", "solve_reorientation_inverse",
    "compute_kappa_theta", "compute_D_Gamma", "averaged_rates",
    "compute_closure", "confinement_coefficients",
    "MesoCoefficients", "MesoConfig", "meso_rhs", "meso_step", "run_meso",
    "sirs_rhs", "rk4_step", "run_sirs", "basic_reproduction_number",
    "endemic_equilibrium",
    "ABMParams", "AgentWorld", "init_population", "abm_step", "run_abm",
    "ComparisonReport", "homogeneous_consistency", "epsilon_convergence",
    "decay_certificate", "lp_bound_check", "abm_vs_ode",
    "closure_consistency", "run_check",
    "ConfigError", "parse_config", "serialize_config",
]
