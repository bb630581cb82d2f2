"""Temporal multiscale solvers for periodically forced flow coupled to fractional plaque growth."""

__version__ = "0.1.0"

from .config import PRESETS, parse_config
from .drivers import RunReport, SimConfig, compare_runs, run_direct, run_multiscale
from .errors import (
    ConfigError,
    DomainError,
    FracPlaqueError,
    GeometryError,
    NonConvergenceError,
    StepFailureError,
    TransferError,
    UnsupportedDomainError,
)
from .frac_core import (
    FracHistory,
    caputo_l1_eval,
    l1_macro_step,
    l1_weights,
    mittag_leffler,
    ode_exact_solution,
    rl_integral_eval,
)
from .geometry import ChannelShape, build_channel_mesh, shape_height
from .micro import NSMicroModel, OdeMicroModel, advance_one_period, averaged_reaction
from .periodic import find_periodic_orbit
from .study import alpha_sweep, convergence_study

__all__ = [
    "ChannelShape",
    "ConfigError",
    "DomainError",
    "FracHistory",
    "FracPlaqueError",
    "GeometryError",
    "NSMicroModel",
    "NonConvergenceError",
    "OdeMicroModel",
    "PRESETS",
    "RunReport",
    "SimConfig",
    "StepFailureError",
    "TransferError",
    "UnsupportedDomainError",
    "advance_one_period",
    "alpha_sweep",
    "averaged_reaction",
    "build_channel_mesh",
    "caputo_l1_eval",
    "compare_runs",
    "convergence_study",
    "find_periodic_orbit",
    "l1_macro_step",
    "l1_weights",
    "mittag_leffler",
    "ode_exact_solution",
    "parse_config",
    "rl_integral_eval",
    "run_direct",
    "run_multiscale",
    "shape_height",
]
