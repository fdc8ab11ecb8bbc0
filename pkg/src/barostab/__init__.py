"""Steady states, time evolution and relative-energy diagnostics for the
symmetric barotropic Navier-Stokes system with inflow and outflow."""

from .eos import EosSpec, PotentialTable
from .errors import (BarostabError, BlowDown, BracketFailure, ConfigError, DensityOutOfRange,
                     InsufficientSamples, NonFiniteState, QuadratureFailure, StepFailure,
                     ToleranceFailure, WallClockBudget)
from .evolve import FluidState, RunConfig, mms_convergence, run, step
from .relenergy import RelEnergySample, decay_report, inequality_ledger, relative_energy
from .steady import (BoundaryData, Geometry, SteadyProfile, solve_annulus_steady,
                     solve_exterior_steady, solve_steady, solve_strip_steady, steady_residual)

__version__ = "0.1.0"

__all__ = [
    "BarostabError", "BlowDown", "BoundaryData", "BracketFailure", "ConfigError",
    "DensityOutOfRange", "EosSpec", "FluidState", "Geometry", "InsufficientSamples",
    "NonFiniteState", "PotentialTable", "QuadratureFailure", "RelEnergySample", "RunConfig",
    "SteadyProfile", "StepFailure", "ToleranceFailure", "WallClockBudget", "decay_report",
    "inequality_ledger", "mms_convergence", "relative_energy", "run", "solve_annulus_steady",
    "solve_exterior_steady", "solve_steady", "solve_strip_steady", "steady_residual", "step",
]
