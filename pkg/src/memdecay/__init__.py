"""Spontaneous decay of a two-level emitter beyond the exponential law.

Modules
-------
special      Sine, cosine and exponential integrals (double or mpmath).
params       Dimensionless parameter sets and physical presets.
kernels      Regularized memory kernels and their exact panel moments.
volterra     Product-trapezoidal solver, spectral amplitude, unitarity audit.
asymptotics  Closed forms, contour reconstruction, crossover times.
figures      Tables behind the five decay figures.
cli          ``memdecay`` command.
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DomainError, MemDecayError, PrecisionError, ResolutionError,
                     ResolutionWarning, UnsupportedKindError)
from .kernels import KernelKind, kernel_value
from .params import Params, from_b_tilde, from_dimensionless, from_physical
from .special import DOUBLE, PrecisionConfig
from .volterra import Grid, Trajectory, solve, spectral_amplitude, unitarity_audit
from .asymptotics import AsymptoticModel, amplitude_model, branch_cut_integrals, crossover_times

__all__ = [
    "ConvergenceError", "DomainError", "MemDecayError", "PrecisionError", "ResolutionError",
    "ResolutionWarning", "UnsupportedKindError", "KernelKind", "kernel_value", "Params",
    "from_b_tilde", "from_dimensionless", "from_physical", "DOUBLE", "PrecisionConfig", "Grid",
    "Trajectory", "solve", "spectral_amplitude", "unitarity_audit", "AsymptoticModel",
    "amplitude_model", "branch_cut_integrals", "crossover_times",
]
