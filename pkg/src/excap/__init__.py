"""Excursion capacities of Gaussian fields along paths.

The probability that a centered Gaussian field exceeds a high level ``u`` on
an entire path decays like ``exp(-C u**2 / 2)``, where ``C`` is the capacity
of the path: the reciprocal of the smallest energy a probability measure on
the path can have with the covariance as kernel.  This package computes such
minimal-energy measures, certifies them, and studies their structure.
"""

from .analysis import classify_regime, critical_length, four_atom_fit, limiting_shape
from .capacity import CapacityReport, DiscreteMeasure, MinimalEnergyMeasure, min_energy, solve_simplex_qp
from .exceptions import (
    ExcapError,
    NonConvergence,
    NotInRegime,
    UncertifiedMeasure,
    ValidationError,
)
from .geometry import Path, discretize, polyline, sheet_staircase, straight_line
from .kernels import (
    BrownianSheet,
    GaussianSq,
    IsotropicTabulated,
    LongMemory,
    OrnsteinUhlenbeck,
    Riesz,
    Tabulated1D,
    kernel_from_dict,
    load_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "BrownianSheet",
    "CapacityReport",
    "DiscreteMeasure",
    "ExcapError",
    "GaussianSq",
    "IsotropicTabulated",
    "LongMemory",
    "MinimalEnergyMeasure",
    "NonConvergence",
    "NotInRegime",
    "OrnsteinUhlenbeck",
    "Path",
    "Riesz",
    "Tabulated1D",
    "UncertifiedMeasure",
    "ValidationError",
    "classify_regime",
    "critical_length",
    "discretize",
    "four_atom_fit",
    "kernel_from_dict",
    "limiting_shape",
    "load_kernel",
    "min_energy",
    "polyline",
    "sheet_staircase",
    "solve_simplex_qp",
    "straight_line",
]
