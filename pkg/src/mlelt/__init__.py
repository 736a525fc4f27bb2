"""Mittag-Leffler distributions, Laplace-transform inversion and empirical-transform fitting."""

from . import ar1, estimation, lt_inversion, ml_dist, numerics, prabhakar
from .errors import (
    DegenerateSample,
    DegenerateSeries,
    DomainError,
    EmptySample,
    MLEltError,
    NoBracket,
    NonConvergence,
    NonFinite,
    StudyFailure,
)

__version__ = "0.1.0"

__all__ = [
    "ar1",
    "estimation",
    "lt_inversion",
    "ml_dist",
    "numerics",
    "prabhakar",
    "DegenerateSample",
    "DegenerateSeries",
    "DomainError",
    "EmptySample",
    "MLEltError",
    "NoBracket",
    "NonConvergence",
    "NonFinite",
    "StudyFailure",
]
