"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class MLEltError(Exception):
    """Base class for all package errors."""


class DomainError(MLEltError, ValueError):
    """An argument or parameter lies outside its admissible domain."""


class NonConvergence(MLEltError, ArithmeticError):
    """A numerical routine exhausted its budget before reaching tolerance."""


class NonFinite(MLEltError, ArithmeticError):
    """A function evaluated to inf or nan where a finite value was required."""


class NoBracket(MLEltError, ValueError):
    """A root-finding bracket could not be established."""


class EmptySample(MLEltError, ValueError):
    pass


class DegenerateSample(MLEltError, ValueError):
    pass


class DegenerateSeries(MLEltError, ValueError):
    pass


class StudyFailure(MLEltError, RuntimeError):
    """Too many Monte-Carlo trials failed for the aggregate to be meaningful."""
