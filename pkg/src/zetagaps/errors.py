"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class ZetaGapsError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ZetaGapsError, ValueError):
    """An input lies outside the documented domain of an operation."""


class OutOfBranchError(ParameterError):
    """The series engine was asked for pi*c beyond its validity cap."""


class AccuracyError(ZetaGapsError, ArithmeticError):
    """A numerical result could not be certified to the requested tolerance."""


class ConditioningError(ZetaGapsError, ArithmeticError):
    """The Gram matrix is too ill-conditioned to factor reliably."""


class SearchFailureError(ZetaGapsError, RuntimeError):
    """No sign-change bracket was found; ``scan`` holds the evaluated table."""

    def __init__(self, message: str, scan=None):
        super().__init__(message)
        self.scan = list(scan or [])
