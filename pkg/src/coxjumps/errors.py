"""Exceptions raised by coxjumps.

All public operations raise subclasses of `CoxJumpsError`; each concrete
class also derives from ValueError or RuntimeError.
"""

from typing import Optional


class CoxJumpsError(Exception):
    """Base class for every error raised by the library."""


class DomainError(CoxJumpsError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(CoxJumpsError, RuntimeError):
    """A numerical scheme did not reach the requested tolerance.

    Attributes:
        estimate: Best available estimate when the scheme stopped.
        error_bound: Error estimate attached to `estimate`.
    """

    def __init__(self, message: str, estimate=None, error_bound=None) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class AccuracyError(CoxJumpsError, RuntimeError):
    """A result failed a consistency check (e.g. a spurious imaginary part)."""


class ConfigurationError(CoxJumpsError, ValueError):
    """Invalid run configuration.

    Attributes:
        line: 1-based line of the configuration document the error refers to,
            when known.
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        super().__init__(message)
        self.line = line
