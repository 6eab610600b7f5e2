"""Exception types raised across the package."""
from __future__ import annotations


class DiffintError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(DiffintError, ValueError):
    """A physical or numerical parameter is out of its valid domain."""


class DegenerateTiltError(InvalidParameterError):
    """Entangled-ensemble tilt angle makes one of the two estimators singular.

    The phase estimator carries a 1/cos(varphi) prefactor and the
    anti-symmetric-phase estimator a 1/sin(varphi) prefactor, so varphi
    congruent to 0 or pi/2 (mod pi) leaves one quadrature unread.
    """


class OptimizationFailedError(DiffintError, RuntimeError):
    """Detuning optimization could not bracket or refine a minimum."""


class ConfigError(DiffintError, ValueError):
    """A run-configuration file is malformed.

    Carries the 1-based line number of the offending entry when known.
    """

    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
