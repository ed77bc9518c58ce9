"""Exception hierarchy shared across the laboratory.

Every rejection carries enough context (parameter names, witness points) to
reproduce the failure; nothing is reported as a silent NaN or infinity.
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for all laboratory errors."""


class InvalidParameter(LabError):
    """Input rejected by a precondition (out-of-range parameter, dim mismatch)."""


class EvaluationFailure(LabError):
    """Pointwise evaluation failed (overflow in exp, undefined value)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class QuadratureFailure(LabError):
    """An integral could not be computed (non-finite integrand, divergence)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class SubharmonicityError(LabError):
    """A field construction was rejected by the numerical subharmonicity test."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class TypeConditionViolation(LabError):
    """The Euclidean-regularity sup diverges (or exceeds the overflow guard).

    ``witness`` is the grid point at which the violation was detected.
    """

    def __init__(self, message: str, witness=None, log_ratio: float | None = None):
        super().__init__(message)
        self.witness = witness
        self.log_ratio = log_ratio


class ConfigError(LabError):
    """Campaign configuration could not be parsed or validated."""
