"""Exception hierarchy. CLI exit codes map onto the two base classes."""


class OrdifunError(Exception):
    """Base class for all package errors."""


class ValidationError(OrdifunError, ValueError):
    """Bad input: shapes, ranges, file contents.  CLI exit code 2.

    ``code`` is a short machine-readable tag (e.g. ``"missing_unit"``).
    """

    def __init__(self, message, code="invalid"):
        super().__init__(message)
        self.code = code


class NumericalError(OrdifunError, ArithmeticError):
    """A numerical routine failed (singular system, non-SPD metric).  CLI exit code 3."""

    def __init__(self, message, code="numerical"):
        super().__init__(message)
        self.code = code


class ConditioningError(NumericalError):
    """Cholesky failed even after the maximum diagonal jitter."""

    def __init__(self, message):
        super().__init__(message, code="conditioning")


class DegenerateFitWarning(UserWarning):
    """A reducer fit carries no signal (e.g. all units share one level)."""
