"""Exception hierarchy shared by the library and the CLI.

Each family maps to one CLI exit code (see :mod:`ballsquare.cli`).
"""


class BallSquareError(Exception):
    """Base class for all library errors."""


class ParameterError(BallSquareError, ValueError):
    """Invalid argument or violated precondition (CLI exit code 2)."""


class RangeViolation(ParameterError):
    """Smoothness exponent outside the admissible range."""


class ConvergenceError(BallSquareError, ArithmeticError):
    """A quadrature did not reach its tolerance within budget (exit code 3)."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FieldFormatError(BallSquareError, OSError):
    """Malformed field file (exit code 4)."""


class BadMagicError(FieldFormatError):
    pass


class DimensionMismatchError(FieldFormatError):
    pass


class TruncatedPayloadError(FieldFormatError):
    pass
