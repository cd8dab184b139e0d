"""Exception types shared across the package.

Each class maps onto one CLI exit code (see :mod:`heisenberg_xy.cli`).
"""


class HeisenbergXYError(Exception):
    """Base class for all package errors."""


class UsageError(HeisenbergXYError, ValueError):
    """Caller passed arguments outside the supported surface."""


class DomainError(HeisenbergXYError, ValueError):
    """An input violates a mathematical or physical precondition."""


class NumericError(HeisenbergXYError, ArithmeticError):
    """A numerical procedure failed (non-convergence, breach of invariants)."""


class SingularMatrixError(NumericError):
    pass


class MultiplicityError(NumericError):
    """The steady-state manifold is not one-dimensional."""


class UnsupportedRegimeError(DomainError):
    pass


class NotFoundError(NumericError):
    pass


class CrossValidationError(HeisenbergXYError):
    """Independent routes to the same quantity disagree."""
