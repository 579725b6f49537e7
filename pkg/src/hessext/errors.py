"""Exception types raised by the library."""


class HessextError(Exception):
    """Base class for all library errors."""


class InvalidInputError(HessextError, ValueError):
    """Input data is malformed (NaN values, bad parameters, wrong mode)."""


class DomainError(HessextError, ValueError):
    """A precondition on the numerical domain of an operation is violated."""


class BracketError(HessextError, RuntimeError):
    """A root-finding bracket does not enclose a sign change."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConsistencyError(HessextError, RuntimeError):
    """Two independent routes to the same quantity disagree."""


class NumericalDegeneracyError(HessextError, ArithmeticError):
    """A quantity that must be nonzero vanished on the grid."""
