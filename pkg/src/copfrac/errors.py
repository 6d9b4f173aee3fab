"""Exception hierarchy shared by every module."""


class CopfracError(Exception):
    """Base class for all library errors."""


class DomainError(CopfracError, ValueError):
    """An argument lies outside the domain of the function."""


class ParameterError(CopfracError, ValueError):
    """A family parameter is outside its valid range."""


class UnsupportedDimensionError(CopfracError, ValueError):
    """The operation is only defined for a different dimension."""


class CompositionError(CopfracError, ValueError):
    """Two margins cannot be composed (e.g. disjoint supports)."""


class SingularityError(CopfracError, ArithmeticError):
    """An integrand produced a non-finite value at a quadrature node."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DivergentIntegralError(CopfracError, ArithmeticError):
    """The requested measure is infinite or its truncated tail is too large."""


class JobValidationError(CopfracError, ValueError):
    """A job description is invalid; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.reason = message
