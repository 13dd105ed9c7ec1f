"""Exception types shared across the package."""


class VascorError(Exception):
    """Base class for all package-specific errors."""


class DomainError(VascorError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(VascorError, ValueError):
    """A configuration value violates its contract (bounds, types, ranges)."""


class DataError(VascorError, ValueError):
    """Input data is malformed or violates a series invariant."""


class NumericalError(VascorError, ArithmeticError):
    """A computation produced a non-finite intermediate where one is not allowed.

    Carries a ``payload`` dict naming the offending quantities for diagnosis.
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = dict(payload) if payload else {}
