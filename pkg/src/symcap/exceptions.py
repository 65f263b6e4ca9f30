class SymcapError(Exception):
    """Base class for errors raised by symcap."""


class DomainError(SymcapError, ValueError):
    """Input outside the domain of an operation (non-PD, singular, ...)."""


class DimensionError(DomainError):
    """Odd, mismatched or unsupported dimension."""


class NumericalError(SymcapError, ArithmeticError):
    """An iterative or tolerance-based computation failed."""
