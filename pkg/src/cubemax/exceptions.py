"""Exception types shared across the package."""


class CubemaxError(Exception):
    """Base class for all package errors."""


class CapacityError(CubemaxError, ValueError):
    """Requested dimension exceeds a configured limit."""


class DomainError(CubemaxError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionMismatchError(CubemaxError, ValueError):
    """Operands live on hypercubes of different dimension."""


class RepresentationError(CubemaxError, ValueError):
    """An operator lacks the representation needed for a requested route."""


class NumericalResolutionError(CubemaxError, RuntimeError):
    """A numerical search failed to resolve the expected structure."""
