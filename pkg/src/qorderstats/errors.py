"""Exception types raised by qorderstats."""


class QDomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SizeError(ValueError):
    """An enumeration was requested beyond its configured size cap."""


class UnsupportedRegionError(ValueError):
    """A nested integration region is not expressible with scalar-multiple limits."""


class NumericError(ArithmeticError):
    """A series or product produced a non-finite value or failed to converge."""


class InsufficientAcceptanceError(RuntimeError):
    """Rejection sampling accepted too few records to form an estimate."""
