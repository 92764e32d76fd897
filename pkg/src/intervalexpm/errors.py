"""Exception hierarchy shared by the whole package."""


class IntervalExpmError(Exception):
    """Base class for every error raised by :mod:`intervalexpm`."""


class DomainError(IntervalExpmError, ValueError):
    """An operation was called outside its mathematical domain."""


class ShapeError(IntervalExpmError, ValueError):
    """Matrix operands have incompatible shapes."""


class SingularError(IntervalExpmError, ArithmeticError):
    """A matrix inverse could not be verified."""


class IterationError(IntervalExpmError, ArithmeticError):
    """An unverified floating point iteration failed to converge."""


class SizeError(IntervalExpmError, ValueError):
    """A problem is too large for exhaustive enumeration."""


class ContainmentError(IntervalExpmError, AssertionError):
    """A reference set is not contained in an enclosure that must contain it."""


class ParseError(IntervalExpmError, ValueError):
    """Malformed interval or interval-matrix text."""
