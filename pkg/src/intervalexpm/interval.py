"""Scalar closed intervals with outward rounding."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Union

from intervalexpm import _rounding as rnd
from intervalexpm.errors import DomainError, ParseError

Number = Union["Interval", Real]


def _f(x) -> float:
    return float(x)


@dataclass(frozen=True, slots=True)
class Interval:
    """The closed interval ``[lo, hi]`` of binary64 bounds.

    A real number ``x`` is represented by the degenerate interval ``[x, x]``.
    Bounds may be infinite only as the saturated result of an overflow.

    >>> Interval(1, 3) / 2
    Interval(lo=0.5, hi=1.5)
    >>> 1 + Interval(1, 2)
    Interval(lo=2.0, hi=3.0)
    """

    lo: float
    hi: float

    def __init__(self, lo: float, hi: float | None = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("interval bounds must not be NaN")
        if lo > hi:
            raise DomainError(f"empty interval: lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @classmethod
    def enclosing(cls, value) -> "Interval":
        """Tightest interval around an exact rational or decimal value.

        ``value`` may be an int, a :class:`~fractions.Fraction`, a float or a
        decimal/hexadecimal string; strings are read exactly, not through
        float conversion.
        """
        if isinstance(value, str):
            return _parse_bound(value, value)
        if isinstance(value, float):
            return cls(value, value)
        exact = Fraction(value)
        near = float(exact)
        lo = hi = near
        if Fraction(near) > exact:
            lo = math.nextafter(near, -math.inf)
        elif Fraction(near) < exact:
            hi = math.nextafter(near, math.inf)
        return cls(lo, hi)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval(_f(rnd.add_down(self.lo, o.lo)), _f(rnd.add_up(self.hi, o.hi)))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval(_f(rnd.sub_down(self.lo, o.hi)), _f(rnd.sub_up(self.hi, o.lo)))

    def __rsub__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __mul__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        lo, hi = rnd.interval_mul(self.lo, self.hi, o.lo, o.hi)
        return Interval(_f(lo), _f(hi))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if o.lo <= 0.0 <= o.hi:
            raise DomainError(f"division by an interval containing zero: {o}")
        quotients = [rnd.div_bounds(x, y) for x in (self.lo, self.hi) for y in (o.lo, o.hi)]
        return Interval(min(_f(d) for d, _ in quotients), max(_f(u) for _, u in quotients))

    def __rtruediv__(self, other: Number) -> "Interval":
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    # -- set operations -------------------------------------------------

    def magnitude(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def width(self) -> float:
        """``hi - lo`` rounded up, so the reported width never understates."""
        if math.isinf(self.lo) or math.isinf(self.hi):
            return math.inf
        return _f(rnd.sub_up(self.hi, self.lo))

    def midpoint(self) -> float:
        if self.lo == -self.hi:
            return 0.0
        return self.lo + 0.5 * (self.hi - self.lo)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, (Fraction, int)):
            # Fraction() cannot hold a saturated bound
            return ((self.lo == -math.inf or Fraction(self.lo) <= x)
                    and (self.hi == math.inf or x <= Fraction(self.hi)))
        return self.lo <= x <= self.hi

    __contains__ = contains

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    # -- text -----------------------------------------------------------

    def __str__(self) -> str:
        return f"[{self.lo!r},{self.hi!r}]"

    def to_hex(self) -> str:
        """Exact hexadecimal rendering; :meth:`parse` reproduces it bit-for-bit."""
        return f"[{self.lo.hex()},{self.hi.hex()}]"

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Read ``[lo,hi]`` (or a bare number) with outward rounding.

        Decimal bounds are read exactly and rounded outward, so the result
        contains the interval the text denotes.  Hexadecimal bounds are exact.
        """
        text = text.strip()
        m = re.fullmatch(r"\[\s*([^,\s]+)\s*,\s*([^,\s]+)\s*\]", text)
        if m is None:
            bound = _parse_bound(text, text)
            return bound
        lo = _parse_bound(m.group(1), text).lo
        hi = _parse_bound(m.group(2), text).hi
        return cls(lo, hi)


_SPECIAL = {"inf": math.inf, "+inf": math.inf, "-inf": -math.inf, "infinity": math.inf,
            "+infinity": math.inf, "-infinity": -math.inf}


def _parse_bound(token: str, context: str) -> Interval:
    tok = token.strip().lower()
    if tok in _SPECIAL:
        v = _SPECIAL[tok]
        return Interval(v, v)
    try:
        if "0x" in tok:
            v = float.fromhex(tok)
            return Interval(v, v)
        exact = Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse number {token!r} in {context!r}") from exc
    return Interval.enclosing(exact)


def _coerce(x) -> Interval | None:
    if isinstance(x, Interval):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Interval.enclosing(x)
    if isinstance(x, Real):
        return Interval(float(x), float(x))
    return None


# Free-function API, mirroring the operator forms.

def add(a: Interval, b: Interval) -> Interval:
    return a + b


def sub(a: Interval, b: Interval) -> Interval:
    return a - b


def mul(a: Interval, b: Interval) -> Interval:
    return a * b


def div(a: Interval, b: Interval) -> Interval:
    return a / b


def magnitude(a: Interval) -> float:
    return a.magnitude()


def hull(a: Interval, b: Interval) -> Interval:
    return a.hull(b)


def width(a: Interval) -> float:
    return a.width()
