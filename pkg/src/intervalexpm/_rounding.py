"""Directed rounding on binary64 arrays without touching the FPU mode.

Every kernel evaluates the operation once in round-to-nearest and recovers
the exact rounding error with an error-free transformation (TwoSum, Dekker's
product, exact division remainder).  The sign of that error says whether the
nearest result is already a valid lower/upper bound or has to move by one
unit in the last place.  This yields the tightest directed-rounded result
wherever the transformation is exact.  Products and quotients whose
operands fall outside that range (huge, tiny or subnormal values) are
recomputed exactly with rationals, so every kernel is tight everywhere and
therefore monotone in its arguments.

All functions broadcast like numpy ufuncs and never mutate their inputs, so
they are safe to call from several threads at once.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

INF = np.inf
MAX_FLOAT = np.finfo(np.float64).max

_SPLITTER = 134217729.0  # 2**27 + 1
# Operand magnitudes for which Dekker's product is provably exact.
_SAFE_MIN = 2.0**-480
_SAFE_MAX = 2.0**500


def next_down(x):
    return np.nextafter(x, -INF)


def next_up(x):
    return np.nextafter(x, INF)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def add_down(a, b):
    """Largest float not above ``a + b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        s, err = _two_sum(a, b)
        out = np.where(err < 0, next_down(s), s)
        if not np.all(np.isfinite(s)):
            finite_in = np.isfinite(a) & np.isfinite(b)
            out = np.where((s == INF) & finite_in, MAX_FLOAT, out)
            out = np.where(np.isnan(s), -INF, out)
    return out


def add_up(a, b):
    """Smallest float not below ``a + b``."""
    return -add_down(-np.asarray(a, dtype=np.float64), -np.asarray(b, dtype=np.float64))


def sub_down(a, b):
    return add_down(a, -np.asarray(b, dtype=np.float64))


def sub_up(a, b):
    return add_up(a, -np.asarray(b, dtype=np.float64))


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _safe_operand(x):
    ax = np.abs(x)
    return (ax >= _SAFE_MIN) & (ax <= _SAFE_MAX)


def _directed(exact: Fraction) -> tuple[float, float]:
    """Tightest float bounds of an exact rational."""
    try:
        f = float(exact)
    except OverflowError:
        return (MAX_FLOAT, INF) if exact > 0 else (-INF, -MAX_FLOAT)
    g = Fraction(f)
    if g == exact:
        return f, f
    if g > exact:
        return float(next_down(f)), f
    return f, float(next_up(f))


def _refine(down, up, a, b, mask, exact_op):
    """Overwrite ``down``/``up`` where ``mask`` holds with exact rational results."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return down, up
    a = np.broadcast_to(a, mask.shape).ravel()
    b = np.broadcast_to(b, mask.shape).ravel()
    down = np.array(np.broadcast_to(down, mask.shape), dtype=np.float64)
    up = np.array(np.broadcast_to(up, mask.shape), dtype=np.float64)
    d, u = down.reshape(-1), up.reshape(-1)
    for i in idx:
        d[i], u[i] = exact_op(float(a[i]), float(b[i]))
    return down, up


def _exact_mul(x: float, y: float) -> tuple[float, float]:
    if np.isinf(x) or np.isinf(y):
        v = INF if (x > 0) == (y > 0) else -INF
        return v, v
    return _directed(Fraction(x) * Fraction(y))


def _exact_div(x: float, y: float) -> tuple[float, float]:
    if np.isinf(x) and np.isinf(y):
        return -INF, INF
    if np.isinf(x):
        v = INF if (x > 0) == (y > 0) else -INF
        return v, v
    if np.isinf(y):
        return 0.0, 0.0
    return _directed(Fraction(x) / Fraction(y))


def mul_bounds(a, b):
    """Return ``(down, up)``: directed roundings of the exact product ``a*b``.

    ``0 * inf`` is taken as 0, the usual convention for interval bounds.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        safe = _safe_operand(a) & _safe_operand(b)
        a_ = np.where(safe, a, 1.0)
        b_ = np.where(safe, b, 1.0)
        p_safe, err = _two_prod(a_, b_)
        zero = (a == 0) | (b == 0)
        down = np.where(err < 0, next_down(p_safe), p_safe)
        up = np.where(err > 0, next_up(p_safe), p_safe)
        down = np.where(zero, 0.0, down)
        up = np.where(zero, 0.0, up)
    return _refine(down, up, a, b, ~safe & ~zero, _exact_mul)


def mul_down(a, b):
    return mul_bounds(a, b)[0]


def mul_up(a, b):
    return mul_bounds(a, b)[1]


def div_bounds(a, b):
    """Return ``(down, up)``: directed roundings of ``a / b`` for ``b != 0``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore", under="ignore", divide="ignore"):
        q = a / b
        safe = _safe_operand(q) & _safe_operand(b) & _safe_operand(a)
        q_ = np.where(safe, q, 1.0)
        b_ = np.where(safe, b, 1.0)
        a_ = np.where(safe, a, 1.0)
        p, e = _two_prod(q_, b_)
        # a - p is exact (Sterbenz); the sign of the remainder is that of r.
        r = (a_ - p) - e
        direction = np.sign(r) * np.sign(b_)
        down = np.where(direction < 0, next_down(q_), q_)
        up = np.where(direction > 0, next_up(q_), q_)
        exact_zero = (a == 0) & (b != 0)
        down = np.where(exact_zero, 0.0, down)
        up = np.where(exact_zero, 0.0, up)
        # division by an exact zero has no bound
        by_zero = b == 0
        down = np.where(by_zero, -INF, down)
        up = np.where(by_zero, INF, up)
    return _refine(down, up, a, b, ~safe & ~exact_zero & ~by_zero, _exact_div)


def div_down(a, b):
    return div_bounds(a, b)[0]


def div_up(a, b):
    return div_bounds(a, b)[1]


def sum_down(x, axis=-1):
    """Left-to-right sum along ``axis`` with every addition rounded down."""
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, 0)
    acc = x[0]
    for k in range(1, x.shape[0]):
        acc = add_down(acc, x[k])
    return acc


def sum_up(x, axis=-1):
    """Left-to-right sum along ``axis`` with every addition rounded up."""
    return -sum_down(-np.asarray(x, dtype=np.float64), axis=axis)


def interval_mul(alo, ahi, blo, bhi):
    """Entrywise interval product from the four endpoint products."""
    d1, u1 = mul_bounds(alo, blo)
    d2, u2 = mul_bounds(alo, bhi)
    d3, u3 = mul_bounds(ahi, blo)
    d4, u4 = mul_bounds(ahi, bhi)
    lo = np.minimum(np.minimum(d1, d2), np.minimum(d3, d4))
    hi = np.maximum(np.maximum(u1, u2), np.maximum(u3, u4))
    return lo, hi


def interval_matmul(alo, ahi, blo, bhi):
    """Interval matrix product over the last two axes (leading axes broadcast).

    Each entry is the left-to-right outward-rounded sum of the interval
    products of a row of the left operand with a column of the right one.
    """
    plo, phi = interval_mul(
        alo[..., :, :, None], ahi[..., :, :, None], blo[..., None, :, :], bhi[..., None, :, :]
    )
    return sum_down(plo, axis=-2), sum_up(phi, axis=-2)
