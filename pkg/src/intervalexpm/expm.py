"""Guaranteed enclosures of the exponential of an interval matrix.

Three operators are provided, each returning an interval matrix that
contains ``exp(A)`` for every member ``A`` of the input:

``taylor_enclosure``
    The truncated Taylor series evaluated term by term in interval
    arithmetic, plus a rigorous remainder.
``horner_enclosure``
    The same polynomial in nested (Horner) form, which suffers less from
    dependency loss.
``scaling_squaring_enclosure``
    Horner on ``[A] / 2**L`` followed by ``L`` interval squarings; by far
    the sharpest of the three.

The kernels work on stacked bound arrays of shape ``(..., n, n)`` so that
many point exponentials can be enclosed in one vectorised pass
(:func:`point_exp_enclosures`); the public functions wrap them for single
:class:`~intervalexpm.matrix.IntervalMatrix` inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from intervalexpm import _rounding as rnd
from intervalexpm.errors import DomainError, ShapeError
from intervalexpm.matrix import IntervalMatrix, as_real_matrix

DEFAULT_ORDER = 17


class Method(str, Enum):
    TAYLOR = "taylor"
    HORNER = "horner"
    SCALING_SQUARING = "scaling_squaring"

    @classmethod
    def parse(cls, name: "str | Method") -> "Method":
        if isinstance(name, Method):
            return name
        aliases = {"ss": cls.SCALING_SQUARING, "scaling-squaring": cls.SCALING_SQUARING}
        key = str(name).lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown method {name!r}") from None


@dataclass(frozen=True)
class ExpParams:
    """Truncation order ``K`` and scaling exponent ``L`` (0 without scaling)."""

    K: int
    L: int = 0

    def __post_init__(self):
        if self.K < 0 or self.L < 0:
            raise DomainError(f"K and L must be non-negative, got K={self.K}, L={self.L}")


@dataclass(frozen=True)
class EnclosureResult:
    enclosure: IntervalMatrix
    method: Method
    params: ExpParams
    width_norm: float

    @classmethod
    def build(cls, enclosure: IntervalMatrix, method: Method, params: ExpParams):
        return cls(enclosure, method, params, enclosure.width_norm())


# -- remainder -----------------------------------------------------------

def rho(alpha: float, K: int) -> float:
    """Upper bound of ``alpha**(K+1) / ((K+1)! * (1 - alpha/(K+2)))``.

    This bounds the ∞-norm of the Taylor truncation error of ``exp(A)``
    for every ``A`` with ``||A|| <= alpha``.  The numerator is accumulated as
    the product of ``alpha/k`` for ``k = 1..K+1`` so nothing overflows
    before the result does; every step is rounded upward.
    """
    alpha = float(alpha)
    if not alpha >= 0.0:
        raise DomainError(f"alpha must be a non-negative real, got {alpha!r}")
    return float(_rho_array(np.array(alpha), K))


def _rho_array(alpha: np.ndarray, K: int) -> np.ndarray:
    """:func:`rho` evaluated elementwise; ``alpha`` must be non-negative."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if K < 0:
        raise DomainError("K must be non-negative")
    if np.any(alpha >= K + 2):
        worst = float(np.max(alpha))
        raise DomainError(f"remainder bound needs alpha < K + 2 (alpha={worst!r}, K={K})")
    num = np.ones_like(alpha)
    for k in range(1, K + 2):
        num = rnd.mul_up(num, rnd.div_up(alpha, float(k)))
    den = rnd.sub_down(1.0, rnd.div_up(alpha, float(K + 2)))
    if np.any(den <= 0.0):
        # alpha is within rounding of K + 2
        raise DomainError(f"remainder bound undefined for alpha={float(np.max(alpha))!r}, K={K}")
    return np.where(alpha == 0.0, 0.0, rnd.div_up(num, den))


def _norms(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mag = np.maximum(np.abs(lo), np.abs(hi))
    return np.max(rnd.sum_up(mag, axis=-1), axis=-1)


def _add_remainder(lo, hi, r):
    r = np.asarray(r, dtype=np.float64)[..., None, None]
    return rnd.sub_down(lo, r), rnd.add_up(hi, r)


def _add_identity(lo, hi):
    n = lo.shape[-1]
    eye = np.eye(n)
    return rnd.add_down(lo, eye), rnd.add_up(hi, eye)


def _check_order(norm: np.ndarray, K: int, L: int = 0) -> None:
    bound = (K + 2) * 2.0**L
    bad = ~(np.asarray(norm) < bound)
    if np.any(bad):
        worst = float(np.max(norm))
        if L:
            raise DomainError(f"need (K+2)*2**L > ||[A]||: K={K}, L={L}, ||[A]||={worst!r}")
        raise DomainError(f"need K+2 > ||[A]||: K={K}, ||[A]||={worst!r}")


def remainder_radius(lo, hi, K: int) -> np.ndarray:
    norm = _norms(lo, hi)
    _check_order(norm, K)
    return _rho_array(norm, K)


# -- stacked kernels ------------------------------------------------------

def _taylor(lo, hi, K: int):
    r = remainder_radius(lo, hi, K)
    n = lo.shape[-1]
    eye = np.broadcast_to(np.eye(n), lo.shape)
    terms = [(eye, eye)]
    for k in range(1, K + 1):
        t_lo, t_hi = rnd.interval_matmul(*terms[-1], lo, hi)
        terms.append((rnd.div_down(t_lo, float(k)), rnd.div_up(t_hi, float(k))))
    # smallest terms first: adding them to a partial sum near 1 would cost an
    # ulp of drift per term
    s_lo, s_hi = _add_remainder(*terms[-1], r)
    for t_lo, t_hi in reversed(terms[:-1]):
        s_lo, s_hi = rnd.add_down(s_lo, t_lo), rnd.add_up(s_hi, t_hi)
    return s_lo, s_hi


def _horner_polynomial(lo, hi, K: int):
    n = lo.shape[-1]
    eye = np.broadcast_to(np.eye(n), lo.shape)
    m_lo, m_hi = eye, eye
    for k in range(K, 0, -1):
        b_lo, b_hi = rnd.div_down(lo, float(k)), rnd.div_up(hi, float(k))
        m_lo, m_hi = rnd.interval_matmul(b_lo, b_hi, m_lo, m_hi)
        m_lo, m_hi = _add_identity(m_lo, m_hi)
    return m_lo, m_hi


def _horner(lo, hi, K: int):
    r = remainder_radius(lo, hi, K)
    return _add_remainder(*_horner_polynomial(lo, hi, K), r)


def _upper_matmul(X, Y):
    """Upper bound of ``X @ Y`` for entrywise non-negative stacks."""
    return rnd.sum_up(rnd.mul_up(X[..., :, :, None], Y[..., None, :, :]), axis=-2)


def _reachability(B: np.ndarray) -> np.ndarray:
    """Boolean pattern of ``sum_j B**j`` (including ``j = 0``)."""
    n = B.shape[-1]
    Z = (B > 0) | np.eye(n, dtype=bool)
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2)))))):
        Z = Z | (np.einsum("...ik,...kj->...ij", Z.astype(np.int64), Z.astype(np.int64)) > 0)
    return Z


def componentwise_remainder(M: np.ndarray, K: int) -> np.ndarray:
    """Entrywise bound on ``|exp(M) - sum_{k<=K} M**k/k!|`` for point matrices.

    With ``C = |M|**(K+1)/(K+1)!`` and ``B = |M|/(K+2)`` the tail is at most
    ``C (I - B)**-1``.  Entries of ``(I - B)**-1`` are at most
    ``1/(1 - ||B||)`` and vanish off the reachability pattern of ``B``, so
    structural zeros of ``exp(M)`` receive no remainder.  Never larger than
    ``rho(||M||, K)`` in any entry.  ``M`` is a ``(..., n, n)`` stack with
    ``||M|| < K + 2``.
    """
    A = np.abs(np.asarray(M, dtype=np.float64))
    norm = _norms(A, A)
    _check_order(norm, K)
    # |M|**(K+1) by binary powering; upward rounding is monotone on C >= 0
    n = A.shape[-1]
    power = np.broadcast_to(np.eye(n), A.shape)
    base, e = A, K + 1
    while e:
        if e & 1:
            power = _upper_matmul(power, base)
        e >>= 1
        if e:
            base = _upper_matmul(base, base)
    inv_fact = 1.0
    for k in range(2, K + 2):
        inv_fact = rnd.div_up(inv_fact, float(k))
    C = rnd.mul_up(power, inv_fact)
    beta = rnd.div_up(norm, float(K + 2))
    geo = rnd.div_up(1.0, rnd.sub_down(1.0, beta))[..., None, None]
    Z = _reachability(A)
    R = _upper_matmul(C, np.where(Z, 1.0, 0.0))
    return rnd.mul_up(R, geo)


def _scaling_squaring(lo, hi, L: int, K: int):
    _check_order(_norms(lo, hi), K, L)
    if L:
        f = 2.0**-L
        lo, hi = rnd.mul_down(lo, f), rnd.mul_up(hi, f)
    m_lo, m_hi = _horner(lo, hi, K)
    for _ in range(L):
        m_lo, m_hi = rnd.interval_matmul(m_lo, m_hi, m_lo, m_hi)
    return m_lo, m_hi


def _point_scaling_squaring(stack, L: int, K: int):
    # same operator as _scaling_squaring but with the entrywise remainder
    lo = hi = stack
    if L:
        f = 2.0**-L
        lo, hi = rnd.mul_down(stack, f), rnd.mul_up(stack, f)
    if not np.array_equal(lo, hi):
        # scaling underflowed; the uniform remainder handles interval input
        return _scaling_squaring(stack, stack, L, K)
    r = componentwise_remainder(lo, K)
    m_lo, m_hi = _horner_polynomial(lo, hi, K)
    m_lo, m_hi = rnd.sub_down(m_lo, r), rnd.add_up(m_hi, r)
    for _ in range(L):
        m_lo, m_hi = rnd.interval_matmul(m_lo, m_hi, m_lo, m_hi)
    return m_lo, m_hi


# -- public operators -----------------------------------------------------

def _square(A: IntervalMatrix) -> None:
    if A.rows != A.cols:
        raise ShapeError(f"matrix exponential needs a square matrix, got {A.shape}")


def remainder_enclosure(A: IntervalMatrix, K: int) -> IntervalMatrix:
    """The matrix with every entry ``[-r, r]``, ``r = rho(||[A]||, K)``."""
    _square(A)
    r = rho(A.inf_norm(), K)
    full = np.full(A.shape, r)
    return IntervalMatrix._raw(-full, full)


def taylor_enclosure(A: IntervalMatrix, K: int) -> EnclosureResult:
    _square(A)
    lo, hi = _taylor(A.lower, A.upper, K)
    return EnclosureResult.build(IntervalMatrix._raw(lo, hi), Method.TAYLOR, ExpParams(K, 0))


def horner_enclosure(A: IntervalMatrix, K: int) -> EnclosureResult:
    _square(A)
    lo, hi = _horner(A.lower, A.upper, K)
    return EnclosureResult.build(IntervalMatrix._raw(lo, hi), Method.HORNER, ExpParams(K, 0))


def scaling_squaring_enclosure(A: IntervalMatrix, L: int, K: int) -> EnclosureResult:
    """Horner on ``[A] / 2**L``, then ``L`` successive interval squarings.

    Requires ``(K + 2) * 2**L > ||[A]||``.
    """
    _square(A)
    if L < 0:
        raise DomainError("L must be non-negative")
    lo, hi = _scaling_squaring(A.lower, A.upper, L, K)
    return EnclosureResult.build(
        IntervalMatrix._raw(lo, hi), Method.SCALING_SQUARING, ExpParams(K, L)
    )


def _params_for_norm(norm: float, method: Method) -> ExpParams:
    if method is Method.SCALING_SQUARING:
        if not norm > 1.0:
            return ExpParams(DEFAULT_ORDER, 0)
        if math.isinf(norm):
            raise DomainError("cannot choose parameters for an unbounded matrix")
        mant, exp = math.frexp(norm)  # norm = mant * 2**exp, 0.5 <= mant < 1
        L = exp if mant > 0.5 else exp - 1
        return ExpParams(DEFAULT_ORDER, L)
    if math.isinf(norm):
        raise DomainError("cannot choose parameters for an unbounded matrix")
    return ExpParams(max(DEFAULT_ORDER, math.floor(norm) + 3), 0)


def choose_params(A: IntervalMatrix, method: "Method | str") -> ExpParams:
    """Default ``(K, L)`` for ``method``.

    Scaling and squaring uses the smallest ``L`` with ``||[A]|| / 2**L <= 1``
    and ``K = 17``; Taylor and Horner use ``K = max(17, floor(||[A]||) + 3)``.
    """
    _square(A)
    return _params_for_norm(A.inf_norm(), Method.parse(method))


def enclose(A: IntervalMatrix, method: "Method | str" = Method.SCALING_SQUARING,
            K: int | None = None, L: int | None = None) -> EnclosureResult:
    """Run ``method`` with ``K``/``L`` defaulting to :func:`choose_params`."""
    method = Method.parse(method)
    auto = choose_params(A, method)
    K = auto.K if K is None else K
    if method is Method.SCALING_SQUARING:
        L = auto.L if L is None else L
        return scaling_squaring_enclosure(A, L, K)
    if L not in (None, 0):
        raise DomainError(f"method {method.value} takes no scaling exponent")
    if method is Method.TAYLOR:
        return taylor_enclosure(A, K)
    return horner_enclosure(A, K)


def point_exp_enclosure(M) -> IntervalMatrix:
    """Tight enclosure of ``exp(M)`` for a real matrix ``M``."""
    lo, hi = point_exp_enclosures(as_real_matrix(M)[None])
    return IntervalMatrix._raw(lo[0], hi[0])


def point_exp_enclosures(stack) -> tuple[np.ndarray, np.ndarray]:
    """Enclose ``exp`` of every real matrix in a ``(N, n, n)`` stack.

    Uses scaling and squaring with per-matrix :func:`choose_params`
    (matrices sharing ``L`` are processed together).  Returns the stacked
    lower and upper bound arrays.
    """
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ShapeError(f"expected a (N, n, n) stack, got {stack.shape}")
    norms = _norms(stack, stack)
    Ls = np.array([_params_for_norm(float(a), Method.SCALING_SQUARING).L for a in norms])
    out_lo = np.empty_like(stack)
    out_hi = np.empty_like(stack)
    for L in np.unique(Ls):
        idx = np.nonzero(Ls == L)[0]
        sub = stack[idx]
        lo, hi = _point_scaling_squaring(sub, int(L), DEFAULT_ORDER)
        out_lo[idx], out_hi[idx] = lo, hi
    return out_lo, out_hi
