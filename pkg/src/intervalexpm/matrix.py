"""Dense interval matrices.

An :class:`IntervalMatrix` is stored as the pair of bound matrices
``(lower, upper)``; the matrix-of-intervals view is available through
indexing.  Real matrices are plain 2-d ``float64`` numpy arrays.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from intervalexpm import _rounding as rnd
from intervalexpm.errors import DomainError, ShapeError
from intervalexpm.interval import Interval


def as_real_matrix(M) -> np.ndarray:
    """Validate ``M`` as a finite 2-d float64 array."""
    arr = np.array(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError(f"expected a non-empty 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("real matrix entries must be finite")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class IntervalMatrix:
    """Rectangular matrix of closed intervals ``[lower, upper]``.

    >>> A = IntervalMatrix([[0, 1], [0, -3]], [[0, 1], [0, -2]])
    >>> A.inf_norm()
    3.0
    >>> A[1, 1]
    Interval(lo=-3.0, hi=-2.0)
    """

    __slots__ = ("lower", "upper")
    __array_priority__ = 100  # make ndarray @ IntervalMatrix defer to us

    def __init__(self, lower, upper=None):
        lo = np.array(lower, dtype=np.float64)
        hi = lo.copy() if upper is None else np.array(upper, dtype=np.float64)
        if lo.ndim != 2 or lo.shape != hi.shape or lo.size == 0:
            raise ShapeError(f"bound matrices must be non-empty, 2-d and of equal shape: "
                             f"{lo.shape} vs {hi.shape}")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise DomainError("interval bounds must not be NaN")
        if (lo > hi).any():
            raise DomainError("empty interval entry: some lower bound exceeds its upper bound")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    def __setattr__(self, name, value):
        raise AttributeError("IntervalMatrix is immutable")

    # -- construction ---------------------------------------------------

    @classmethod
    def point(cls, M) -> "IntervalMatrix":
        M = as_real_matrix(M)
        return cls(M, M)

    @classmethod
    def from_intervals(cls, rows) -> "IntervalMatrix":
        rows = [list(r) for r in rows]
        return cls([[x.lo for x in r] for r in rows], [[x.hi for x in r] for r in rows])

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "IntervalMatrix":
        z = np.zeros((rows, rows if cols is None else cols))
        return cls(z, z)

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        return cls(np.eye(n), np.eye(n))

    @classmethod
    def _raw(cls, lo: np.ndarray, hi: np.ndarray) -> "IntervalMatrix":
        # Internal constructor for results that already satisfy the invariants.
        obj = object.__new__(cls)
        object.__setattr__(obj, "lower", _frozen(np.asarray(lo, dtype=np.float64)))
        object.__setattr__(obj, "upper", _frozen(np.asarray(hi, dtype=np.float64)))
        return obj

    # -- basic protocol -------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.lower.shape

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    def __getitem__(self, idx) -> Interval:
        i, j = idx
        return Interval(self.lower[i, j], self.upper[i, j])

    def __iter__(self) -> Iterator[list[Interval]]:
        for i in range(self.rows):
            yield [self[i, j] for j in range(self.cols)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalMatrix):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in self)
        return f"IntervalMatrix([{body}])"

    @property
    def is_degenerate(self) -> bool:
        return bool(np.array_equal(self.lower, self.upper))

    @property
    def T(self) -> "IntervalMatrix":
        return IntervalMatrix._raw(self.lower.T.copy(), self.upper.T.copy())

    def midpoint(self) -> np.ndarray:
        return self.lower + 0.5 * (self.upper - self.lower)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other) -> "IntervalMatrix":
        return mat_add(self, _lift(other, self.shape))

    __radd__ = __add__

    def __sub__(self, other) -> "IntervalMatrix":
        return mat_sub(self, _lift(other, self.shape))

    def __rsub__(self, other) -> "IntervalMatrix":
        return mat_sub(_lift(other, self.shape), self)

    def __neg__(self) -> "IntervalMatrix":
        return IntervalMatrix._raw(-self.upper, -self.lower)

    def __matmul__(self, other) -> "IntervalMatrix":
        return mat_mul(self, _lift(other))

    def __rmatmul__(self, other) -> "IntervalMatrix":
        return mat_mul(_lift(other), self)

    def scale_pow2(self, L: int) -> "IntervalMatrix":
        return mat_scale_pow2(self, L)

    def divide(self, k: float) -> "IntervalMatrix":
        """Entrywise division by a positive real ``k``."""
        return mat_div_scalar(self, k)

    # -- measures and predicates ----------------------------------------

    def magnitude(self) -> np.ndarray:
        return magnitude_matrix(self)

    def inf_norm(self) -> float:
        return inf_norm(self)

    def width(self) -> np.ndarray:
        return width_matrix(self)

    def width_norm(self) -> float:
        return width_norm(self)

    def hull(self, other: "IntervalMatrix") -> "IntervalMatrix":
        return mat_hull(self, other)

    def contains_point(self, M) -> bool:
        return contains_point(self, M)

    def subset(self, other: "IntervalMatrix") -> bool:
        return subset(self, other)


def _lift(x, shape=None) -> IntervalMatrix:
    if isinstance(x, IntervalMatrix):
        return x
    if np.isscalar(x) and shape is not None:
        return IntervalMatrix(np.full(shape, float(x)))
    return IntervalMatrix.point(x)


def _check_same_shape(A: IntervalMatrix, B, what: str) -> None:
    shape_b = B.shape if hasattr(B, "shape") else np.shape(B)
    if A.shape != tuple(shape_b):
        raise ShapeError(f"{what}: shape mismatch {A.shape} vs {tuple(shape_b)}")


def mat_add(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    _check_same_shape(A, B, "mat_add")
    return IntervalMatrix._raw(rnd.add_down(A.lower, B.lower), rnd.add_up(A.upper, B.upper))


def mat_sub(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    _check_same_shape(A, B, "mat_sub")
    return IntervalMatrix._raw(rnd.sub_down(A.lower, B.upper), rnd.sub_up(A.upper, B.lower))


def mat_mul(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    """Interval matrix product, entry ``(i, j)`` being ``sum_k [a_ik][b_kj]``.

    Every variable occurs once per entry, so up to outward rounding this is
    the interval hull of ``{AB : A in [A], B in [B]}``.
    """
    if A.cols != B.rows:
        raise ShapeError(f"mat_mul: cannot multiply {A.shape} by {B.shape}")
    lo, hi = rnd.interval_matmul(A.lower, A.upper, B.lower, B.upper)
    return IntervalMatrix._raw(lo, hi)


def mat_scale_pow2(A: IntervalMatrix, L: int) -> IntervalMatrix:
    """Divide every entry by ``2**L``; exact unless the result underflows."""
    if L < 0:
        raise DomainError("scaling exponent must be non-negative")
    if L == 0:
        return A
    f = 2.0 ** -L
    return IntervalMatrix._raw(rnd.mul_down(A.lower, f), rnd.mul_up(A.upper, f))


def mat_div_scalar(A: IntervalMatrix, k: float) -> IntervalMatrix:
    if not k > 0:
        raise DomainError("only division by a positive real is supported")
    return IntervalMatrix._raw(rnd.div_down(A.lower, k), rnd.div_up(A.upper, k))


def magnitude_matrix(A: IntervalMatrix) -> np.ndarray:
    return np.maximum(np.abs(A.lower), np.abs(A.upper))


def inf_norm(A: IntervalMatrix) -> float:
    """Maximum row sum of the magnitude matrix, rounded up."""
    return float(np.max(rnd.sum_up(magnitude_matrix(A), axis=-1)))


def width_matrix(A: IntervalMatrix) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        w = rnd.sub_up(A.upper, A.lower)
    w = np.where(np.isinf(A.lower) | np.isinf(A.upper), np.inf, w)
    return w


def width_norm(A: IntervalMatrix) -> float:
    """``|| wid [A] ||_inf``, rounded up."""
    return float(np.max(rnd.sum_up(width_matrix(A), axis=-1)))


def mat_hull(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    _check_same_shape(A, B, "mat_hull")
    return IntervalMatrix._raw(np.minimum(A.lower, B.lower), np.maximum(A.upper, B.upper))


def contains_point(A: IntervalMatrix, M) -> bool:
    M = np.asarray(M, dtype=np.float64)
    _check_same_shape(A, M, "contains_point")
    return bool(np.all((A.lower <= M) & (M <= A.upper)))


def subset(A: IntervalMatrix, B: IntervalMatrix) -> bool:
    """True iff every entry of ``A`` lies inside the matching entry of ``B``."""
    _check_same_shape(A, B, "subset")
    return bool(np.all((B.lower <= A.lower) & (A.upper <= B.upper)))
