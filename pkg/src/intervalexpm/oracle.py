"""Ground truth for checking enclosures.

* closed-form optimal hull of the exponential of ``[[0, 1], [0, t]]``;
* inner approximations of the hull of ``exp([A])`` from point exponentials
  at endpoints or sampled members;
* the nilpotent block family whose top-right exponential entry is
  ``x^T B y / 6``, whose exact range follows from vertex enumeration;
* the ε-accuracy metric and the ε-sweep used to compare methods.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from intervalexpm import _rounding as rnd
from intervalexpm.errors import ContainmentError, DomainError, ShapeError, SizeError
from intervalexpm.expm import (
    ExpParams,
    _params_for_norm,
    horner_enclosure,
    Method,
    point_exp_enclosures,
    scaling_squaring_enclosure,
)
from intervalexpm.interval import Interval
from intervalexpm.matrix import IntervalMatrix, as_real_matrix

MAX_BILINEAR_N = 12
# Enumerate every vertex of [A] first when there are at most this many.
MAX_ENUMERATED_VERTICES = 1024


# -- Example family [[0, 1], [0, t]] ---------------------------------------

def _exp_interval(t: float) -> Interval:
    """Outward enclosure of ``e**t`` (libm is faithful to well under 2 ulp)."""
    v = math.exp(t)
    lo, hi = v, v
    for _ in range(2):
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
    return Interval(max(lo, 0.0), hi)


def _expm1_over_t(t: float) -> Interval:
    if t == 0.0:
        return Interval(1.0, 1.0)
    num = math.expm1(t)
    num_iv = Interval(num, num)
    for _ in range(2):
        num_iv = Interval(math.nextafter(num_iv.lo, -math.inf), math.nextafter(num_iv.hi, math.inf))
    return num_iv / Interval(t, t)


def example1_hull(t_lo: float, t_hi: float) -> IntervalMatrix:
    """Hull of ``{exp([[0, 1], [0, t]]) : t_lo <= t <= t_hi}``.

    ``exp = [[1, (e**t - 1)/t], [0, e**t]]``; both non-trivial entries are
    increasing in ``t`` so the hull is spanned by the endpoint values
    (``(e**t - 1)/t`` is continued by 1 at ``t = 0``).
    """
    if t_lo > t_hi:
        raise DomainError("t_lo must not exceed t_hi")
    e_lo, e_hi = _exp_interval(t_lo), _exp_interval(t_hi)
    f_lo, f_hi = _expm1_over_t(t_lo), _expm1_over_t(t_hi)
    lower = [[1.0, f_lo.lo], [0.0, e_lo.lo]]
    upper = [[1.0, f_hi.hi], [0.0, e_hi.hi]]
    return IntervalMatrix(lower, upper)


def example1_matrix(t_lo: float = -3.0, t_hi: float = -2.0) -> IntervalMatrix:
    return IntervalMatrix([[0.0, 1.0], [0.0, t_lo]], [[0.0, 1.0], [0.0, t_hi]])


# -- inner approximations of the hull ---------------------------------------

def _default_params(A: IntervalMatrix) -> ExpParams:
    return _params_for_norm(A.inf_norm(), Method.SCALING_SQUARING)


def _point_hull(stack: np.ndarray, params: ExpParams | None) -> IntervalMatrix:
    if params is None:
        lo, hi = point_exp_enclosures(stack)
    else:
        lo = np.empty_like(stack)
        hi = np.empty_like(stack)
        for i, M in enumerate(stack):
            res = scaling_squaring_enclosure(IntervalMatrix.point(M), params.L, params.K)
            lo[i], hi[i] = res.enclosure.lower, res.enclosure.upper
    return IntervalMatrix._raw(lo.min(axis=0), hi.max(axis=0))


def endpoint_hull_lower_bound(A: IntervalMatrix, params: ExpParams | None = None
                              ) -> IntervalMatrix:
    """Hull of the point enclosures of ``exp(lower(A))`` and ``exp(upper(A))``.

    ``params`` are the scaling-squaring parameters for the two point
    exponentials; by default each gets its own automatic choice.
    """
    if A.rows != A.cols:
        raise ShapeError("endpoint_hull_lower_bound needs a square matrix")
    stack = np.stack([A.lower, A.upper])
    if A.is_degenerate:
        stack = stack[:1]
    return _point_hull(stack, params)


def member_samples(A: IntervalMatrix, samples: int, seed: int = 0) -> np.ndarray:
    """Deterministic ``(samples, n, m)`` stack of members of ``[A]``.

    The sequence starts with the lower and upper endpoint matrices, then the
    remaining vertices (all of them when there are at most
    ``MAX_ENUMERATED_VERTICES``), then uniform interior points.  Above that
    vertex count random vertices and interior points alternate.  For a fixed
    seed the result for ``s`` samples is a prefix of the one for ``s + 1``.
    """
    if samples < 1:
        raise DomainError("samples must be at least 1")
    lo, hi = A.lower, A.upper
    free = np.flatnonzero(lo != hi)
    d = free.size
    rng = np.random.default_rng(seed)
    out = np.empty((samples,) + A.shape)

    def vertex(bits: np.ndarray) -> np.ndarray:
        M = lo.copy().ravel()
        M[free] = np.where(bits, hi.ravel()[free], lo.ravel()[free])
        return M.reshape(A.shape)

    def interior() -> np.ndarray:
        u = rng.random(A.shape)
        return np.clip(lo + u * (hi - lo), lo, hi)

    if d == 0:
        out[:] = lo
        return out
    i = 0
    out[i] = lo
    i += 1
    if i < samples:
        out[i] = hi
        i += 1
    if 2**d <= MAX_ENUMERATED_VERTICES:
        for code in range(1, 2**d - 1):
            if i >= samples:
                break
            out[i] = vertex(np.array([(code >> b) & 1 for b in range(d)], dtype=bool))
            i += 1
        while i < samples:
            out[i] = interior()
            i += 1
    else:
        toggle = True
        while i < samples:
            out[i] = vertex(rng.random(d) < 0.5) if toggle else interior()
            toggle = not toggle
            i += 1
    return out


def sampled_hull_lower_bound(A: IntervalMatrix, samples: int, seed: int = 0) -> IntervalMatrix:
    """Hull of tight enclosures of ``exp(M)`` over sampled members ``M``."""
    if A.rows != A.cols:
        raise ShapeError("sampled_hull_lower_bound needs a square matrix")
    return _point_hull(member_samples(A, samples, seed), None)


def _reachable(pattern: np.ndarray) -> np.ndarray:
    """``Z[i, j]``: a path of length >= 1 leads from ``i`` to ``j``."""
    Z = pattern.copy()
    for _ in range(Z.shape[0]):
        nxt = Z | ((Z.astype(np.int64) @ pattern.astype(np.int64)) > 0)
        if np.array_equal(nxt, Z):
            break
        Z = nxt
    return Z


def rational_point_exp(M, tail_bits: int = 160) -> IntervalMatrix:
    """Tightest binary64 enclosure of ``exp(M)`` for a real matrix ``M``.

    The Taylor polynomial is evaluated exactly in integer arithmetic over a
    common denominator; the tail (at most ``2**-tail_bits`` per entry, zero
    on entries no path of ``M`` reaches) is bounded by the rational remainder
    formula.  Rounding the exact interval outward gives bounds that every
    sound binary64 enclosure of ``exp(M)`` contains, barring exact values
    within ``2**-tail_bits`` of a float.  Slow; meant for spot checks.
    """
    M = as_real_matrix(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ShapeError(f"rational_point_exp needs a square matrix, got {M.shape}")
    F = [[Fraction(float(v)) for v in row] for row in M]
    D0 = max(f.denominator for row in F for f in row)  # a power of two
    Mi = np.array([[int(f * D0) for f in row] for row in F], dtype=object)
    alpha = Fraction(max(sum(abs(v) for v in row) for row in Mi), D0)
    bound = Fraction(1, 2**tail_bits)
    N, term = 0, alpha  # term = alpha**(N+1) / (N+1)!
    while not (alpha < N + 2 and term / (1 - alpha / (N + 2)) <= bound):
        N += 1
        term = term * alpha / (N + 1)
    tail = term / (1 - alpha / (N + 2))
    eye = np.eye(n, dtype=np.int64).astype(object)
    num, den = eye.copy(), 1
    for k in range(N, 0, -1):
        den_k = k * D0 * den
        num = den_k * eye + Mi.dot(num)
        den = den_k
    reach = _reachable(M != 0)
    lo = np.empty((n, n))
    hi = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            x = Fraction(int(num[i, j]), den)
            r = tail if reach[i, j] else 0
            lo[i, j] = rnd._directed(x - r)[0]
            hi[i, j] = rnd._directed(x + r)[1]
    return IntervalMatrix(lo, hi)


def point_exponentials_inside(E: IntervalMatrix, members: np.ndarray,
                              lo: np.ndarray | None = None,
                              hi: np.ndarray | None = None) -> np.ndarray:
    """Per member ``M``: does ``E`` contain the tight enclosure of ``exp(M)``?

    The fast batched point enclosures decide almost every case; a member
    whose fast enclosure pokes out of ``E`` (by an ulp of rounding, say) is
    re-decided with :func:`rational_point_exp`.  ``lo``/``hi`` may pass
    precomputed fast enclosures of ``members``.
    """
    if lo is None or hi is None:
        lo, hi = point_exp_enclosures(members)
    inside = np.all((lo >= E.lower) & (hi <= E.upper), axis=(1, 2))
    for s in np.flatnonzero(~inside):
        inside[s] = rational_point_exp(members[s]).subset(E)
    return inside


# -- nilpotent bilinear family ----------------------------------------------

@dataclass(frozen=True)
class BilinearInstance:
    B: np.ndarray
    x_box: IntervalMatrix
    y_box: IntervalMatrix

    def __post_init__(self):
        B = as_real_matrix(self.B)
        object.__setattr__(self, "B", B)
        n = B.shape[0]
        if B.shape != (n, n) or self.x_box.shape != (n, 1) or self.y_box.shape != (n, 1):
            raise ShapeError("BilinearInstance needs B (n, n) and boxes (n, 1)")

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def corner(self) -> tuple[int, int]:
        return 0, 2 * self.n + 1

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BilinearInstance":
        """Random instance on a dyadic grid, so every entry prints exactly."""
        B = rng.integers(-8, 9, size=(n, n)) / 4.0

        def box() -> IntervalMatrix:
            a = rng.integers(-16, 17, size=(n, 1)) / 8.0
            w = rng.integers(0, 9, size=(n, 1)) / 8.0
            return IntervalMatrix(a, a + w)

        return cls(B, box(), box())


def bilinear_matrix(inst: BilinearInstance) -> IntervalMatrix:
    """The ``(2n+2) x (2n+2)`` block matrix with ``x^T``, ``B`` and ``y`` above
    the diagonal; each member ``M`` satisfies ``M**4 = 0``."""
    n = inst.n
    N = 2 * n + 2
    lo = np.zeros((N, N))
    hi = np.zeros((N, N))
    lo[0, 1:n + 1] = inst.x_box.lower[:, 0]
    hi[0, 1:n + 1] = inst.x_box.upper[:, 0]
    lo[1:n + 1, n + 1:2 * n + 1] = inst.B
    hi[1:n + 1, n + 1:2 * n + 1] = inst.B
    lo[n + 1:2 * n + 1, N - 1] = inst.y_box.lower[:, 0]
    hi[n + 1:2 * n + 1, N - 1] = inst.y_box.upper[:, 0]
    return IntervalMatrix(lo, hi)


def bilinear_exact_corner(inst: BilinearInstance) -> Interval:
    """Outward enclosure of ``{x^T B y / 6 : x in [x], y in [y]}``.

    A bilinear form attains its extrema over a box at vertices.  For each
    vertex of ``[x]`` the best ``y`` is picked coordinatewise (the form is
    linear in ``y``), so only the ``2**n`` vertices of ``[x]`` are walked.
    """
    n = inst.n
    if n > MAX_BILINEAR_N:
        raise SizeError(f"vertex enumeration limited to n <= {MAX_BILINEAR_N}, got {n}")
    xl, xh = inst.x_box.lower[:, 0], inst.x_box.upper[:, 0]
    yl, yh = inst.y_box.lower[:, 0], inst.y_box.upper[:, 0]
    bits = np.array(list(itertools.product((False, True), repeat=n)), dtype=bool).reshape(-1, n)
    X = np.where(bits, xh, xl)  # (2**n, n)
    # w = x^T B, enclosed per vertex
    w_lo, w_hi = rnd.interval_matmul(X, X, inst.B, inst.B)
    c_lo, c_hi = rnd.interval_mul(w_lo, w_hi, yl, yl)
    d_lo, d_hi = rnd.interval_mul(w_lo, w_hi, yh, yh)
    # max over y_i of w_i y_i is larger of the two endpoint choices
    best_hi = rnd.sum_up(np.maximum(c_hi, d_hi), axis=-1)
    best_lo = rnd.sum_down(np.minimum(c_lo, d_lo), axis=-1)
    total = Interval(float(best_lo.min()), float(best_hi.max()))
    return total / 6


def bilinear_corner_bruteforce(inst: BilinearInstance) -> tuple[Fraction, Fraction]:
    """Exact rational min and max of ``x^T B y / 6`` over all vertex pairs."""
    n = inst.n
    B = [[Fraction(float(v)) for v in row] for row in inst.B]
    xs = [(Fraction(float(a)), Fraction(float(b)))
          for a, b in zip(inst.x_box.lower[:, 0], inst.x_box.upper[:, 0])]
    ys = [(Fraction(float(a)), Fraction(float(b)))
          for a, b in zip(inst.y_box.lower[:, 0], inst.y_box.upper[:, 0])]
    vals = []
    for xv in itertools.product(*xs):
        w = [sum(xv[i] * B[i][j] for i in range(n)) for j in range(n)]
        for yv in itertools.product(*ys):
            vals.append(sum(w[j] * yv[j] for j in range(n)) / 6)
    return min(vals), max(vals)


# -- accuracy metric ---------------------------------------------------------

def eps_accuracy(enclosure: IntervalMatrix, reference_hull: IntervalMatrix) -> float:
    """Largest deviation of any bound of ``enclosure`` from the reference hull."""
    if enclosure.shape != reference_hull.shape:
        raise ShapeError(f"shape mismatch {enclosure.shape} vs {reference_hull.shape}")
    if not reference_hull.subset(enclosure):
        raise ContainmentError("reference hull is not contained in the enclosure")
    d_lo = rnd.sub_up(reference_hull.lower, enclosure.lower)
    d_hi = rnd.sub_up(enclosure.upper, reference_hull.upper)
    return float(max(np.max(d_lo), np.max(d_hi)))


# -- epsilon sweep -----------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    width_horner: float
    width_ss: float
    width_lower_bound: float


SWEEP_HEADER = "epsilon,width_horner,width_ss,width_lower_bound"
SWEEP_HORNER_ORDER = 170
SWEEP_SS_PARAMS = ExpParams(10, 10)


def inflate(A0, eps: float) -> IntervalMatrix:
    """``A0 + [-eps, eps] E`` with outward rounding."""
    A0 = as_real_matrix(A0)
    return IntervalMatrix._raw(rnd.sub_down(A0, eps), rnd.add_up(A0, eps))


def epsilon_sweep(A0, eps_values: Sequence[float], K_horner: int = SWEEP_HORNER_ORDER,
                  ss_params: ExpParams = SWEEP_SS_PARAMS, seed: int = 0) -> list[SweepRow]:
    """Width norms of Horner, scaling-squaring and the endpoint hull on
    ``A0 + [-eps, eps]`` for each ``eps``.

    ``seed`` is accepted for interface stability; the endpoint bound uses
    no randomness.
    """
    A0 = as_real_matrix(A0)
    eps_values = [float(e) for e in eps_values]
    if any(e < 0 for e in eps_values):
        raise DomainError("epsilon values must be non-negative")
    if any(b < a for a, b in zip(eps_values, eps_values[1:])):
        raise DomainError("epsilon values must be sorted ascending")
    rows = []
    for eps in eps_values:
        A = inflate(A0, eps)
        try:
            wh = horner_enclosure(A, K_horner).width_norm
            ws = scaling_squaring_enclosure(A, ss_params.L, ss_params.K).width_norm
        except DomainError as exc:
            raise DomainError(f"epsilon={eps!r}: {exc}") from exc
        wl = endpoint_hull_lower_bound(A).width_norm()
        rows.append(SweepRow(eps, wh, ws, wl))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(",".join(f"{v:.17e}" for v in
                              (r.epsilon, r.width_horner, r.width_ss, r.width_lower_bound)))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LinearFit:
    """Fit of ``width ≈ intercept + coefficient * eps`` over the linear regime."""

    loglog_slope: float
    intercept: float
    coefficient: float
    mask: np.ndarray


def fit_linear_regime(eps, widths, low_slope: float = 0.5, high_slope: float = 1.5
                      ) -> LinearFit:
    """Locate the regime where width grows linearly in ``eps`` and fit it.

    The floor is the width at the smallest positive ``eps``.  The regime
    starts at the first point above ten times the floor whose local
    log-log slope exceeds ``low_slope``, and ends where the local slope
    first exceeds ``high_slope`` (the divergence onset); points above a
    tenth of the width at the onset are dropped.
    """
    eps = np.asarray(eps, dtype=np.float64)
    w = np.asarray(widths, dtype=np.float64)
    keep = (eps > 0) & np.isfinite(w) & (w > 0)
    eps, w = eps[keep], w[keep]
    if eps.size < 3:
        raise DomainError("need at least three positive points to fit")
    le, lw = np.log10(eps), np.log10(w)
    local = np.diff(lw) / np.diff(le)  # slope between point i and i+1
    floor = w[0]
    onset = len(w)
    started = False
    for i, s in enumerate(local):
        if not started and w[i] >= 10 * floor and s > low_slope:
            started = True
        if started and s > high_slope:
            onset = i + 1
            break
    limit = 0.1 * w[onset] if onset < len(w) else np.inf
    mask = (w >= 10 * floor) & (w <= limit) & (np.arange(len(w)) < onset)
    if mask.sum() < 2:
        raise DomainError("linear regime has fewer than two points")
    slope = float(np.polyfit(le[mask], lw[mask], 1)[0])
    # relative least squares for width = c0 + c1 * eps
    design = np.stack([np.ones(mask.sum()), eps[mask]], axis=1) / w[mask, None]
    (c0, c1), *_ = np.linalg.lstsq(design, np.ones(mask.sum()), rcond=None)
    full_mask = np.zeros(keep.shape, dtype=bool)
    full_mask[np.flatnonzero(keep)[mask]] = True
    return LinearFit(slope, float(c0), float(c1), full_mask)
