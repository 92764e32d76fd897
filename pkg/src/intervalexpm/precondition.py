"""Similarity preconditioning: ``exp(A) = P exp(P^-1 A P) P^-1``.

``P`` itself is an ordinary floating point matrix (here the orthogonal
factor of a real Schur decomposition); only ``P^-1`` has to be enclosed
rigorously.  A poor ``P`` costs sharpness, never soundness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from intervalexpm import _rounding as rnd
from intervalexpm.errors import IterationError, ShapeError, SingularError
from intervalexpm.expm import (
    EnclosureResult,
    ExpParams,
    Method,
    choose_params,
    scaling_squaring_enclosure,
)
from intervalexpm.matrix import IntervalMatrix, as_real_matrix, mat_mul


@dataclass(frozen=True)
class SimilarityBasis:
    P: np.ndarray
    P_inv_enclosure: IntervalMatrix

    @classmethod
    def identity(cls, n: int) -> "SimilarityBasis":
        return cls(np.eye(n), IntervalMatrix.identity(n))

    @classmethod
    def from_matrix(cls, P) -> "SimilarityBasis":
        P = as_real_matrix(P)
        return cls(P, verified_inverse(P))


def verified_inverse(P) -> IntervalMatrix:
    """Interval matrix guaranteed to contain the exact inverse of ``P``.

    With ``R`` an approximate inverse and ``G = I - R P`` enclosed in
    interval arithmetic, ``||G|| <= g < 1`` gives
    ``||P^-1 - R|| <= ||R|| g / (1 - g)``; that bound inflates every entry
    of ``R``.
    """
    P = as_real_matrix(P)
    n, m = P.shape
    if n != m:
        raise ShapeError(f"verified_inverse needs a square matrix, got {P.shape}")
    try:
        R = np.linalg.inv(P)
    except np.linalg.LinAlgError as exc:
        raise SingularError(f"matrix is numerically singular: {exc}") from exc
    if not np.all(np.isfinite(R)):
        raise SingularError("approximate inverse is not finite")
    RP = mat_mul(IntervalMatrix.point(R), IntervalMatrix.point(P))
    G = IntervalMatrix.identity(n) - RP
    g = G.inf_norm()
    if not g < 1.0:
        raise SingularError(f"residual norm {g!r} >= 1; inverse cannot be verified")
    norm_R = IntervalMatrix.point(R).inf_norm()
    h = float(rnd.div_up(rnd.mul_up(norm_R, g), rnd.sub_down(1.0, g)))
    return IntervalMatrix._raw(rnd.sub_down(R, h), rnd.add_up(R, h))


def schur_basis(A) -> SimilarityBasis:
    """Orthogonal basis from the real Schur form ``A = P T P^T``."""
    if isinstance(A, IntervalMatrix):
        A = A.midpoint()
    A = as_real_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"schur_basis needs a square matrix, got {A.shape}")
    try:
        _, P = scipy.linalg.schur(A, output="real")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise IterationError(f"Schur iteration failed: {exc}") from exc
    return SimilarityBasis.from_matrix(P)


def preconditioned_exp(A: IntervalMatrix, basis: SimilarityBasis, L: int, K: int
                       ) -> EnclosureResult:
    """``P · [S]([P^-1] [A] P, L, K) · [P^-1]`` in interval arithmetic."""
    if basis.P.shape != A.shape:
        raise ShapeError(f"basis shape {basis.P.shape} does not match matrix {A.shape}")
    P = IntervalMatrix.point(basis.P)
    Pinv = basis.P_inv_enclosure
    inner = mat_mul(mat_mul(Pinv, A), P)
    core = scaling_squaring_enclosure(inner, L, K).enclosure
    enclosure = mat_mul(mat_mul(P, core), Pinv)
    return EnclosureResult.build(enclosure, Method.SCALING_SQUARING, ExpParams(K, L))


def preconditioned_params(A: IntervalMatrix, basis: SimilarityBasis) -> ExpParams:
    """Automatic ``(K, L)`` for the transformed matrix ``[P^-1] [A] P``."""
    inner = mat_mul(mat_mul(basis.P_inv_enclosure, A), IntervalMatrix.point(basis.P))
    return choose_params(inner, Method.SCALING_SQUARING)
