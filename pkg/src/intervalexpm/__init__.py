"""Guaranteed enclosures of the exponential of interval matrices."""

from intervalexpm.errors import (
    ContainmentError,
    DomainError,
    IntervalExpmError,
    IterationError,
    ParseError,
    ShapeError,
    SingularError,
    SizeError,
)
from intervalexpm.expm import (
    EnclosureResult,
    ExpParams,
    Method,
    choose_params,
    enclose,
    horner_enclosure,
    point_exp_enclosure,
    remainder_enclosure,
    rho,
    scaling_squaring_enclosure,
    taylor_enclosure,
)
from intervalexpm.interval import Interval
from intervalexpm.matrix import (
    IntervalMatrix,
    contains_point,
    inf_norm,
    magnitude_matrix,
    mat_add,
    mat_hull,
    mat_mul,
    mat_scale_pow2,
    subset,
    width_norm,
)
from intervalexpm.precondition import (
    SimilarityBasis,
    preconditioned_exp,
    schur_basis,
    verified_inverse,
)

__version__ = "0.1.0"

__all__ = [
    "ContainmentError", "DomainError", "EnclosureResult", "ExpParams", "Interval",
    "IntervalExpmError", "IntervalMatrix", "IterationError", "Method", "ParseError",
    "ShapeError", "SimilarityBasis", "SingularError", "SizeError", "choose_params",
    "contains_point", "enclose", "horner_enclosure", "inf_norm", "magnitude_matrix",
    "mat_add", "mat_hull", "mat_mul", "mat_scale_pow2", "point_exp_enclosure",
    "preconditioned_exp", "remainder_enclosure", "rho", "scaling_squaring_enclosure",
    "schur_basis", "subset", "taylor_enclosure", "verified_inverse", "width_norm",
]
