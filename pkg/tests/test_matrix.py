import numpy as np
import pytest

from intervalexpm import DomainError, Interval, IntervalMatrix, ShapeError
from intervalexpm.matrix import (
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
from intervalexpm.oracle import example1_matrix

BOCHEV = np.array([[-131.0, 19, 18], [-390, 56, 54], [-387, 57, 52]])


def random_box(rng, shape, width=0.5):
    lo = rng.uniform(-1, 1, shape)
    return IntervalMatrix(lo, lo + rng.uniform(0, width, shape))


class TestConstruction:
    def test_rejects_crossed_bounds(self):
        with pytest.raises(DomainError):
            IntervalMatrix([[1.0]], [[0.0]])

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            IntervalMatrix([[np.nan]])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ShapeError):
            IntervalMatrix(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_two_views_agree(self):
        M = IntervalMatrix.from_intervals([[Interval(0, 1), Interval(-2, -1)]])
        assert M[0, 1] == Interval(-2, -1)
        np.testing.assert_array_equal(M.lower, [[0, -2]])
        np.testing.assert_array_equal(M.upper, [[1, -1]])

    def test_arrays_are_read_only(self):
        M = IntervalMatrix.identity(2)
        with pytest.raises(ValueError):
            M.lower[0, 0] = 5.0


class TestAlgebra:
    def test_add_zero(self, rng):
        A = random_box(rng, (3, 3))
        assert mat_add(A, IntervalMatrix.zeros(3)) == A

    def test_example1_doubled(self):
        A = example1_matrix()
        S = A + A
        np.testing.assert_array_equal(S.lower, 2 * A.lower)
        np.testing.assert_array_equal(S.upper, 2 * A.upper)

    def test_add_shape_error(self):
        with pytest.raises(ShapeError):
            mat_add(IntervalMatrix.zeros(2), IntervalMatrix.zeros(3))

    def test_mul_identity(self, rng):
        A = random_box(rng, (3, 4))
        assert mat_mul(A, IntervalMatrix.identity(4)) == A

    def test_mul_shape_error(self):
        with pytest.raises(ShapeError):
            mat_mul(IntervalMatrix.zeros(2, 3), IntervalMatrix.zeros(2, 3))

    def test_degenerate_product_brackets_real_product(self, rng):
        A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
        P = IntervalMatrix.point(A) @ IntervalMatrix.point(B)
        assert P.contains_point(A @ B)
        assert np.all(P.upper - P.lower <= 8 * np.spacing(np.abs(A) @ np.abs(B)))

    @pytest.mark.parametrize("shape", [(2, 2, 2), (3, 4, 2), (4, 4, 4), (1, 3, 1)])
    def test_mul_is_hull_of_products(self, rng, shape):
        n, m, p = shape
        A, B = random_box(rng, (n, m)), random_box(rng, (m, p))
        C = mat_mul(A, B)
        # entry (i,j) is a sum of single-occurrence terms: its extremes come
        # from choosing each a_ik, b_kj at an endpoint
        lo_best = np.full((n, p), np.inf)
        hi_best = np.full((n, p), -np.inf)
        for _ in range(10_000 // 10):
            bits_a = rng.integers(0, 2, (10, n, m)).astype(bool)
            bits_b = rng.integers(0, 2, (10, m, p)).astype(bool)
            SA = np.where(bits_a, A.upper, A.lower)
            SB = np.where(bits_b, B.upper, B.lower)
            prods = SA @ SB
            assert np.all(C.lower <= prods) and np.all(prods <= C.upper)
            lo_best = np.minimum(lo_best, prods.min(axis=0))
            hi_best = np.maximum(hi_best, prods.max(axis=0))
        # exact extremes per entry, by choosing the endpoint pair termwise
        cand = np.stack([A.lower[:, :, None] * B.lower[None], A.lower[:, :, None] * B.upper[None],
                         A.upper[:, :, None] * B.lower[None], A.upper[:, :, None] * B.upper[None]])
        exact_lo = cand.min(axis=0).sum(axis=1)
        exact_hi = cand.max(axis=0).sum(axis=1)
        scale = np.spacing(np.abs(cand).max(axis=0).sum(axis=1))
        assert np.all(exact_lo - C.lower <= 4 * scale)
        assert np.all(C.upper - exact_hi <= 4 * scale)
        assert np.all(lo_best >= C.lower) and np.all(hi_best <= C.upper)

    def test_scale_pow2_exact(self):
        A = IntervalMatrix.point(BOCHEV)
        S = mat_scale_pow2(A, 12)
        assert S[0, 0] == Interval(-131 / 4096)
        back = IntervalMatrix(S.lower * 4096, S.upper * 4096)
        assert back == A

    def test_scale_pow2_examples(self):
        assert mat_scale_pow2(IntervalMatrix([[2.0]], [[4.0]]), 1)[0, 0] == Interval(1, 2)
        A = example1_matrix()
        assert mat_scale_pow2(A, 0) == A


class TestMeasures:
    def test_magnitude_example1(self):
        np.testing.assert_array_equal(magnitude_matrix(example1_matrix()), [[0, 1], [0, 3]])

    def test_norms(self):
        assert inf_norm(example1_matrix()) == 3
        assert inf_norm(IntervalMatrix.point(BOCHEV)) == 500
        assert inf_norm(IntervalMatrix.zeros(3)) == 0

    def test_norm_rounds_up(self):
        A = IntervalMatrix.point([[0.1, 0.2, 0.3]])
        from fractions import Fraction
        assert Fraction(inf_norm(A)) >= Fraction(0.1) + Fraction(0.2) + Fraction(0.3)

    def test_norm_monotone(self, rng):
        for _ in range(50):
            B = random_box(rng, (3, 3))
            A = IntervalMatrix(B.lower + 0.1 * (B.upper - B.lower), B.upper)
            assert subset(A, B)
            assert inf_norm(A) <= inf_norm(B)

    def test_width_norm(self):
        assert width_norm(example1_matrix()) == 1
        assert width_norm(IntervalMatrix.point(BOCHEV)) == 0


class TestSetOperations:
    def test_hull_of_endpoint_matrices(self):
        A = example1_matrix()
        assert mat_hull(IntervalMatrix.point(A.lower), IntervalMatrix.point(A.upper)) == A

    def test_hull_is_least_upper_bound(self, rng):
        for _ in range(30):
            A, B = random_box(rng, (2, 3)), random_box(rng, (2, 3))
            H = mat_hull(A, B)
            assert subset(A, H) and subset(B, H)
            C = IntervalMatrix(H.lower - rng.uniform(0, 1, (2, 3)), H.upper + rng.uniform(0, 1, (2, 3)))
            assert subset(H, C)
            # shrinking any bound of the hull loses A or B
            lo = H.lower.copy()
            lo[0, 0] = np.nextafter(lo[0, 0], np.inf)
            shrunk = IntervalMatrix(lo, np.maximum(lo, H.upper))
            assert not (subset(A, shrunk) and subset(B, shrunk))

    def test_contains_point(self):
        A = example1_matrix()
        assert contains_point(A, A.lower)
        assert not contains_point(A, A.upper + 1e-9)
        with pytest.raises(ShapeError):
            contains_point(A, np.zeros((3, 3)))

    def test_subset(self):
        A = example1_matrix()
        assert subset(A, A)
        with pytest.raises(ShapeError):
            subset(A, IntervalMatrix.zeros(3))
