import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from intervalexpm import (
    DomainError,
    ExpParams,
    IntervalMatrix,
    Method,
    ShapeError,
    choose_params,
    enclose,
    horner_enclosure,
    point_exp_enclosure,
    remainder_enclosure,
    rho,
    scaling_squaring_enclosure,
    taylor_enclosure,
)
from intervalexpm.expm import point_exp_enclosures
from intervalexpm.oracle import example1_matrix

BOCHEV = np.array([[-131.0, 19, 18], [-390, 56, 54], [-387, 57, 52]])


def rho_exact(alpha, K):
    a = Fraction(alpha)
    return a ** (K + 1) / (math.factorial(K + 1) * (1 - a / (K + 2)))


class TestRho:
    def test_zero(self):
        assert rho(0, 10) == 0

    def test_known_values(self):
        assert rho(1, 10) == pytest.approx(2.7329e-8, rel=1e-4)
        assert Fraction(rho(1, 10)) >= Fraction(12, math.factorial(11) * 11)
        assert rho(3, 16) == pytest.approx(4.36e-7, rel=1e-3)

    @pytest.mark.parametrize("alpha,K", [(0.5, 5), (1, 17), (3, 16), (10, 30), (0.1, 170), (1, 510)])
    def test_upper_bound_of_exact_value(self, alpha, K):
        exact = rho_exact(alpha, K)
        r = rho(alpha, K)
        assert Fraction(r) >= exact
        if r >= np.finfo(float).tiny:
            # below the normal range the spacing itself exceeds the tolerance
            assert (Fraction(r) - exact) / exact < Fraction(1, 10**12)

    def test_domain(self):
        with pytest.raises(DomainError):
            rho(12, 10)
        with pytest.raises(DomainError):
            rho(-1, 10)
        with pytest.raises(DomainError):
            rho(math.nan, 10)

    def test_monotone(self):
        alphas = [0.25, 0.5, 1, 2, 4, 8]
        vals = [rho(a, 12) for a in alphas]
        assert vals == sorted(vals) and len(set(vals)) == len(vals)
        ks = [rho(2.0, K) for K in range(5, 30)]
        assert all(a > b for a, b in zip(ks, ks[1:]))

    def test_remainder_enclosure(self):
        R = remainder_enclosure(example1_matrix(), 16)
        r = rho(3, 16)
        assert np.all(R.upper == r) and np.all(R.lower == -r)
        assert remainder_enclosure(IntervalMatrix.zeros(3), 5) == IntervalMatrix.zeros(3)
        radii = [remainder_enclosure(example1_matrix(), K).upper[0, 0] for K in range(5, 40)]
        assert all(a > b for a, b in zip(radii, radii[1:]))


OPERATORS = [
    ("taylor", lambda A, K: taylor_enclosure(A, K)),
    ("horner", lambda A, K: horner_enclosure(A, K)),
    ("ss", lambda A, K: scaling_squaring_enclosure(A, 2, K)),
]


@pytest.mark.parametrize("name,op", OPERATORS)
def test_zero_matrix_gives_identity(name, op):
    E = op(IntervalMatrix.zeros(3), 10).enclosure
    assert E == IntervalMatrix.identity(3)


@pytest.mark.parametrize("name,op", OPERATORS)
def test_encloses_scipy_expm_on_points(name, op, rng):
    for _ in range(10):
        n = int(rng.integers(1, 5))
        M = rng.uniform(-1, 1, (n, n))
        E = op(IntervalMatrix.point(M), 20).enclosure
        assert E.contains_point(scipy.linalg.expm(M)) or np.all(
            np.abs(E.midpoint() - scipy.linalg.expm(M)) < 1e-13
        )


def test_diag_minus_one_taylor():
    E = taylor_enclosure(IntervalMatrix.point(-np.eye(2)), 17).enclosure
    # e^-1 to 30 digits; scalar series remainder at K=17 is ~1e-16
    e_inv = Fraction("0.367879441171442321595523770161")
    for i in range(2):
        assert Fraction(E.lower[i, i]) <= e_inv <= Fraction(E.upper[i, i])
        assert E.upper[i, i] - E.lower[i, i] < 1e-12


def test_scaling_with_L0_is_horner(rng):
    A = IntervalMatrix(*(lambda lo: (lo, lo + 0.1))(rng.uniform(-1, 1, (3, 3))))
    assert scaling_squaring_enclosure(A, 0, 12).enclosure == horner_enclosure(A, 12).enclosure


def test_degenerate_taylor_and_horner_agree(rng):
    worst = 0.0
    for _ in range(30):
        M = rng.uniform(-0.5, 0.5, (3, 3))
        A = IntervalMatrix.point(M)
        T = taylor_enclosure(A, 20).enclosure
        H = horner_enclosure(A, 20).enclosure
        scale = np.spacing(max(T.magnitude().max(), H.magnitude().max()))
        d = max(np.abs(T.lower - H.lower).max(), np.abs(T.upper - H.upper).max())
        worst = max(worst, d / scale)
    assert worst <= 8


def test_precondition_violations():
    A = example1_matrix()
    with pytest.raises(DomainError):
        taylor_enclosure(A, 0)
    with pytest.raises(DomainError):
        horner_enclosure(A, 1)
    with pytest.raises(DomainError):
        scaling_squaring_enclosure(IntervalMatrix.point(BOCHEV), 2, 10)
    with pytest.raises(ShapeError):
        taylor_enclosure(IntervalMatrix.zeros(2, 3), 5)


class TestParams:
    def test_example1(self):
        assert choose_params(example1_matrix(), "ss") == ExpParams(17, 2)
        assert choose_params(example1_matrix(), Method.TAYLOR) == ExpParams(17, 0)

    def test_zero(self):
        assert choose_params(IntervalMatrix.zeros(2), "ss") == ExpParams(17, 0)

    def test_bochev(self):
        A = IntervalMatrix.point(BOCHEV)
        assert choose_params(A, "taylor").K >= 503
        p = choose_params(A, "ss")
        assert A.inf_norm() / 2**p.L <= 1

    @pytest.mark.parametrize("norm", [0.3, 1.0, 1.5, 2.0, 3.0, 4.0, 1000.0, 2**20 + 1])
    def test_scaled_norm_at_most_one(self, norm):
        A = IntervalMatrix.point([[norm]])
        p = choose_params(A, "ss")
        assert norm / 2**p.L <= 1
        assert p.L == max(0, math.ceil(math.log2(norm)))

    def test_enclose_dispatch(self):
        A = example1_matrix()
        assert enclose(A, "taylor", K=16).params == ExpParams(16, 0)
        assert enclose(A, "ss").params == ExpParams(17, 2)
        with pytest.raises(DomainError):
            enclose(A, "horner", K=16, L=3)

    def test_method_names(self):
        assert Method.parse("ss") is Method.SCALING_SQUARING
        with pytest.raises(ValueError):
            Method.parse("pade")


def test_result_records_width_norm():
    r = scaling_squaring_enclosure(example1_matrix(), 10, 10)
    assert r.width_norm == r.enclosure.width_norm()
    assert r.params == ExpParams(10, 10)


@pytest.mark.parametrize("a", [-10.0, -3.7, -1.0, -1e-3, 0.0, 0.5, 2.0, 7.25, 10.0])
def test_scalar_point_exponential_is_sharp(a):
    E = point_exp_enclosure([[a]])
    assert E.lower[0, 0] <= math.exp(a) <= E.upper[0, 0]
    assert (E.upper[0, 0] - E.lower[0, 0]) / math.exp(a) < 1e-12


def test_batched_point_enclosures_match_single(rng):
    stack = rng.uniform(-3, 3, (6, 3, 3))
    lo, hi = point_exp_enclosures(stack)
    for k in range(6):
        single = point_exp_enclosure(stack[k])
        np.testing.assert_array_equal(lo[k], single.lower)
        np.testing.assert_array_equal(hi[k], single.upper)


def test_large_order_does_not_overflow():
    r = horner_enclosure(IntervalMatrix.point(BOCHEV), 510)
    assert np.isfinite(r.width_norm)
    assert r.enclosure.contains_point(scipy.linalg.expm(BOCHEV))


class TestComponentwiseRemainder:
    def exact_tail(self, M, K, terms=60):
        # sum_{K<k<=K+terms} |M|^k/k! in rationals; later terms are negligible
        # next to the float spacing of the bound
        n = len(M)
        A = [[abs(Fraction(float(v))) for v in row] for row in M]
        P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        tail = [[Fraction(0)] * n for _ in range(n)]
        for k in range(1, K + terms + 1):
            P = [[sum(P[i][l] * A[l][j] for l in range(n)) / k for j in range(n)] for i in range(n)]
            if k > K:
                tail = [[tail[i][j] + P[i][j] for j in range(n)] for i in range(n)]
        return tail

    def test_bounds_exact_tail(self, rng):
        from intervalexpm.expm import componentwise_remainder
        for _ in range(5):
            M = rng.uniform(-1, 1, (3, 3))
            M /= np.abs(M).sum(axis=1).max()
            R = componentwise_remainder(M, 8)
            T = self.exact_tail(M, 8)
            assert all(Fraction(R[i, j]) >= T[i][j] for i in range(3) for j in range(3))

    def test_never_above_rho(self, rng):
        from intervalexpm.expm import componentwise_remainder
        for _ in range(50):
            M = rng.uniform(-1, 1, (4, 4))
            norm = np.abs(M).sum(axis=1).max()
            assert componentwise_remainder(M, 17).max() <= rho(norm, 17)

    def test_structural_zeros_get_no_remainder(self):
        from intervalexpm.expm import componentwise_remainder
        R = componentwise_remainder(np.array([[0.0, 0.5], [0.0, -1.0]]), 17)
        assert R[0, 0] == 0 and R[1, 0] == 0 and R[1, 1] > 0
        E = point_exp_enclosure([[0.0, 1.0], [0.0, -2.0]])
        assert E[0, 0].lo == E[0, 0].hi == 1.0
        assert E[1, 0].lo == 0.0 and E[1, 0].hi == 0.0
