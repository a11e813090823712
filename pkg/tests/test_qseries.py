import math
from fractions import Fraction

import numpy as np
import pytest

from qcauchy.core.errors import ParameterError
from qcauchy.core.qseries import (
    QSeries,
    bilateral_partial_sum,
    euler_series,
    log_qpoch_inf,
    log_scale_exponent,
    pochhammer_lower_bound_constants,
    product_length,
    qbinomial_partial_sum,
    qpoch_inf,
    qpoch_n,
    qpoch_ratio,
    ramanujan_bilateral_sum,
    ramanujan_psi_sum,
    ramanujan_theta_ratio,
    theta,
)


def direct_product(a, q, terms=400):
    return np.prod([1 - a * q ** j for j in range(terms)])


class TestQSeries:
    def test_inverse(self):
        x = QSeries([1, -1, 0, 3], 6)
        assert x * x.inverse() == QSeries.one(6)
        assert x / x == 1

    def test_zero_constant_term_not_invertible(self):
        with pytest.raises(ParameterError):
            QSeries.q_power(1, 4).inverse()

    def test_order_is_minimum_of_operands(self):
        assert (QSeries.one(3) + QSeries.one(7)).order == 3
        assert (QSeries.one(3) * QSeries.one(7)).order == 3

    def test_geometric_series(self):
        q = QSeries.q_power(1, 5)
        assert (1 - q).inverse().coeffs == (1,) * 6
        assert (1 - q) ** -2 == QSeries([1, 2, 3, 4, 5, 6], 5)

    def test_first_mismatch_and_valuation(self):
        a = QSeries([1, 2, 3], 2)
        b = QSeries([1, 2, 4], 2)
        assert a.first_mismatch(b) == 2
        assert a.first_mismatch(a) is None
        assert QSeries.q_power(3, 5).valuation() == 3
        assert QSeries.constant(0, 5).valuation() == 6

    def test_json(self):
        x = QSeries([Fraction(1, 3), 0, -2], 2)
        assert x.to_json() == {"order": 2, "coeffs": ["1/3", "0", "-2"]}
        assert QSeries.from_json(x.to_json()) == x


class TestPochhammer:
    def test_trivial_values(self):
        assert qpoch_inf(0, 0.5) == 1
        assert qpoch_inf(1.0, 0.5) == 0
        assert qpoch_n(Fraction(1, 2), Fraction(1, 3), 0) == 1

    def test_euler_series_pentagonal(self):
        q = QSeries.q_power(1, 3)
        assert qpoch_inf(q, q).coeffs == (1, -1, -1, 0)
        assert euler_series(10).coeffs == (1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0)

    def test_finite_products(self):
        a, q = Fraction(1, 2), Fraction(1, 3)
        assert qpoch_n(a, q, 2) == (1 - a) * (1 - a * q)
        assert qpoch_n(Fraction(1, 4), Fraction(1, 2), -1) == Fraction(1, 2)
        assert qpoch_ratio(Fraction(1, 4), Fraction(1, 2), -1) == 2

    def test_reciprocal_zero_convention(self):
        q = Fraction(1, 3)
        for m in range(1, 5):
            assert qpoch_n(q, q, -m) == 0
        with pytest.raises(ParameterError):
            qpoch_ratio(q, q, -2)

    def test_negative_index_is_quotient_of_infinite_products(self):
        a, q = 0.7, 0.4
        for n in range(-4, 5):
            expected = qpoch_inf(a, q) / qpoch_inf(a * q ** n, q)
            assert qpoch_ratio(a, q, n) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("a", [0.3, -2.0, 0.5 + 0.5j, 5.0])
    def test_numeric_matches_long_product(self, a):
        assert qpoch_inf(a, 0.5) == pytest.approx(direct_product(a, 0.5), rel=1e-13, abs=1e-15)

    def test_vectorized_and_log_forms(self):
        z = np.array([0.1, -0.4, 0.3 + 0.2j])
        values = qpoch_inf(z, 0.3)
        assert values.shape == (3,)
        assert np.allclose(np.exp(log_qpoch_inf(z, 0.3)), values, rtol=1e-13)
        assert isinstance(log_qpoch_inf(0.2, 0.3), complex)

    def test_product_length_bounds_the_tail(self):
        a, q, tol = 0.9, 0.5, 1e-12
        count = product_length(a, q, tol)
        assert a * q ** count / (1 - q) <= tol

    def test_rejects_q_outside_unit_disc(self):
        with pytest.raises(ParameterError):
            qpoch_inf(0.5, 1.0)
        with pytest.raises(ParameterError):
            log_qpoch_inf(0.5, -1.5)

    def test_euler_pentagonal_numeric(self):
        q = 0.3
        pentagonal = sum(
            (-1) ** k * q ** (k * (3 * k - 1) // 2) for k in range(-20, 21)
        )
        assert qpoch_inf(q, q) == pytest.approx(pentagonal, rel=1e-14)


class TestTheta:
    def test_zeros(self):
        assert theta(1.0, 0.3) == 0
        assert theta(0.3, 0.3) == pytest.approx(0, abs=1e-300)

    def test_zero_argument_rejected(self):
        with pytest.raises(ParameterError):
            theta(0.0, 0.3)

    def test_inversion_symmetry(self):
        x, q = 0.7, 0.3
        assert theta(q / x, q) == pytest.approx(theta(x, q), rel=1e-13)

    @pytest.mark.parametrize("x", [0.7, -1.3, 0.4 + 0.9j])
    def test_quasi_periodicity(self, x):
        q = 0.3
        assert theta(q * x, q) == pytest.approx(-theta(x, q) / x, rel=1e-12)

    def test_series_mode(self):
        q = QSeries.q_power(1, 6)
        half = Fraction(1, 2)
        value = theta(half, q)
        expected = qpoch_inf(half, q) * qpoch_inf(q * 2, q)
        assert value == expected

    def test_jacobi_triple_product(self):
        q, t = 0.5, 1.7
        bilateral = math.fsum(t ** l * q ** (l * l / 2) for l in range(-60, 61))
        assert bilateral == pytest.approx(qpoch_inf(q, q) * theta(-t * math.sqrt(q), q), rel=1e-13)


class TestSummationFormulas:
    @pytest.mark.parametrize("a", [0.0, 0.5, -1.0])
    @pytest.mark.parametrize("z", [0.7, -0.5, 0.3 + 0.4j])
    def test_qbinomial_theorem(self, a, z):
        q = 0.3
        partial = qbinomial_partial_sum(a, z, q, 200)
        assert partial == pytest.approx(qpoch_inf(a * z, q) / qpoch_inf(z, q), abs=1e-10)

    @pytest.mark.parametrize("z", [0.7, -0.5])
    def test_qbinomial_special_cases(self, z):
        q = 0.3
        # a = 0 gives Σ z^n/(q;q)_n = 1/(z;q)_inf
        assert qbinomial_partial_sum(0.0, z, q, 200) == pytest.approx(1 / qpoch_inf(z, q), abs=1e-10)
        euler = math.fsum((-1) ** n * q ** (n * (n - 1) / 2) * z ** n / qpoch_n(q, q, n) for n in range(60))
        assert euler == pytest.approx(qpoch_inf(z, q), abs=1e-10)

    def test_qbinomial_series_mode(self):
        order = 11
        q = QSeries.q_power(1, order)
        # z carries a q-grading so the partial sum is exact mod q^{order+1}
        a, z = Fraction(1, 2), QSeries.q_power(1, order, Fraction(1, 3))
        lhs = qbinomial_partial_sum(a, z, q, order + 1)
        assert lhs == qpoch_inf(a * z, q) / qpoch_inf(z, q)

    @pytest.mark.parametrize("t, w", [(1.0, 0.6), (2.0, 0.5), (1.3, 0.55 * np.exp(0.7j))])
    def test_ramanujan_theta_ratio_matches_bilateral_sum(self, t, w):
        q = 0.3
        closed = ramanujan_theta_ratio(w, t, q)
        assert closed == pytest.approx(ramanujan_bilateral_sum(w, t, q, 80), abs=1e-12)

    def test_ramanujan_theta_ratio_domain(self):
        with pytest.raises(ParameterError):
            ramanujan_theta_ratio(1.0, 1.0, 0.3)
        with pytest.raises(ParameterError):
            ramanujan_theta_ratio(0.2, 1.0, 0.3)
        with pytest.raises(ParameterError):
            ramanujan_theta_ratio(0.5, 0.0, 0.3)

    def test_ramanujan_psi_sum(self):
        a, b, z, q = 2.5, 0.1, 0.2, 0.3
        partial = bilateral_partial_sum(a, b, z, q, 30)
        assert ramanujan_psi_sum(a, b, z, q) == pytest.approx(partial, abs=1e-10)

    def test_ramanujan_psi_sum_domain(self):
        with pytest.raises(ParameterError):
            ramanujan_psi_sum(2.5, 0.5, 0.1, 0.3)


class TestLowerBounds:
    """|(z;q)_inf| against c1 exp(c2 ln^2|.|) on log grids; pure inequalities"""

    def test_constants(self):
        c1, c2 = pochhammer_lower_bound_constants(0.5)
        assert c1 == pytest.approx(float(qpoch_inf(0.5, 0.5)), rel=1e-15)
        assert c2 == pytest.approx(1 / (2 * math.log(2)))
        c1, c2 = pochhammer_lower_bound_constants(0.3)
        assert c1 == pytest.approx(float(qpoch_inf(0.3, 0.3)))
        assert c2 > 0

    def test_constants_need_q_in_unit_interval(self):
        with pytest.raises(ParameterError):
            pochhammer_lower_bound_constants(1.0)

    @pytest.mark.parametrize("q", [0.3, 0.5])
    def test_left_half_plane(self, q):
        c1, c2 = pochhammer_lower_bound_constants(q)
        for a in (-1.0, -2.0, -10.0, -100.0):
            for b in (0.0, 1.0, 10.0):
                z = complex(a, b)
                assert abs(qpoch_inf(z, q)) >= c1 * math.exp(c2 * math.log(abs(a)) ** 2)

    @pytest.mark.parametrize("q", [0.3, 0.5])
    def test_away_from_real_axis(self, q):
        c1, c2 = pochhammer_lower_bound_constants(q)
        for a in (-0.5, 0.0, 0.5, 0.9):
            for b in (1.5, -2.0, 10.0, 100.0):
                z = complex(a, b)
                assert abs(qpoch_inf(z, q)) >= c1 * math.exp(c2 * math.log(abs(b)) ** 2)

    @pytest.mark.parametrize("q", [0.3, 0.5])
    def test_right_half_plane(self, q):
        c1, c2 = pochhammer_lower_bound_constants(q)
        c1, c2 = c1 * q ** 4 * float(qpoch_inf(q, q)), c2 / 2
        for a in (1.5, 2.5, 7.0, 40.0, 333.0):
            _, alpha = log_scale_exponent(a, q)
            gap = (q ** (alpha - 1) - 1) * (1 - q ** alpha)
            for b in (0.0, 0.5, 3.0):
                z = complex(a, b)
                bound = c1 * max(b * b, gap) * math.exp(c2 * math.log(a) ** 2)
                assert abs(qpoch_inf(z, q)) >= bound

    def test_log_scale_exponent(self):
        q = 0.5
        j, alpha = log_scale_exponent(3.0, q)
        assert 0 <= alpha < 1
        assert q ** (alpha - j) == pytest.approx(3.0)
        with pytest.raises(ParameterError):
            log_scale_exponent(0.5, q)
