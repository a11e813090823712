import math

import pytest

from qcauchy.config import get_settings
from qcauchy.core import measures
from qcauchy.core.errors import ParameterError
from qcauchy.core.measures import (
    MeasureTables,
    chi_cdf,
    chi_plus_shift_cdf,
    chi_plus_shift_convolution,
    chi_pmf,
    compare_distributions,
    fermi_integrand,
    ps_weight,
    qw_weight,
    schur_weight,
    shift_pmf,
    shift_support,
    theorem1_sides,
    verify_theorem1,
    z_ps,
    z_qw,
)
from qcauchy.core.qseries import QSeries, qpoch_inf, qpoch_n
from qcauchy.models.params import ParamSet, TruncationPolicy, VarSpec
from qcauchy.models.partition import Partition


def one_by_one(q=0.3, t=1.0, a=0.4, b=0.5):
    return ParamSet(a=VarSpec.model_validate([a]), b=VarSpec.model_validate([b]), q=q, t=t)


class TestNormalizations:
    def test_single_pair(self):
        p = one_by_one()
        assert z_qw(p) == pytest.approx(1 / qpoch_inf(0.2, 0.3))
        assert z_ps(p) == pytest.approx(z_qw(p) / qpoch_inf(0.3, 0.3))

    def test_one_row_qwhittaker_weights(self):
        p = one_by_one()
        for n in range(5):
            expected = 0.2 ** n / qpoch_n(0.3, 0.3, n) * qpoch_inf(0.2, 0.3)
            assert qw_weight(Partition.of(n), p) == pytest.approx(expected, rel=1e-12)

    def test_empty_periodic_schur_weight(self, measure_params):
        assert ps_weight(Partition(), measure_params) == pytest.approx(1 / z_ps(measure_params), rel=1e-14)

    def test_schur_measure_is_geometric_for_one_pair(self):
        p = one_by_one()
        for n in range(5):
            assert schur_weight(Partition.of(n), p) == pytest.approx(0.2 ** n * 0.8, rel=1e-12)
        assert schur_weight(Partition.of(1, 1), p) == 0

    def test_tables_are_probability_distributions(self, measure_params, trunc):
        tables = MeasureTables(measure_params, trunc)
        assert tables.qw_mass == pytest.approx(1.0, abs=1e-12)
        assert tables.ps_mass == pytest.approx(1.0, abs=1e-7)
        assert all(w >= 0 for _, w in tables.qw)
        assert all(w >= 0 for _, w in tables.ps)


class TestAuxiliaryLaws:
    @pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
    def test_chi_pmf_sums_to_cdf(self, q):
        running = 0.0
        for m in range(30):
            running += chi_pmf(m, q)
            assert chi_cdf(m, q) == pytest.approx(running, rel=1e-12)
        assert chi_pmf(-1, q) == 0 and chi_cdf(-1, q) == 0

    def test_chi_rejects_bad_q(self):
        with pytest.raises(ParameterError):
            chi_pmf(0, 1.0)
        with pytest.raises(ParameterError):
            chi_cdf(0, 0.0)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_shift_law_is_normalized(self, t):
        p = one_by_one(q=0.5, t=t)
        support = shift_support(p)
        assert math.fsum(shift_pmf(l, p) for l in support) == pytest.approx(1.0, abs=1e-14)

    def test_shift_law_symmetric_at_t_one(self):
        p = one_by_one(q=0.4, t=1.0)
        for l in range(1, 6):
            assert shift_pmf(l, p) == pytest.approx(shift_pmf(-l, p), rel=1e-14)

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_chi_plus_shift_closed_form(self, q, t):
        p = one_by_one(q=q, t=t)
        for n in range(-5, 6):
            assert chi_plus_shift_cdf(n, p) == pytest.approx(chi_plus_shift_convolution(n, p), abs=1e-10)

    def test_fermi_integrand(self):
        assert fermi_integrand(0, -0.2 + 0j, 0.3) == pytest.approx(1 / qpoch_inf(-0.2, 0.3))
        assert fermi_integrand(2, -0.2 + 0j, 0.5) == pytest.approx(1 / qpoch_inf(-0.8, 0.5))


class TestRestrictedCauchyIdentity:
    def test_threshold_zero_is_trivial(self, exact_a, exact_b):
        lhs, rhs = theorem1_sides(0, exact_a.values, exact_b.values, 4)
        assert lhs == rhs == QSeries.one(4)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_square(self, n, exact_a, exact_b):
        report = verify_theorem1(n, exact_a, exact_b, 5)
        assert report.equal, report.first_mismatch
        assert report.name == "restricted_cauchy"
        assert report.n == n
        assert report.a == ["1/3", "1/5"]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_single_variable(self, n):
        report = verify_theorem1(n, VarSpec.model_validate("1/2"), VarSpec.model_validate("1/3"), 6)
        assert report.equal, report.first_mismatch

    @pytest.mark.parametrize("n", [1, 2])
    def test_rectangular(self, n, exact_a):
        report = verify_theorem1(n, exact_a, VarSpec.model_validate("2/5"), 5)
        assert report.equal, report.first_mismatch

    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_order_zero_is_the_schur_case(self, n, exact_a, exact_b):
        report = verify_theorem1(n, exact_a, exact_b, 0)
        assert report.equal
        assert report.lhs_coeffs == report.rhs_coeffs

    @pytest.mark.slow
    @pytest.mark.parametrize("a, b", [("1/3", "1/4"), ("1/3,1/5", "1/4,1/7"), ("1/3,1/5", "2/7")])
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_order_eight(self, a, b, n):
        report = verify_theorem1(n, VarSpec.model_validate(a), VarSpec.model_validate(b), 8)
        assert report.equal, report.first_mismatch

    def test_needs_exact_values(self, exact_b):
        with pytest.raises(ParameterError):
            verify_theorem1(1, VarSpec.model_validate([0.3, 0.2]), exact_b, 3)

    def test_negative_threshold(self, exact_a, exact_b):
        with pytest.raises(ParameterError):
            theorem1_sides(-1, exact_a.values, exact_b.values, 3)

    def test_report_has_no_residuals(self, exact_a, exact_b):
        dumped = verify_theorem1(1, exact_a, exact_b, 3).model_dump()
        assert dumped["residuals"] == {}
        assert len(dumped["lhs_coeffs"]) == 4


class TestEqualInLaw:
    def test_measure_params_table(self, measure_params, trunc):
        report = compare_distributions(measure_params, trunc, range(0, 4), tol=1e-6)
        assert report.passed, report.max_gap
        assert [row.n for row in report.rows] == [0, 1, 2, 3]
        assert report.cutoff == 14
        for row in report.rows:
            assert row.mu1_chi == pytest.approx(row.lambda1, abs=1e-6)
            assert row.qlaplace == pytest.approx(row.lambda1_shift, abs=1e-6)
            assert row.mu1_chi_shift == pytest.approx(row.qlaplace, abs=1e-12)

    def test_kernel_params_table(self, kernel_params, trunc):
        report = compare_distributions(kernel_params, trunc, range(-1, 3), tol=1e-6)
        assert report.passed, report.max_gap
        assert report.hypotheses["square"]
        assert report.model_dump(by_alias=True)["pass"] is True

    def test_cdfs_increase_to_one(self, measure_params, trunc):
        tables = MeasureTables(measure_params, trunc)
        values = [tables.first_row_cdf_ps(n).value for n in range(-1, 12)]
        assert values[0] == 0
        assert all(x <= y + 1e-15 for x, y in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0, abs=1e-6)

    def test_qlaplace_defaults_to_fermi_zeta(self, measure_params, trunc):
        tables = MeasureTables(measure_params.with_k(2), trunc)
        direct = tables.qlaplace(complex(-measure_params.q ** 2.5))
        assert tables.qlaplace().value == pytest.approx(direct.value, rel=1e-14)

    def test_short_cutoff_is_flagged(self, measure_params):
        estimate = measures.first_row_cdf_ps(2, measure_params, TruncationPolicy(weight_cutoff=1))
        assert estimate.flagged
        assert estimate.residual > 1e-8

    def test_threads_do_not_change_results(self, measure_params, trunc, monkeypatch):
        serial = measures.mu1_chi_cdf(2, measure_params, trunc).value
        monkeypatch.setenv("QCAUCHY_THREADS", "4")
        get_settings.cache_clear()
        assert get_settings().threads == 4
        assert measures.mu1_chi_cdf(2, measure_params, trunc).value == serial

    def test_cutoff_doubling_stays_within_residual(self, measure_params):
        checks = measures.cutoff_self_check(measure_params, TruncationPolicy(weight_cutoff=6), range(0, 5))
        assert set(checks) == {"mu1", "lambda1", "mu1_chi", "qlaplace"}
        assert checks["mu1_chi"][0] > 0
        for name, (drift, residual) in checks.items():
            assert drift <= residual + 1e-14, name
