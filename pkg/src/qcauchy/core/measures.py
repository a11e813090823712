"""
The q-Whittaker, periodic Schur and shift-mixed measures, the auxiliary
variables χ and S, and brute-force evaluation of the quantities related by
the restricted Cauchy identities.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from ..config import get_settings
from ..models.params import ParamSet, TruncationPolicy, VarSpec
from ..models.partition import Partition
from ..models.reports import DistributionReport, DistributionRow, Estimate, Theorem1Report
from .errors import ParameterError
from .partitions import (
    enumerate_by_weight,
    enumerate_partitions,
    partitions_of,
    restricted_weight_series,
    subpartitions,
    superpartitions,
)
from .qseries import QSeries, qpoch_inf, qpoch_n, theta
from .symfunc import EMPTY, SymmetricEvaluator, qwhittaker_P, qwhittaker_Q


logger = logging.getLogger(__name__)


def _parallel_map(fn: Callable, items: Sequence) -> List:
    """Order-preserving map over at most QCAUCHY_THREADS workers"""
    threads = get_settings().threads
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))


def z_qw(p: ParamSet) -> float:
    """Z_qW = Π_{i,j} 1/(a_i b_j;q)_inf"""
    product = 1.0
    for ai in p.a_float:
        for bj in p.b_float:
            product *= qpoch_inf(ai * bj, p.q)
    return 1.0 / product


def z_ps(p: ParamSet) -> float:
    """Z_pS = Z_qW / (q;q)_inf"""
    return z_qw(p) / qpoch_inf(p.q, p.q)


def qw_weight(mu: Partition, p: ParamSet) -> float:
    """P_μ(a;q) Q_μ(b;q) / Z_qW"""
    value = qwhittaker_P(mu, p.a_float, p.q) * qwhittaker_Q(mu, p.b_float, p.q)
    return float(value) / z_qw(p)


def _ps_numerator(lam: Partition, p: ParamSet, a_eval: SymmetricEvaluator, b_eval: SymmetricEvaluator) -> float:
    columns = min(p.n_a, p.n_b)
    terms = [
        p.q ** rho.weight * a_eval.skew_schur(lam, rho) * b_eval.skew_schur(lam, rho)
        for rho in subpartitions(lam, max_column=columns)
    ]
    return math.fsum(terms)


def ps_weight(lam: Partition, p: ParamSet) -> float:
    """Σ_{ρ⊂λ} q^{|ρ|} s_{λ/ρ}(a) s_{λ/ρ}(b) / Z_pS"""
    a_eval, b_eval = SymmetricEvaluator(p.a_float), SymmetricEvaluator(p.b_float)
    return _ps_numerator(lam, p, a_eval, b_eval) / z_ps(p)


def schur_weight(lam: Partition, p: ParamSet) -> float:
    """Schur measure s_λ(a) s_λ(b) Π(1 - a_i b_j), the q = 0 case of ps_weight"""
    product = 1.0
    for ai in p.a_float:
        for bj in p.b_float:
            product *= 1 - ai * bj
    a_eval, b_eval = SymmetricEvaluator(p.a_float), SymmetricEvaluator(p.b_float)
    return a_eval.skew_schur(lam, EMPTY) * b_eval.skew_schur(lam, EMPTY) * product


def chi_pmf(n: int, q: float) -> float:
    """P(χ = n) = q^n (q;q)_inf / (q;q)_n"""
    if not 0 < q < 1:
        raise ParameterError(f"need 0 < q < 1, got {q}")
    if n < 0:
        return 0.0
    return q ** n * qpoch_inf(q, q) / qpoch_n(q, q, n)


def chi_cdf(m: int, q: float) -> float:
    """P(χ <= m) = (q;q)_inf / (q;q)_m, and 0 for m < 0"""
    if not 0 < q < 1:
        raise ParameterError(f"need 0 < q < 1, got {q}")
    if m < 0:
        return 0.0
    return qpoch_inf(q, q) / qpoch_n(q, q, m)


def shift_pmf(l: int, p: ParamSet) -> float:
    """P(S = l) = t^l q^{l^2/2} / [(q;q)_inf θ(-t q^{1/2})]"""
    normalization = qpoch_inf(p.q, p.q) * theta(-p.t * math.sqrt(p.q), p.q)
    return p.t ** l * p.q ** (l * l / 2) / normalization


def shift_support(p: ParamSet, tol: float = 1e-16, limit: int = 400) -> range:
    """Smallest symmetric range of l outside which P(S = l) sums below tol"""
    # P(S=l) decays like q^{l^2/2}; past the mode the tails are dominated by a geometric series
    mode = round(-math.log(p.t) / math.log(p.q))
    radius = 1
    while radius < limit:
        outer = shift_pmf(mode + radius, p) + shift_pmf(mode - radius, p)
        if outer < tol * (1 - math.sqrt(p.q)):
            break
        radius += 1
    else:
        logger.warning(f"Shift support hit the limit {limit}")
    return range(mode - radius, mode + radius + 1)


def chi_plus_shift_cdf(n: int, p: ParamSet) -> float:
    """P(χ + S <= n) = 1 / (-t q^{1/2+n}; q)_inf"""
    return 1.0 / qpoch_inf(-p.t * p.q ** (0.5 + n), p.q)


def chi_plus_shift_convolution(n: int, p: ParamSet, tol: float = 1e-16) -> float:
    """Σ_l P(S = l) P(χ <= n - l)"""
    return math.fsum(shift_pmf(l, p) * chi_cdf(n - l, p.q) for l in shift_support(p, tol))


def fermi_integrand(mu1: int, zeta: complex, q: float) -> complex:
    """1 / (ζ q^{-μ1}; q)_inf"""
    return 1 / qpoch_inf(zeta * q ** (-mu1), q)


class MeasureTables:
    """Weight tables of the q-Whittaker and periodic Schur measures up to a weight cutoff

    Args:
        p: the specialization; measure invariants are checked by ParamSet
        trunc: weight cutoff and flagging tolerance
    """

    def __init__(self, p: ParamSet, trunc: Optional[TruncationPolicy] = None):
        self.p = p
        self.trunc = trunc or TruncationPolicy()
        self._qw: Optional[List[Tuple[Partition, float]]] = None
        self._ps: Optional[List[Tuple[Partition, float]]] = None

    @property
    def qw(self) -> List[Tuple[Partition, float]]:
        if self._qw is None:
            p = self.p
            support = enumerate_by_weight(self.trunc.weight_cutoff, max_length=min(p.n_a, p.n_b))
            z = z_qw(p)

            def weight(mu: Partition) -> float:
                return float(qwhittaker_P(mu, p.a_float, p.q) * qwhittaker_Q(mu, p.b_float, p.q)) / z

            self._qw = list(zip(support, _parallel_map(weight, support)))
            logger.info(f"q-Whittaker table: {len(support)} partitions, mass {self.qw_mass:.15f}")
        return self._qw

    @property
    def ps(self) -> List[Tuple[Partition, float]]:
        if self._ps is None:
            p = self.p
            support = enumerate_by_weight(self.trunc.weight_cutoff)
            a_eval, b_eval = SymmetricEvaluator(p.a_float), SymmetricEvaluator(p.b_float)
            z = z_ps(p)

            def weight(lam: Partition) -> float:
                return _ps_numerator(lam, p, a_eval, b_eval) / z

            self._ps = list(zip(support, _parallel_map(weight, support)))
            logger.info(f"Periodic Schur table: {len(support)} partitions, mass {self.ps_mass:.15f}")
        return self._ps

    @property
    def qw_mass(self) -> float:
        return math.fsum(w for _, w in self.qw)

    @property
    def ps_mass(self) -> float:
        return math.fsum(w for _, w in self.ps)

    def _estimate(self, terms: Iterable[float], residual: float, count: int, label: str) -> Estimate:
        value = math.fsum(terms)
        residual = max(residual, 0.0)
        flagged = residual > self.trunc.float_tail_tol
        if flagged:
            logger.warning(f"{label}: truncation residual {residual:.3e} exceeds {self.trunc.float_tail_tol:.1e}")
        return Estimate(value=value, residual=residual, terms=count, flagged=flagged)

    def first_row_cdf_qw(self, n: int) -> Estimate:
        """P(μ1 <= n)"""
        terms = [w for mu, w in self.qw if mu.first_row <= n]
        return self._estimate(terms, 1.0 - self.qw_mass, len(terms), f"P(mu1 <= {n})")

    def first_row_cdf_ps(self, n: int) -> Estimate:
        """P(λ1 <= n)"""
        terms = [w for lam, w in self.ps if lam.first_row <= n]
        return self._estimate(terms, 1.0 - self.ps_mass, len(terms), f"P(lambda1 <= {n})")

    def mu1_chi_cdf(self, n: int) -> Estimate:
        """P(μ1 + χ <= n)"""
        terms = [w * chi_cdf(n - mu.first_row, self.p.q) for mu, w in self.qw]
        return self._estimate(terms, 1.0 - self.qw_mass, len(terms), f"P(mu1 + chi <= {n})")

    def qlaplace(self, zeta: Optional[complex] = None) -> Estimate:
        """E[1/(ζ q^{-μ1}; q)_inf] under the q-Whittaker measure"""
        p = self.p
        zeta = p.fermi_zeta if zeta is None else zeta
        values = [(w, fermi_integrand(mu.first_row, zeta, p.q)) for mu, w in self.qw]
        if zeta.imag == 0 and zeta.real <= 0:
            # every factor 1 - ζ q^{j-μ1} is >= 1
            sup = 1.0
        else:
            sup = max((abs(v) for _, v in values), default=1.0)
        imag = math.fsum(w * v.imag for w, v in values)
        if abs(imag) > self.trunc.float_tail_tol:
            logger.warning(f"q-Laplace transform has imaginary part {imag:.3e}")
        terms = [w * v.real for w, v in values]
        return self._estimate(terms, (1.0 - self.qw_mass) * sup, len(terms), f"q-Laplace at zeta={zeta}")

    def lambda1_shift_cdf(self, k: int) -> Estimate:
        """P(λ1 + S <= k)"""
        p = self.p
        first_rows: Dict[int, float] = {}
        for lam, w in self.ps:
            first_rows[lam.first_row] = first_rows.get(lam.first_row, 0.0) + w
        support = shift_support(p, self.trunc.float_tail_tol * 1e-4)
        terms = []
        for l in support:
            mass = math.fsum(w for m, w in first_rows.items() if m <= k - l)
            terms.append(shift_pmf(l, p) * mass)
        shift_tail = max(0.0, 1.0 - math.fsum(shift_pmf(l, p) for l in support))
        residual = (1.0 - self.ps_mass) + shift_tail
        return self._estimate(terms, residual, len(self.ps) * len(support), f"P(lambda1 + S <= {k})")

    def mu1_chi_shift_cdf(self, n: int) -> Estimate:
        """P(μ1 + χ + S <= n), through the closed form of P(χ + S <= m)"""
        terms = [w * chi_plus_shift_cdf(n - mu.first_row, self.p) for mu, w in self.qw]
        return self._estimate(terms, 1.0 - self.qw_mass, len(terms), f"P(mu1 + chi + S <= {n})")


def first_row_cdf_qw(n: int, p: ParamSet, trunc: Optional[TruncationPolicy] = None) -> Estimate:
    return MeasureTables(p, trunc).first_row_cdf_qw(n)


def first_row_cdf_ps(n: int, p: ParamSet, trunc: Optional[TruncationPolicy] = None) -> Estimate:
    return MeasureTables(p, trunc).first_row_cdf_ps(n)


def mu1_chi_cdf(n: int, p: ParamSet, trunc: Optional[TruncationPolicy] = None) -> Estimate:
    return MeasureTables(p, trunc).mu1_chi_cdf(n)


def qlaplace_lhs(p: ParamSet, trunc: Optional[TruncationPolicy] = None) -> Estimate:
    """Brute-force E[1/(ζ q^{-μ1}; q)_inf] with ζ = p.fermi_zeta"""
    return MeasureTables(p, trunc).qlaplace()


def lambda1_shift_cdf(k: int, p: ParamSet, trunc: Optional[TruncationPolicy] = None) -> Estimate:
    """Brute-force P(λ1 + S <= k) under the shift-mixed periodic Schur measure"""
    return MeasureTables(p, trunc).lambda1_shift_cdf(k)


def cutoff_self_check(
    p: ParamSet,
    trunc: Optional[TruncationPolicy] = None,
    n_range: Iterable[int] = range(0, 4),
) -> Dict[str, Tuple[float, float]]:
    """Per quantity, (largest change when the weight cutoff doubles, largest residual at the shorter cutoff)

    Every tabulated quantity has a nonnegative integrand bounded by its sup, so
    each change should stay below the matching residual.
    """
    trunc = trunc or TruncationPolicy()
    short, long = MeasureTables(p, trunc), MeasureTables(p, trunc.doubled())
    checks: Dict[str, Tuple[float, float]] = {}

    def record(name: str, before: Estimate, after: Estimate) -> None:
        drift, residual = checks.get(name, (0.0, 0.0))
        checks[name] = (max(drift, abs(after.value - before.value)), max(residual, before.residual))

    for n in n_range:
        record("mu1", short.first_row_cdf_qw(n), long.first_row_cdf_qw(n))
        record("lambda1", short.first_row_cdf_ps(n), long.first_row_cdf_ps(n))
        record("mu1_chi", short.mu1_chi_cdf(n), long.mu1_chi_cdf(n))
        zeta = complex(-p.t * p.q ** (0.5 + n))
        record("qlaplace", short.qlaplace(zeta), long.qlaplace(zeta))
    for name, (drift, residual) in checks.items():
        if drift > residual:
            logger.warning(f"{name}: cutoff doubling moved the value by {drift:.3e}, above the residual {residual:.3e}")
    return checks


def _exact_vars(spec: VarSpec, name: str) -> Tuple[Fraction, ...]:
    if not spec.is_exact:
        raise ParameterError(f"{name} must be rational (p/q strings) for exact verification")
    return tuple(Fraction(v) for v in spec.values)


def theorem1_sides(n: int, a: Sequence[Fraction], b: Sequence[Fraction], order: int) -> Tuple[QSeries, QSeries]:
    """Both sides of the restricted Cauchy identity at threshold n, mod q^{order+1}

    LHS = Σ_{μ1<=n} P_μ(a) Q_μ(b) / (q;q)_{n-μ1}, with 1/(q;q)_{n-μ1} counted as
    the generating function of partitions with first row <= n - μ1.
    RHS = Σ_{λ1<=n} Σ_{ρ⊂λ} q^{|ρ|} s_{λ/ρ}(a) s_{λ/ρ}(b); the coefficient of
    q^m only involves |ρ| = m and ℓ(λ) <= ℓ(ρ) + min(N, M).
    """
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    columns = min(len(a), len(b))
    q = QSeries.q_power(1, order)

    def lhs_term(mu: Partition) -> QSeries:
        weight = qwhittaker_P(mu, a, q) * qwhittaker_Q(mu, b, q)
        return restricted_weight_series(n - mu.first_row, order) * weight

    lhs = QSeries.constant(0, order)
    for term in _parallel_map(lhs_term, enumerate_partitions(n, columns)):
        lhs = lhs + term

    a_eval, b_eval = SymmetricEvaluator(a), SymmetricEvaluator(b)

    def rhs_coefficient(m: int) -> Fraction:
        total = Fraction(0)
        for rho in partitions_of(m, max_part=n):
            for lam in superpartitions(rho, n, columns):
                total += a_eval.skew_schur(lam, rho) * b_eval.skew_schur(lam, rho)
        return total

    rhs = QSeries(_parallel_map(rhs_coefficient, list(range(order + 1))), order)
    return lhs, rhs


def verify_theorem1(n: int, a: VarSpec, b: VarSpec, order: int) -> Theorem1Report:
    """Exact coefficientwise check of the restricted Cauchy identity at threshold n"""
    a_vals, b_vals = _exact_vars(a, "a"), _exact_vars(b, "b")
    lhs, rhs = theorem1_sides(n, a_vals, b_vals, order)
    report = Theorem1Report.compare(
        "restricted_cauchy",
        lhs,
        rhs,
        n=n,
        a=[str(v) for v in a_vals],
        b=[str(v) for v in b_vals],
    )
    if report.equal:
        logger.info(f"Restricted Cauchy identity holds at n={n} mod q^{order + 1}")
    else:
        logger.warning(f"Restricted Cauchy identity fails at n={n}, coefficient {report.first_mismatch}")
    return report


def compare_distributions(
    p: ParamSet,
    trunc: Optional[TruncationPolicy] = None,
    n_range: Iterable[int] = range(0, 4),
    tol: float = 1e-6,
) -> DistributionReport:
    """Tabulate the four equal-in-law quantities of the restricted Cauchy identity for each n"""
    tables = MeasureTables(p, trunc)
    rows = []
    for n in n_range:
        mu1_chi = tables.mu1_chi_cdf(n)
        lambda1 = tables.first_row_cdf_ps(n)
        qlaplace = tables.qlaplace(complex(-p.t * p.q ** (0.5 + n)))
        lambda1_shift = tables.lambda1_shift_cdf(n)
        mu1_chi_shift = tables.mu1_chi_shift_cdf(n)
        gap = max(
            abs(mu1_chi.value - lambda1.value),
            abs(qlaplace.value - lambda1_shift.value),
            abs(mu1_chi_shift.value - lambda1_shift.value),
        )
        residual = max(e.residual for e in (mu1_chi, lambda1, qlaplace, lambda1_shift, mu1_chi_shift))
        rows.append(
            DistributionRow(
                n=n,
                mu1_chi=mu1_chi.value,
                lambda1=lambda1.value,
                qlaplace=qlaplace.value,
                lambda1_shift=lambda1_shift.value,
                mu1_chi_shift=mu1_chi_shift.value,
                gap=gap,
                residual=residual,
            )
        )
    worst = max(rows, key=lambda row: row.gap, default=None)
    max_gap = worst.gap if worst else 0.0
    passed = max_gap < tol
    if not passed:
        logger.warning(f"Distribution gap {max_gap:.3e} at n={worst.n} exceeds {tol:.1e}")
    return DistributionReport(
        params=p,
        hypotheses=p.hypotheses(),
        cutoff=tables.trunc.weight_cutoff,
        tol=tol,
        rows=rows,
        max_gap=max_gap,
        worst_n=worst.n if worst else None,
        passed=passed,
    )
