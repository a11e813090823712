"""
Skew Schur and q-Whittaker polynomials evaluated at concrete specializations.

Variables may be exact (int / Fraction), floating (float / complex) or
`QSeries` (for the homogeneity trick a -> a*q that turns the Cauchy
identities into q-series identities).  Evaluation is always pointwise;
nothing here builds symbolic polynomials.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..models.params import VarSpec
from ..models.partition import Partition
from ..models.reports import SeriesComparison
from .errors import ParameterError
from .partitions import enumerate_by_weight, interlacing_partitions, subpartitions
from .qseries import QSeries, qpoch_inf, qpoch_n


logger = logging.getLogger(__name__)

EMPTY = Partition.trusted(())

CAUCHY_IDENTITIES = ("schur", "skew", "qwhittaker", "restricted")


def _values(vars: Any) -> Tuple[Any, ...]:
    if isinstance(vars, VarSpec):
        return vars.values
    return tuple(vars)


def _is_floating(values: Sequence[Any]) -> bool:
    return any(isinstance(v, (float, complex, np.floating, np.complexfloating)) for v in values)


def _ring_det(matrix: List[List[Any]]) -> Any:
    """Determinant over any commutative ring, by dynamic programming on column subsets"""
    n = len(matrix)
    if n == 0:
        return 1
    partial: Dict[int, Any] = {0: 1}
    for i in range(n):
        nxt: Dict[int, Any] = {}
        for mask, value in partial.items():
            for j in range(n):
                if mask >> j & 1:
                    continue
                entry = matrix[i][j]
                if isinstance(entry, int) and entry == 0:
                    continue
                sign = -1 if bin(mask >> (j + 1)).count("1") % 2 else 1
                term = value * entry if sign > 0 else -(value * entry)
                key = mask | 1 << j
                nxt[key] = nxt[key] + term if key in nxt else term
        partial = nxt
    return partial.get((1 << n) - 1, 0)


class SymmetricEvaluator:
    """Caches h_k and e_k of one specialization for repeated Jacobi–Trudi evaluation"""

    def __init__(self, vars: Any):
        self.values = _values(vars)
        self.floating = _is_floating(self.values)
        self._h: List[Any] = [1]
        self._e: List[Any] = [1]

    def _extend(self, table: List[Any], k: int, elementary: bool) -> None:
        if k < len(table):
            return
        coeffs: List[Any] = [1] + [0] * k
        for x in self.values:
            if elementary:
                for j in range(k, 0, -1):
                    coeffs[j] = coeffs[j] + x * coeffs[j - 1]
            else:
                for j in range(1, k + 1):
                    coeffs[j] = coeffs[j] + x * coeffs[j - 1]
        table[:] = coeffs

    def h(self, k: int) -> Any:
        if k < 0:
            return 0
        self._extend(self._h, k, elementary=False)
        return self._h[k]

    def e(self, k: int) -> Any:
        if k < 0 or k > len(self.values):
            return 0
        self._extend(self._e, k, elementary=True)
        return self._e[k]

    def _det(self, matrix: List[List[Any]]) -> Any:
        if self.floating:
            return np.linalg.det(np.array(matrix, dtype=complex))
        return _ring_det(matrix)

    def skew_schur(self, lam: Partition, rho: Partition) -> Any:
        if not lam.contains(rho):
            return 0
        if lam == rho:
            return 1
        lam_c, rho_c = lam.conjugate(), rho.conjugate()
        if any(lam_c[j] - rho_c[j] > len(self.values) for j in range(lam_c.length)):
            return 0
        if lam.first_row < lam.length:
            n = lam_c.length
            matrix = [[self.e(lam_c[i] - rho_c[j] - i + j) for j in range(n)] for i in range(n)]
        else:
            n = lam.length
            matrix = [[self.h(lam[i] - rho[j] - i + j) for j in range(n)] for i in range(n)]
        value = self._det(matrix)
        if self.floating and not any(isinstance(v, complex) for v in self.values):
            return float(np.real(value))
        return value


def complete_homogeneous(k: int, vars: Any) -> Any:
    """h_k(vars); 0 for k < 0 and 1 for k = 0"""
    return SymmetricEvaluator(vars).h(k)


def elementary(k: int, vars: Any) -> Any:
    """e_k(vars); 0 outside 0 <= k <= len(vars)"""
    return SymmetricEvaluator(vars).e(k)


def skew_schur(lam: Partition, rho: Partition, vars: Any) -> Any:
    """s_{λ/ρ}(vars) by Jacobi–Trudi, or its dual form when λ1 < ℓ(λ)

    Returns 0 when ρ ⊄ λ or when a column of λ/ρ is taller than the number
    of variables.
    """
    return SymmetricEvaluator(vars).skew_schur(lam, rho)


def schur(lam: Partition, vars: Any) -> Any:
    return skew_schur(lam, EMPTY, vars)


def skew_schur_tableaux(lam: Partition, rho: Partition, vars: Any) -> Any:
    """s_{λ/ρ}(vars) summed over semistandard skew tableaux as horizontal-strip chains"""
    values = _values(vars)
    memo: Dict[Tuple[Tuple[int, ...], int], Any] = {}

    def chain(mu: Partition, n: int) -> Any:
        key = (mu.parts, n)
        if key in memo:
            return memo[key]
        if n == 0:
            result = 1 if mu == rho else 0
        else:
            result = 0
            x = values[n - 1]
            for kappa in interlacing_partitions(mu):
                if kappa.contains(rho):
                    inner = chain(kappa, n - 1)
                    if not (isinstance(inner, int) and inner == 0):
                        result = result + inner * x ** (mu.weight - kappa.weight)
        memo[key] = result
        return result

    if not lam.contains(rho):
        return 0
    return chain(lam, len(values))


def _qpoch_q(q: Any, n: int) -> Any:
    return qpoch_n(q, q, n)


def branching_coefficient(mu: Partition, kappa: Partition, q: Any) -> Any:
    """ψ_{μ/κ} = Π_i (q;q)_{μi-μi+1} / [(q;q)_{μi-κi} (q;q)_{κi-μi+1}] for κ ≺ μ"""
    numerator: Any = 1
    denominator: Any = 1
    for i in range(mu.length):
        numerator = numerator * _qpoch_q(q, mu[i] - mu[i + 1])
        denominator = denominator * _qpoch_q(q, mu[i] - kappa[i]) * _qpoch_q(q, kappa[i] - mu[i + 1])
    if isinstance(denominator, int) and denominator == 1:
        return numerator
    return numerator / denominator


def qwhittaker_P(mu: Partition, vars: Any, q: Any) -> Any:
    """P_μ(vars; q) by the t = 0 branching rule over interlacing chains"""
    values = _values(vars)
    if mu.length > len(values):
        return 0
    memo: Dict[Tuple[Tuple[int, ...], int], Any] = {}
    psi: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Any] = {}

    def evaluate(nu: Partition, n: int) -> Any:
        key = (nu.parts, n)
        if key in memo:
            return memo[key]
        if n == 0:
            result = 1 if nu.length == 0 else 0
        elif nu.length > n:
            result = 0
        else:
            result = 0
            x = values[n - 1]
            for kappa in interlacing_partitions(nu, max_length=n - 1):
                pair = (nu.parts, kappa.parts)
                if pair not in psi:
                    psi[pair] = branching_coefficient(nu, kappa, q)
                result = result + psi[pair] * evaluate(kappa, n - 1) * x ** (nu.weight - kappa.weight)
        memo[key] = result
        return result

    return evaluate(mu, len(values))


def dual_factor(mu: Partition, m: int, q: Any) -> Any:
    """Π_{j=1}^{m} 1/(q;q)_{μj-μj+1}"""
    denominator: Any = 1
    for j in range(m):
        denominator = denominator * _qpoch_q(q, mu[j] - mu[j + 1])
    return 1 / denominator if not isinstance(denominator, int) else Fraction(1, denominator)


def qwhittaker_Q(mu: Partition, vars: Any, q: Any) -> Any:
    """Q_μ(vars; q) = Π_{j=1}^{M} (q;q)^{-1}_{μj-μj+1} P_μ(vars; q)"""
    values = _values(vars)
    if mu.length > len(values):
        return 0
    return dual_factor(mu, len(values), q) * qwhittaker_P(mu, values, q)


def _cauchy_product_series(a: Sequence[Any], b: Sequence[Any], order: int, shift: int) -> QSeries:
    """Π_{i,j} 1/(a_i b_j q^shift; q)_inf"""
    q = QSeries.q_power(1, order)
    result = QSeries.one(order)
    for ai in a:
        for bj in b:
            result = result * qpoch_inf(QSeries.q_power(shift, order, Fraction(ai) * Fraction(bj)), q)
    return result.inverse()


def cauchy_series_check(identity: str, a: Any, b: Any, order: int) -> SeriesComparison:
    """Check one Cauchy identity exactly mod q^{order+1} after a -> a*q

    identity is one of
      "schur"       Σ s_λ(a)s_λ(b) = Π 1/(1 - a_i b_j)
      "skew"        Σ q^{|ρ|} s_{λ/ρ}(a)s_{λ/ρ}(b) = (q;q)^{-1} Π 1/(a_i b_j;q)
      "qwhittaker"  Σ P_μ(a)Q_μ(b) = Π 1/(a_i b_j;q)
      "restricted"  Σ q^{|ν|} P_μ(a)Q_μ(b) = Σ q^{|ρ|} s_{λ/ρ}(a)s_{λ/ρ}(b)
    """
    if identity not in CAUCHY_IDENTITIES:
        raise ParameterError(f"Unknown identity {identity!r}; expected one of {CAUCHY_IDENTITIES}")
    a_vals = tuple(Fraction(v) for v in _values(a))
    b_vals = tuple(Fraction(v) for v in _values(b))
    columns = min(len(a_vals), len(b_vals))
    q = QSeries.q_power(1, order)
    a_eval, b_eval = SymmetricEvaluator(a_vals), SymmetricEvaluator(b_vals)

    def schur_side() -> QSeries:
        total = QSeries.constant(0, order)
        for lam in enumerate_by_weight(order, max_length=columns):
            total = total + QSeries.q_power(lam.weight, order, a_eval.skew_schur(lam, EMPTY) * b_eval.skew_schur(lam, EMPTY))
        return total

    def skew_side() -> QSeries:
        total = QSeries.constant(0, order)
        for lam in enumerate_by_weight(order):
            coeff = Fraction(0)
            for rho in subpartitions(lam, max_column=columns):
                coeff += a_eval.skew_schur(lam, rho) * b_eval.skew_schur(lam, rho)
            if coeff:
                total = total + QSeries.q_power(lam.weight, order, coeff)
        return total

    def qwhittaker_side() -> QSeries:
        total = QSeries.constant(0, order)
        for mu in enumerate_by_weight(order, max_length=columns):
            term = qwhittaker_P(mu, a_vals, q) * qwhittaker_Q(mu, b_vals, q)
            total = total + QSeries.q_power(mu.weight, order) * term
        return total

    if identity == "schur":
        lhs = schur_side()
        rhs = QSeries.one(order)
        for ai in a_vals:
            for bj in b_vals:
                rhs = rhs * (1 - QSeries.q_power(1, order, ai * bj))
        rhs = rhs.inverse()
    elif identity == "skew":
        lhs = skew_side()
        rhs = _cauchy_product_series(a_vals, b_vals, order, 1) * qpoch_inf(q, q).inverse()
    elif identity == "qwhittaker":
        lhs = qwhittaker_side()
        rhs = _cauchy_product_series(a_vals, b_vals, order, 1)
    else:
        lhs = qwhittaker_side() * qpoch_inf(q, q).inverse()
        rhs = skew_side()

    result = SeriesComparison.compare(identity, lhs, rhs)
    logger.info(f"Cauchy identity {identity} mod q^{order + 1}: equal={result.equal}")
    return result
