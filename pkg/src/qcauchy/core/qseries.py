"""
q-Pochhammer symbols, theta functions and the q-binomial / Ramanujan sums.

Every operation has two backends behind one surface:

* series mode, when `q` (or `a`) is a `QSeries`: exact truncated power
  series with `Fraction` coefficients, used for identity checks;
* numeric mode, for float/complex scalars and numpy arrays, used by the
  kernels and determinants.  Products are truncated at
  J = ceil(ln(tol (1-|q|)/|a|) / ln|q|) factors, which bounds the log of the
  neglected tail by |a||q|^J/(1-|q|) <= tol.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ParameterError


logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-17

Exact = Union[int, Fraction]


class QSeries:
    """Power series in q with exact rational coefficients, known mod q^{order+1}"""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Sequence[Any], order: int):
        if order < 0:
            raise ParameterError(f"series order must be >= 0, got {order}")
        values = [Fraction(c) for c in list(coeffs)[: order + 1]]
        values.extend([Fraction(0)] * (order + 1 - len(values)))
        self.coeffs: Tuple[Fraction, ...] = tuple(values)
        self.order = order

    @classmethod
    def constant(cls, value: Exact, order: int) -> "QSeries":
        return cls([value], order)

    @classmethod
    def one(cls, order: int) -> "QSeries":
        return cls([1], order)

    @classmethod
    def q_power(cls, k: int, order: int, coeff: Exact = 1) -> "QSeries":
        """coeff * q^k"""
        if k < 0:
            raise ParameterError("negative powers of q are not power series")
        coeffs = [0] * (order + 1)
        if k <= order:
            coeffs[k] = coeff
        return cls(coeffs, order)

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "QSeries":
        return cls([Fraction(c) for c in data["coeffs"]], int(data["order"]))

    def to_json(self) -> Dict[str, Any]:
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs]}

    def __repr__(self) -> str:
        terms = [f"{c}*q^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"QSeries({' + '.join(terms) or '0'} + O(q^{self.order + 1}))"

    def __getitem__(self, i: int) -> Fraction:
        if i < 0 or i > self.order:
            raise IndexError(f"coefficient {i} outside 0..{self.order}")
        return self.coeffs[i]

    def valuation(self) -> int:
        """Index of the first nonzero coefficient; order + 1 for the zero series"""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return self.order + 1

    def truncate(self, order: int) -> "QSeries":
        return QSeries(self.coeffs, min(order, self.order))

    def _coerce(self, other: Any) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QSeries.constant(other, self.order)
        raise TypeError(f"cannot combine QSeries with {type(other).__name__}")

    def __add__(self, other: Any) -> "QSeries":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        order = min(self.order, other.order)
        return QSeries([self.coeffs[i] + other.coeffs[i] for i in range(order + 1)], order)

    __radd__ = __add__

    def __neg__(self) -> "QSeries":
        return QSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other: Any) -> "QSeries":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "QSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "QSeries":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QSeries([c * other for c in self.coeffs], self.order)
        if not isinstance(other, QSeries):
            return NotImplemented
        order = min(self.order, other.order)
        left, right = self.coeffs, other.coeffs
        out = [Fraction(0)] * (order + 1)
        for i in range(order + 1):
            if left[i]:
                li = left[i]
                for j in range(order + 1 - i):
                    if right[j]:
                        out[i + j] += li * right[j]
        return QSeries(out, order)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        """Multiplicative inverse mod q^{order+1}; requires a nonzero constant term"""
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ParameterError("series with zero constant term is not invertible")
        inv = [Fraction(0)] * (self.order + 1)
        inv[0] = 1 / c0
        for n in range(1, self.order + 1):
            acc = Fraction(0)
            for j in range(1, n + 1):
                if self.coeffs[j]:
                    acc += self.coeffs[j] * inv[n - j]
            inv[n] = -acc / c0
        return QSeries(inv, self.order)

    def __truediv__(self, other: Any) -> "QSeries":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("QSeries division by zero")
            return self * Fraction(1, 1) * (1 / Fraction(other))
        if not isinstance(other, QSeries):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Any) -> "QSeries":
        return self._coerce(other) * self.inverse()

    def __pow__(self, exponent: int) -> "QSeries":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = QSeries.one(self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = QSeries.constant(other, self.order)
        if not isinstance(other, QSeries):
            return NotImplemented
        order = min(self.order, other.order)
        return self.coeffs[: order + 1] == other.coeffs[: order + 1]

    def __hash__(self) -> int:
        return hash((self.coeffs, self.order))

    def first_mismatch(self, other: "QSeries") -> Optional[int]:
        order = min(self.order, other.order)
        for i in range(order + 1):
            if self.coeffs[i] != other.coeffs[i]:
                return i
        return None


def _is_series(*values: Any) -> bool:
    return any(isinstance(v, QSeries) for v in values)


def _series_order(*values: Any) -> int:
    return min(v.order for v in values if isinstance(v, QSeries))


def _check_numeric_q(q: Any) -> None:
    if abs(q) >= 1:
        raise ParameterError(f"|q| must be < 1, got {q}")


def product_length(a_abs: float, q_abs: float, tol: float = DEFAULT_TOL) -> int:
    """Number of factors J of (a;q)_inf needed for a log-tail below tol"""
    if a_abs == 0 or q_abs == 0:
        return 1
    bound = math.log(tol * (1 - q_abs) / a_abs) / math.log(q_abs)
    return max(1, math.ceil(bound))


def _qpoch_inf_series(a: Any, q: QSeries, order: int) -> QSeries:
    if not isinstance(q, QSeries):
        q = QSeries.constant(q, order)
    vq = q.valuation()
    if vq == 0:
        raise ParameterError("series-mode q must have zero constant term")
    result = QSeries.one(order)
    if isinstance(a, QSeries):
        if a.valuation() > order:
            return result
        va = a.valuation()
    else:
        if a == 0:
            return result
        va = 0
    term = a * QSeries.one(order) if not isinstance(a, QSeries) else a.truncate(order)
    j = 0
    while j * vq + va <= order:
        result = result * (1 - term)
        term = term * q
        j += 1
    return result


def log_qpoch_inf(a: Any, q: float, tol: float = DEFAULT_TOL) -> Any:
    """Complex log of (a;q)_inf for scalar or array a (branch irrelevant after exp)"""
    _check_numeric_q(q)
    arr = np.asarray(a, dtype=complex)
    a_max = float(np.max(np.abs(arr))) if arr.size else 0.0
    count = product_length(a_max, abs(q), tol)
    powers = q ** np.arange(count)
    with np.errstate(divide="ignore"):
        logs = np.log1p(-np.multiply.outer(arr, powers))
    total = logs.sum(axis=-1)
    return total if np.ndim(a) else complex(total)


def _qpoch_inf_numeric(a: Any, q: Any, tol: float) -> Any:
    _check_numeric_q(q)
    if isinstance(a, np.ndarray):
        count = product_length(float(np.max(np.abs(a))) if a.size else 0.0, abs(q), tol)
        powers = q ** np.arange(count)
        return np.prod(1 - np.multiply.outer(a, powers), axis=-1)
    if a == 0:
        return 1.0
    count = product_length(abs(a), abs(q), tol)
    result = 1.0
    power = 1.0
    for _ in range(count):
        result *= 1 - a * power
        power *= q
    return result


def qpoch_inf(a: Any, q: Any, precision: Any = None) -> Any:
    """(a;q)_inf = Π_{j>=0} (1 - a q^j)

    Series mode when a or q is a QSeries (precision = truncation order,
    defaulting to the operands' order); numeric mode otherwise (precision =
    tolerance on the log of the neglected tail).
    """
    if _is_series(a, q):
        order = _series_order(a, q) if precision is None else int(precision)
        return _qpoch_inf_series(a, q, order)
    tol = DEFAULT_TOL if precision is None else float(precision)
    return _qpoch_inf_numeric(a, q, tol)


def _one_like(q: Any) -> Any:
    if isinstance(q, QSeries):
        return QSeries.one(q.order)
    if isinstance(q, (int, Fraction)) and not isinstance(q, bool):
        return Fraction(1)
    return 1.0


def qpoch_n(a: Any, q: Any, n: int) -> Any:
    """(a;q)_n = (1-a)(1-aq)...(1-aq^{n-1}); for n = -m < 0 the product (1-a/q)...(1-a/q^m)

    The negative branch is the reciprocal of (a;q)_inf/(aq^n;q)_inf; it
    vanishes at a = q, which is the rule 1/(q;q)_{-m} = 0 used by the
    measures.  See `qpoch_ratio` for the quotient form.
    """
    result = _one_like(q)
    if n >= 0:
        power = _one_like(q)
        for _ in range(n):
            result = result * (1 - a * power)
            power = power * q
        return result
    if isinstance(q, QSeries):
        raise ParameterError("negative-index Pochhammer needs q^{-1}, unavailable in series mode")
    inverse_q = 1 / q
    power = inverse_q
    for _ in range(-n):
        result = result * (1 - a * power)
        power = power * inverse_q
    return result


def qpoch_ratio(a: Any, q: Any, n: int) -> Any:
    """(a;q)_inf / (a q^n;q)_inf for every integer n"""
    if n >= 0:
        return qpoch_n(a, q, n)
    denominator = qpoch_n(a, q, n)
    if denominator == 0:
        raise ParameterError(f"(a;q)_{n} has a pole at a={a}")
    return 1 / denominator


def qpoch_n_inverse_series(n: int, order: int) -> QSeries:
    """1/(q;q)_n as a series mod q^{order+1}"""
    q = QSeries.q_power(1, order)
    return qpoch_n(q, q, n).inverse()


def euler_series(order: int) -> QSeries:
    """(q;q)_inf mod q^{order+1}"""
    q = QSeries.q_power(1, order)
    return qpoch_inf(q, q)


def theta(x: Any, q: Any, precision: Any = None) -> Any:
    """θ(x) = (x;q)_inf (q/x;q)_inf"""
    if _is_series(x, q):
        if not isinstance(x, QSeries) and x == 0:
            raise ParameterError("theta is undefined at x = 0")
        return qpoch_inf(x, q, precision) * qpoch_inf(q / x if isinstance(x, QSeries) else q * (1 / Fraction(x)), q, precision)
    if np.any(np.asarray(x) == 0):
        raise ParameterError("theta is undefined at x = 0")
    tol = DEFAULT_TOL if precision is None else float(precision)
    return _qpoch_inf_numeric(x, q, tol) * _qpoch_inf_numeric(q / x, q, tol)


def log_theta(x: Any, q: float, tol: float = DEFAULT_TOL) -> Any:
    return log_qpoch_inf(x, q, tol) + log_qpoch_inf(q / np.asarray(x, dtype=complex), q, tol)


def log_theta_ratio(w: Any, t: complex, q: float, tol: float = DEFAULT_TOL) -> Any:
    """log of θ(-w/t)(q;q)_inf^2 / (θ(-1/t)θ(w)), without domain checks"""
    w = np.asarray(w, dtype=complex)
    value = (
        log_theta(-w / t, q, tol)
        + 2 * log_qpoch_inf(q, q, tol)
        - log_theta(-1 / t, q, tol)
        - log_theta(w, q, tol)
    )
    return value if np.ndim(value) else complex(value)


def ramanujan_theta_ratio(w: Any, t: Any, q: float) -> Any:
    """Closed form of Σ_{n∈Z} t q^n w^{-n}/(1 + t q^n), valid for |q| < |w| < 1"""
    _check_numeric_q(q)
    if t == 0:
        raise ParameterError("t must be nonzero")
    moduli = np.abs(np.asarray(w))
    if np.any(moduli <= abs(q)) or np.any(moduli >= 1):
        raise ParameterError(f"w must satisfy |q| < |w| < 1, got |w| = {moduli}")
    value = np.exp(log_theta_ratio(w, complex(t), q))
    return value if np.ndim(value) else complex(value)


def ramanujan_bilateral_sum(w: complex, t: complex, q: float, cutoff: int) -> complex:
    """Σ_{|n|<=cutoff} t q^n w^{-n}/(1 + t q^n)"""
    terms = []
    for n in range(-cutoff, cutoff + 1):
        tq = t * q ** n
        terms.append(tq * w ** (-n) / (1 + tq))
    return complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))


def ramanujan_psi_sum(a: complex, b: complex, z: complex, q: float) -> complex:
    """Closed form of the bilateral sum Σ_{n∈Z} (a;q)_n/(b;q)_n z^n, for |b/a| < |z| < 1"""
    _check_numeric_q(q)
    if not abs(b / a) < abs(z) < 1:
        raise ParameterError("need |b/a| < |z| < 1")
    numerator = qpoch_inf(a * z, q) * qpoch_inf(q / (a * z), q) * qpoch_inf(q, q) * qpoch_inf(b / a, q)
    denominator = qpoch_inf(z, q) * qpoch_inf(q / a, q) * qpoch_inf(b, q) * qpoch_inf(b / (a * z), q)
    return complex(numerator / denominator)


def bilateral_partial_sum(a: complex, b: complex, z: complex, q: float, cutoff: int) -> complex:
    """Σ_{|n|<=cutoff} (a;q)_n/(b;q)_n z^n with (x;q)_n = (x;q)_inf/(xq^n;q)_inf"""
    terms = [qpoch_ratio(a, q, n) / qpoch_ratio(b, q, n) * z ** n for n in range(-cutoff, cutoff + 1)]
    return complex(math.fsum(complex(v).real for v in terms), math.fsum(complex(v).imag for v in terms))


def qbinomial_partial_sum(a: Any, z: Any, q: Any, terms: int) -> Any:
    """Σ_{n<terms} (a;q)_n z^n/(q;q)_n; converges to (az;q)_inf/(z;q)_inf for |z| < 1"""
    total = 0 * _one_like(q)
    ratio = _one_like(q)
    z_power = _one_like(q)
    for n in range(terms):
        total = total + ratio * z_power
        ratio = ratio * (1 - a * q ** n) / (1 - q ** (n + 1))
        z_power = z_power * z
    return total


def pochhammer_lower_bound_constants(q: float) -> Tuple[float, float]:
    """(c1, c2) = ((q;q)_inf, 1/(2 ln(1/q))) for |(z;q)_inf| >= c1 exp(c2 ln^2|.|)"""
    if not 0 < q < 1:
        raise ParameterError(f"need 0 < q < 1, got {q}")
    return float(qpoch_inf(q, q)), 1.0 / (2.0 * math.log(1.0 / q))


def log_scale_exponent(a: float, q: float) -> Tuple[int, float]:
    """(J, α) with a = q^{α-J}, J an integer and α ∈ [0, 1), for a > 1"""
    if a <= 1:
        raise ParameterError(f"need a > 1, got {a}")
    x = math.log(a) / math.log(1 / q)
    j = math.ceil(x)
    return j, j - x

