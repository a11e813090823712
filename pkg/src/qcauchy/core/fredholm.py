"""
Kernels K, K_ell, K_inf and L, their factorization through the pole matrices
A and B, and windowed / finite-rank Fredholm determinants.

Conventions
-----------
Contour integrals are normalized, (1/2πi)∮ h(z) dz/z, and evaluated by the
trapezoidal rule on circles with half-shifted nodes, so every integral is a
mean over nodes.  With

    Ψ(z) = Π_i (a_i z;q)_inf / Π_j (b_j/z;q)_inf,    Φ(w) = 1/Ψ(w),

the common integrand is g(z, w) = w^{m2} z^{-m1} w/(z - w) Ψ(z) Φ(w).
Poles of Φ are labelled r = uN + k with ã_r = a_k q^u.

A(m; r) = f(m) I(m; r) with I(m; r) = mean_z z^{-m} Ψ(z)/(z - 1/ã_r).  The
point 1/ã_r is a zero of Ψ, so the integrand is analytic outside the poles
b_j q^i and the circle radius is chosen per m to sit at the saddle of
|z^{-m} Ψ(z)|.  Everything is evaluated in log space and exponentiated only
after conjugation, which keeps entries of order one.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import get_settings
from ..models.kernels import ContourSpec, KernelKind, KernelMatrix, PoleIndex
from ..models.params import ParamSet, default_window
from ..models.reports import ConvergenceRow, DeterminantEstimate, Theorem31Report
from .errors import ConvergenceError, ParameterError
from .qseries import log_qpoch_inf, log_theta_ratio


logger = logging.getLogger(__name__)

DEFAULT_DET_TOL = 1e-10
CONVERGENCE_WINDOW = (-3, 1)
_ROUNDING = 256 * np.finfo(float).eps


def f_zeta(m: int, zeta: complex, q: float) -> complex:
    """f_ζ(m) = -ζ q^m / (1 - ζ q^m)"""
    x = zeta * q ** m
    if x == 1:
        raise ParameterError(f"f_zeta has a pole: zeta q^{m} = 1")
    return -x / (1 - x)


def fermi_factor(m: int, p: ParamSet) -> complex:
    """f(m) at ζ = p.fermi_zeta, i.e. t q^{1/2+k+m}/(1 + t q^{1/2+k+m}) by default"""
    return f_zeta(m, p.fermi_zeta, p.q)


def _log_fermi(ms: Sequence[int], p: ParamSet) -> np.ndarray:
    values = np.array([fermi_factor(int(m), p) for m in ms], dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(values)


def log_psi(z: np.ndarray, p: ParamSet) -> np.ndarray:
    """log Ψ(z)"""
    z = np.asarray(z, dtype=complex)
    total = np.zeros(z.shape, dtype=complex)
    for ai in p.a_float:
        total = total + log_qpoch_inf(ai * z, p.q)
    for bj in p.b_float:
        total = total - log_qpoch_inf(bj / z, p.q)
    return total


def g_ab(z: complex, w: complex, m1: int, m2: int, p: ParamSet) -> complex:
    """w^{m2}/z^{m1} · w/(z - w) · Ψ(z)Φ(w)"""
    if z == w:
        raise ParameterError("g_ab is singular at z = w")
    products = np.exp(log_psi(np.array([z]), p)[0] - log_psi(np.array([w]), p)[0])
    return complex(w ** m2 / z ** m1 * w / (z - w) * products)


def pole_index(r: int, p: ParamSet) -> PoleIndex:
    return PoleIndex.from_r(r, p.a_float, p.q)


def pole_values(count: int, p: ParamSet) -> np.ndarray:
    """ã_1, ..., ã_count"""
    n = p.n_a
    a = np.array(p.a_float)
    r = np.arange(count)
    return a[r % n] * p.q ** (r // n)


def log_residue_phi(r: int, p: ParamSet) -> complex:
    """log Res_{w=1/ã_r} Φ(w)

    Res = -(1/ã) Π_j (b_j ã;q)_inf / [Π_{i≠k} (a_i/ã;q)_inf (q^{-u};q)_u (q;q)_inf]
    """
    index = pole_index(r, p)
    at, q = index.value, p.q
    value = complex(-math.log(at), math.pi)
    for bj in p.b_float:
        value += log_qpoch_inf(bj * at, q)
    for i, ai in enumerate(p.a_float):
        if i != index.k - 1:
            value -= log_qpoch_inf(ai / at, q)
    for j in range(index.u):
        value -= np.log(complex(1 - q ** (j - index.u)))
    value -= log_qpoch_inf(q, q)
    return complex(value)


def residue_phi(r: int, p: ParamSet) -> complex:
    return complex(np.exp(log_residue_phi(r, p)))


def conjugators(m: int, r: int, p: ParamSet, epsilon: Optional[float] = None, omega: Optional[float] = None) -> Tuple[float, float]:
    """(τ(m), σ(r)) with τ(m) = a_max^{-m} q^{-m²/2N - m/2 + εm} for m >= 0 (else 1) and σ(r) = q^{-(1-ω)u}"""
    epsilon = p.epsilon if epsilon is None else epsilon
    omega = p.omega if omega is None else omega
    if not 0 < epsilon < 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not 0 < omega < 0.5 - epsilon:
        raise ParameterError(f"omega must lie in (0, 1/2 - eps), got {omega}")
    u = pole_index(r, p).u
    return math.exp(_log_tau(m, p, epsilon)), p.q ** (-(1 - omega) * u)


def _log_tau(m: int, p: ParamSet, epsilon: Optional[float] = None) -> float:
    if m < 0:
        return 0.0
    epsilon = p.epsilon if epsilon is None else epsilon
    n = p.n_a
    return -m * math.log(max(p.a_float)) + (-m * m / (2 * n) - m / 2 + epsilon * m) * math.log(p.q)


def _log_sigma(u: np.ndarray, p: ParamSet) -> np.ndarray:
    return -(1 - p.omega) * u * math.log(p.q)


def contour_C(p: ParamSet, points: Optional[int] = None, radius: Optional[float] = None) -> ContourSpec:
    """|z| = sqrt(b_max / a_max), the geometric midpoint of b_max and 1/a_max"""
    b_max, a_max = max(p.b_float), max(p.a_float)
    radius = math.sqrt(b_max / a_max) if radius is None else radius
    if not b_max < radius < 1 / a_max:
        raise ParameterError(f"contour C radius {radius} violates b_max < R < 1/a_max")
    return ContourSpec(radius=radius, points=points or get_settings().quad_nodes)


def contour_A(m: int, p: ParamSet, points: int) -> ContourSpec:
    """Saddle-point circle for I(m; r): R_m = max(R_C, exp((mL - Σ ln a_i)/N - L/2)), L = ln(1/q)"""
    base = contour_C(p, points).radius
    big_l = math.log(1 / p.q)
    exponent = (m * big_l - sum(math.log(a) for a in p.a_float)) / p.n_a - big_l / 2
    return ContourSpec(radius=max(base, math.exp(exponent)), points=points)


def contour_pair_L(
    p: ParamSet,
    points: Optional[int] = None,
    inner: Optional[float] = None,
    outer: Optional[float] = None,
) -> Tuple[ContourSpec, ContourSpec]:
    """(C, D̄) with radii r' < r, b_max < r', r < 1/a_max and 1 < r/r' < 1/q

    Defaults split the log-gap between b_max and 1/a_max symmetrically, with
    ln(r/r') = min(ln(1/a_max) - ln b_max, ln(1/q))/2.
    """
    b_max, a_max = max(p.b_float), max(p.a_float)
    span = math.log(1 / a_max) - math.log(b_max)
    gap = min(span, math.log(1 / p.q)) / 2
    if inner is None:
        inner = math.exp(math.log(b_max) + (span - gap) / 2)
    if outer is None:
        outer = inner * math.exp(gap)
    if not b_max < inner:
        raise ParameterError(f"radii violate b_max < r' (r'={inner}, b_max={b_max})")
    if not outer < 1 / a_max:
        raise ParameterError(f"radii violate r < 1/a_max (r={outer}, 1/a_max={1 / a_max})")
    if not 1 < outer / inner < 1 / p.q:
        raise ParameterError(f"radii violate 1 < r/r' < 1/q (r/r'={outer / inner})")
    points = points or get_settings().quad_nodes
    logger.debug(f"L contours: r'={inner:.6g}, r={outer:.6g}")
    return ContourSpec(radius=inner, points=points), ContourSpec(radius=outer, points=points)


def _log_mean(logs: np.ndarray, axis: int = -1) -> np.ndarray:
    """log of mean(exp(logs)) along axis, scaled by the largest real part"""
    shift = np.max(logs.real, axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        scaled = np.log(np.mean(np.exp(logs - shift), axis=axis))
    return scaled + np.squeeze(shift, axis=axis)


def _log_z_minus_pole(z: np.ndarray, poles: np.ndarray) -> np.ndarray:
    """log(z - 1/ã) = -log ã + iπ + log1p(-ã z), shape (len(poles), len(z))"""
    return -np.log(poles)[:, None] + 1j * np.pi + np.log1p(-np.multiply.outer(poles, z))


def log_I_block(ms: Sequence[int], rs: Sequence[int], p: ParamSet, points: int, zquad: Optional[ContourSpec] = None) -> np.ndarray:
    """log I(m; r) for m in ms and r in rs"""
    poles = pole_values(max(rs), p)[np.asarray(rs) - 1]
    out = np.empty((len(ms), len(rs)), dtype=complex)
    for i, m in enumerate(ms):
        contour = zquad if zquad is not None else contour_A(m, p, points)
        z = contour.nodes()
        base = -m * np.log(z) + log_psi(z, p)
        out[i] = _log_mean(base[None, :] - _log_z_minus_pole(z, poles), axis=1)
    return out


def log_B_block(rs: Sequence[int], ms: Sequence[int], p: ParamSet) -> np.ndarray:
    """log B(r; m) = -m log ã_r + log Res_r"""
    poles = pole_values(max(rs), p)[np.asarray(rs) - 1]
    residues = np.array([log_residue_phi(r, p) for r in rs])
    return residues[:, None] - np.outer(np.log(poles), np.asarray(ms))


def matrix_A(m: int, r: int, p: ParamSet, points: Optional[int] = None) -> complex:
    """A(m; r) = f(m) mean_z z^{-m} Ψ(z)/(z - 1/ã_r)"""
    points = points or get_settings().quad_nodes
    log_value = _log_fermi([m], p)[0] + log_I_block([m], [r], p, points)[0, 0]
    return complex(np.exp(log_value))


def matrix_B(r: int, m: int, p: ParamSet) -> complex:
    """B(r; m) = ã_r^{-m} Res_{w=1/ã_r} Φ(w)"""
    return complex(np.exp(log_B_block([r], [m], p)[0, 0]))


def _kernel_sum(m1: int, m2: int, p: ParamSet, rs: Sequence[int], points: int, zquad: Optional[ContourSpec] = None) -> complex:
    logs = log_I_block([m1], rs, p, points, zquad)[0] + log_B_block(rs, [m2], p)[:, 0]
    return complex(np.sum(np.exp(logs)))


def kernel_K(m1: int, m2: int, p: ParamSet, zquad: Optional[ContourSpec] = None) -> complex:
    """K(m1, m2): residues at w = 1/a_j, then trapezoidal z-quadrature on C"""
    p.require_kernel_hypotheses()
    if zquad is not None:
        contour_C(p, zquad.points, zquad.radius)
    points = zquad.points if zquad is not None else get_settings().quad_nodes
    return _kernel_sum(m1, m2, p, range(1, p.n_a + 1), points, zquad)


def kernel_K_ell(m1: int, m2: int, ell: int, p: ParamSet, points: Optional[int] = None) -> complex:
    """K_ℓ(m1, m2) = Σ_{r <= N(ℓ+1)} I(m1; r) B(r; m2); K_0 is K"""
    if ell < 0:
        raise ParameterError(f"ell must be >= 0, got {ell}")
    if ell:
        p.require_expansion_hypotheses()
    else:
        p.require_kernel_hypotheses()
    points = points or get_settings().quad_nodes
    return _kernel_sum(m1, m2, p, range(1, p.n_a * (ell + 1) + 1), points)


def _tail_ratio(p: ParamSet) -> float:
    rho = p.q ** (0.5 - p.epsilon)
    return rho / (1 - rho)


def contour_pair_K_inf(p: ParamSet, points: int) -> Tuple[ContourSpec, ContourSpec]:
    """Circles splitting log b_max < log|z| < log|w| < log(1/a_max) in thirds"""
    lo, hi = math.log(max(p.b_float)), -math.log(max(p.a_float))
    third = (hi - lo) / 3
    return ContourSpec(radius=math.exp(lo + third), points=points), ContourSpec(radius=math.exp(hi - third), points=points)


def _log_K_inf_contour(m1s: Sequence[int], m2s: Sequence[int], p: ParamSet, points: int) -> Tuple[np.ndarray, np.ndarray]:
    """(log K_inf, log of its rounding bound) from -mean_{z,w} z^{-m1} w^{m2} w/(z - w) Ψ(z)Φ(w)

    Summing every pole of Φ is the same as integrating w outside z, so any
    pair of circles with b_max < |z| < |w| < 1/a_max gives K_inf.
    """
    inner, outer = contour_pair_K_inf(p, points)
    kernel = _L_kernel(p, inner, outer)
    g_hat = _L_transform(m1s, m2s, inner, outer, kernel)
    scale = -np.asarray(m1s, dtype=float)[:, None] * math.log(inner.radius) + np.asarray(m2s, dtype=float)[None, :] * math.log(outer.radius)
    with np.errstate(divide="ignore"):
        log_value = np.log(-g_hat) + scale
    log_bound = math.log(_ROUNDING * np.max(np.abs(kernel))) + scale
    return log_value, log_bound


def kernel_K_inf(m1: int, m2: int, p: ParamSet, tail_tol: Optional[float] = None, points: Optional[int] = None) -> complex:
    """K_inf(m1, m2), summing pole blocks u = 0, 1, ... until the geometric tail bound is below tail_tol

    When the pole sum loses more digits to cancellation than the double
    contour integral of the same kernel, the contour value is returned.
    """
    p.require_expansion_hypotheses()
    settings = get_settings()
    tail_tol = settings.tail_tol if tail_tol is None else tail_tol
    points = points or settings.quad_nodes
    n = p.n_a
    total, magnitude = 0j, 0.0
    for u in range(settings.max_pole_blocks):
        rs = range(u * n + 1, (u + 1) * n + 1)
        logs = log_I_block([m1], rs, p, points)[0] + log_B_block(rs, [m2], p)[:, 0]
        block = np.exp(logs)
        total += complex(np.sum(block))
        magnitude += float(np.sum(np.abs(block)))
        if u and np.max(np.abs(block)) * _tail_ratio(p) < tail_tol:
            break
    else:
        raise ConvergenceError(f"K_inf({m1},{m2}) tail above {tail_tol} after {settings.max_pole_blocks} pole blocks")

    value, bound = total, _ROUNDING * magnitude + np.max(np.abs(block)) * _tail_ratio(p)
    log_value, log_bound = _log_K_inf_contour([m1], [m2], p, points)
    if log_bound[0, 0] < math.log(bound):
        value, bound = complex(np.exp(log_value[0, 0])), math.exp(log_bound[0, 0])
        logger.debug(f"K_inf({m1},{m2}): pole sum cancels, using the contour value")
    if bound > settings.cancellation_tol * max(1.0, abs(value)):
        raise ConvergenceError(f"K_inf({m1},{m2}) rounding error {bound:.3e} above {settings.cancellation_tol:.1e} on both routes")
    return value


def kernel_L(
    m1: int,
    m2: int,
    p: ParamSet,
    quadC: Optional[ContourSpec] = None,
    quadDbar: Optional[ContourSpec] = None,
) -> complex:
    """L(m1, m2) by double trapezoidal quadrature of g/(zw) on |z| = r', |w| = r"""
    inner, outer = _resolve_L_contours(p, quadC, quadDbar, None)
    g_hat = _L_transform([m1], [m2], inner, outer, _L_kernel(p, inner, outer))
    return complex(inner.radius ** (-m1) * outer.radius ** m2 * g_hat[0, 0])


def _resolve_L_contours(
    p: ParamSet,
    quadC: Optional[ContourSpec],
    quadDbar: Optional[ContourSpec],
    points: Optional[int],
) -> Tuple[ContourSpec, ContourSpec]:
    inner, outer = contour_pair_L(
        p,
        points or (quadC.points if quadC is not None else None),
        quadC.radius if quadC is not None else None,
        quadDbar.radius if quadDbar is not None else None,
    )
    if quadDbar is not None:
        outer = outer.with_points(quadDbar.points)
    return inner, outer


def _L_kernel(p: ParamSet, inner: ContourSpec, outer: ContourSpec) -> np.ndarray:
    """w/(z - w) Ψ(z) Φ(w) on the node grid"""
    z, w = inner.nodes(), outer.nodes()
    psi_z = np.exp(log_psi(z, p))
    phi_w = np.exp(-log_psi(w, p))
    return (w[None, :] / (z[:, None] - w[None, :])) * psi_z[:, None] * phi_w[None, :]


def _L_transform(m1s: Sequence[int], m2s: Sequence[int], inner: ContourSpec, outer: ContourSpec, kernel: np.ndarray) -> np.ndarray:
    """Ĝ[m1, m2] = mean_{z,w} e^{-i m1 θ} e^{i m2 φ} kernel(z, w)"""
    ez = np.exp(-1j * np.outer(np.asarray(m1s), inner.angles())) / inner.points
    ew = np.exp(1j * np.outer(np.asarray(m2s), outer.angles())) / outer.points
    return ez @ kernel @ ew.T


def _window_indices(window: Tuple[int, int]) -> np.ndarray:
    lo, hi = window
    if hi < lo:
        raise ParameterError(f"empty window {window}")
    return np.arange(lo, hi + 1)


def _log_tau_window(p: ParamSet, ms: Sequence[int]) -> np.ndarray:
    return np.array([_log_tau(int(m), p) for m in ms])


def conjugated_factors(p: ParamSet, ms: Sequence[int], rs: Sequence[int], points: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(Ã, B̃) with Ã(m; r) = τ(m) A(m; r) σ(r) and B̃(r; m) = σ(r)^{-1} B(r; m) τ(m)^{-1}, from log-space entries"""
    points = points or get_settings().quad_nodes
    ms = list(ms)
    log_tau = _log_tau_window(p, ms)
    u = (np.asarray(rs) - 1) // p.n_a
    log_sigma = _log_sigma(u, p)
    log_a = _log_fermi(ms, p)[:, None] + log_I_block(ms, rs, p, points)
    log_a = log_a + log_tau[:, None] + log_sigma[None, :]
    log_b = log_B_block(rs, ms, p) - log_sigma[:, None] - log_tau[None, :]
    with np.errstate(under="ignore"):
        return np.exp(log_a), np.exp(log_b)


def _make_matrix(kind: KernelKind, window: Tuple[int, int], entries: np.ndarray, log_conjugator: np.ndarray, points: int) -> KernelMatrix:
    if not np.all(np.isfinite(entries)):
        raise ConvergenceError(f"{kind.value} window {window} has non-finite entries")
    return KernelMatrix(kind=kind, window=window, entries=entries, log_conjugator=log_conjugator, points=points)


def _K_inf_window(p: ParamSet, ms: np.ndarray, points: int, tail_tol: float) -> np.ndarray:
    """Conjugated f·K_inf, entry by entry from the pole sum or the double contour, whichever rounds less"""
    settings = get_settings()
    n = p.n_a
    entries = np.zeros((len(ms), len(ms)), dtype=complex)
    magnitude = np.zeros((len(ms), len(ms)))
    for u in range(settings.max_pole_blocks):
        a_t, b_t = conjugated_factors(p, ms, range(u * n + 1, (u + 1) * n + 1), points)
        block = a_t @ b_t
        entries += block
        magnitude += np.abs(a_t) @ np.abs(b_t)
        if u and np.max(np.abs(block)) * _tail_ratio(p) < tail_tol:
            logger.info(f"K_inf window: summed {u + 1} pole blocks")
            break
    else:
        raise ConvergenceError(f"K_inf window tail above {tail_tol} after {settings.max_pole_blocks} pole blocks")
    bound = _ROUNDING * magnitude + np.abs(block) * _tail_ratio(p)

    log_value, log_bound = _log_K_inf_contour(ms, ms, p, points)
    log_tau = _log_tau_window(p, ms)
    shift = (_log_fermi(ms, p).real + log_tau)[:, None] - log_tau[None, :]
    with np.errstate(divide="ignore"):
        use_contour = log_bound + shift < np.log(bound)
    if np.any(use_contour):
        # only the selected entries are kept, the others may overflow
        with np.errstate(over="ignore", invalid="ignore"):
            contour = np.exp(log_value + _log_fermi(ms, p)[:, None] + log_tau[:, None] - log_tau[None, :])
            contour_bound = np.exp(log_bound + shift)
        entries = np.where(use_contour, contour, entries)
        bound = np.where(use_contour, contour_bound, bound)
        logger.info(f"K_inf window: {int(np.sum(use_contour))} entries taken from the double contour")
    worst = float(np.max(bound))
    if worst > settings.cancellation_tol:
        raise ConvergenceError(f"K_inf window rounding error {worst:.3e} above {settings.cancellation_tol:.1e} on both routes")
    return entries


def kernel_window(
    kind: KernelKind,
    p: ParamSet,
    window: Tuple[int, int],
    points: Optional[int] = None,
    ell: int = 0,
    radii: Tuple[Optional[float], Optional[float]] = (None, None),
    tail_tol: Optional[float] = None,
) -> KernelMatrix:
    """f(m1)·Kernel(m1, m2) on the window, conjugated for conditioning

    K kinds use the conjugation τ(m1) · τ(m2)^{-1} and are built as Ã B̃; L uses
    the geometric conjugator r^m of its outer contour.
    """
    settings = get_settings()
    points = points or settings.quad_nodes
    ms = _window_indices(window)
    if kind == KernelKind.L:
        inner, outer = contour_pair_L(p, points, *radii)
        g_hat = _L_transform(ms, ms, inner, outer, _L_kernel(p, inner, outer))
        fermi = np.array([fermi_factor(int(m), p) for m in ms])
        entries = (fermi * (outer.radius / inner.radius) ** ms.astype(float))[:, None] * g_hat
        return _make_matrix(kind, window, entries, ms * math.log(outer.radius), points)

    p.require_kernel_hypotheses()
    log_tau = _log_tau_window(p, ms)
    if kind == KernelKind.K or (kind == KernelKind.K_ELL and ell == 0):
        a_t, b_t = conjugated_factors(p, ms, range(1, p.n_a + 1), points)
        return _make_matrix(kind, window, a_t @ b_t, log_tau, points)

    p.require_expansion_hypotheses()
    if kind == KernelKind.K_ELL:
        a_t, b_t = conjugated_factors(p, ms, range(1, p.n_a * (ell + 1) + 1), points)
        return _make_matrix(kind, window, a_t @ b_t, log_tau, points)
    tail_tol = settings.tail_tol if tail_tol is None else tail_tol
    return _make_matrix(kind, window, _K_inf_window(p, ms, points, tail_tol), log_tau, points)


def _window_det(matrix: KernelMatrix) -> complex:
    sign = 1 if matrix.kind == KernelKind.L else -1
    identity = np.eye(matrix.entries.shape[0])
    phase, logabs = np.linalg.slogdet(identity + sign * matrix.entries)
    return complex(phase * np.exp(logabs))


def doubled_window(window: Tuple[int, int]) -> Tuple[int, int]:
    lo, hi = window
    half = (hi - lo + 2) // 2
    return lo - half, hi + half


def fredholm_det_window(
    kind: KernelKind,
    p: ParamSet,
    window: Optional[Tuple[int, int]] = None,
    points: Optional[int] = None,
    ell: int = 0,
    radii: Tuple[Optional[float], Optional[float]] = (None, None),
    tol: float = DEFAULT_DET_TOL,
) -> DeterminantEstimate:
    """det(1 - fK), det(1 - fK_ℓ), det(1 - fK_inf) or det(1 + fL) on a finite window

    Nodes are doubled until the value moves by less than the quadrature
    tolerance, then the window is doubled once more as a truncation check.
    A given window that moves by more than tol raises ConvergenceError; the
    default window is grown up to max_window_growth times first.
    """
    settings = get_settings()
    kind = KernelKind(kind)
    explicit = window is not None
    window = window or default_window(p, tol)
    points = points or settings.quad_nodes

    def evaluate(win: Tuple[int, int], nodes: int) -> complex:
        return _window_det(kernel_window(kind, p, win, nodes, ell, radii))

    try:
        value = evaluate(window, points)
        while True:
            refined = evaluate(window, 2 * points)
            quad_drift = abs(refined - value)
            value = refined
            points *= 2
            if quad_drift < settings.quad_tol or 2 * points > settings.max_quad_nodes:
                break
        if quad_drift > tol:
            raise ConvergenceError(
                f"{kind.value} determinant moved by {quad_drift:.3e} under node doubling at {points} nodes (tol {tol:.1e})"
            )

        for growth in range(settings.max_window_growth + 1):
            wider = doubled_window(window)
            wider_value = evaluate(wider, points)
            window_drift = abs(wider_value - value)
            if window_drift <= tol:
                break
            if explicit or growth == settings.max_window_growth:
                raise ConvergenceError(
                    f"window too small for requested tolerance: {kind.value} on {window} "
                    f"moved by {window_drift:.3e} under doubling (tol {tol:.1e})"
                )
            logger.info(f"{kind.value} determinant moved by {window_drift:.3e} on {window}, widening to {wider}")
            window, value = wider, wider_value
    except ConvergenceError as e:
        logger.error(f"Window determinant of {kind.value} failed: {e}")
        raise

    logger.info(f"det({kind.value}) on {window} = {value.real:.15g} (window drift {window_drift:.2e})")
    return DeterminantEstimate(
        kind=kind.value if kind != KernelKind.K_ELL else f"K_{ell}",
        value=value.real,
        imag=value.imag,
        window=window,
        points=points,
        window_drift=window_drift,
        quad_drift=quad_drift,
    )


def _log_w_rows(ns: Sequence[int], n_cols: int, p: ParamSet, points: int, inner: bool) -> np.ndarray:
    """log W_{n, n'} on |z| = q^{-1/2}/ã_n, or on q^{1/2}/ã_n for the shrunk contour"""
    q = p.q
    fermi_t = -p.fermi_zeta
    poles = pole_values(max(max(ns), n_cols), p)
    columns = poles[:n_cols]
    out = np.empty((len(ns), n_cols), dtype=complex)
    for i, n in enumerate(ns):
        at = poles[n - 1]
        radius = (q ** 0.5 if inner else q ** -0.5) / at
        z = ContourSpec(radius=radius, points=points).nodes()
        base = log_psi(z, p) + log_theta_ratio(at * z, fermi_t, q) + log_residue_phi(n, p) + 1j * np.pi
        out[i] = _log_mean(base[None, :] - _log_z_minus_pole(z, columns), axis=1)
    return out


def w_matrix(ell: int, p: ParamSet, points: Optional[int] = None) -> np.ndarray:
    """W_{n,n'} = -Res_n mean_{|z| = q^{-1/2}/ã_n} Ψ(z) R(ã_n z)/(z - 1/ã_{n'}), 1 <= n, n' <= N(ℓ+1)

    R is the closed form of the Fermi-weighted m-sum, continued past |x| = 1.
    """
    if ell < 0:
        raise ParameterError(f"ell must be >= 0, got {ell}")
    p.require_expansion_hypotheses()
    points = points or get_settings().quad_nodes
    size = p.n_a * (ell + 1)
    return np.exp(_log_w_rows(range(1, size + 1), size, p, points, inner=False))


def w_matrix_inner_row(n: int, n_cols: int, p: ParamSet, points: Optional[int] = None) -> np.ndarray:
    """Row n of W with the contour shrunk to |z| = q^{1/2}/ã_n, inside the pole at 1/ã_n"""
    points = points or get_settings().quad_nodes
    return np.exp(_log_w_rows([n], n_cols, p, points, inner=True)[0])


def row_reduction_factor(n: int, p: ParamSet) -> complex:
    """c_n with (shrunk row n) = c_n · (row n - N) of W, for n > N

    c_n = -T (1/q) Π_j 1/(1 - b_j ã_{n-N}) Π_i ã_n/(ã_n - a_i), T = -ζ
    """
    if n <= p.n_a:
        raise ParameterError(f"row reduction needs n > N, got {n}")
    poles = pole_values(n, p)
    at, previous = poles[n - 1], poles[n - 1 - p.n_a]
    factor = -(-p.fermi_zeta) / p.q
    for bj in p.b_float:
        factor /= 1 - bj * previous
    for ai in p.a_float:
        factor *= at / (at - ai)
    return complex(factor)


def fredholm_det_finite_rank(ell: int, p: ParamSet, points: Optional[int] = None) -> DeterminantEstimate:
    """F_ℓ = det W, an N(ℓ+1)-square determinant"""
    points = points or get_settings().quad_nodes
    value = complex(np.linalg.det(w_matrix(ell, p, points)))
    refined = complex(np.linalg.det(w_matrix(ell, p, 2 * points)))
    drift = abs(refined - value)
    logger.info(f"Finite-rank determinant ell={ell}: {refined.real:.15g} (node drift {drift:.2e})")
    return DeterminantEstimate(
        kind="finite_rank",
        value=refined.real,
        imag=refined.imag,
        rank=p.n_a * (ell + 1),
        points=2 * points,
        quad_drift=drift,
    )


def plain_kernel_blocks(p: ParamSet, window: Tuple[int, int], points: Optional[int] = None, tail_tol: Optional[float] = None) -> List[np.ndarray]:
    """Unconjugated K contributions of pole blocks u = 0, 1, ... on the window, until the tail is negligible

    Meant for small windows near the origin; raises ConvergenceError when the
    block sums cancel below cancellation_tol.
    """
    p.require_expansion_hypotheses()
    settings = get_settings()
    points = points or settings.quad_nodes
    tail_tol = settings.tail_tol if tail_tol is None else tail_tol
    ms = list(_window_indices(window))
    n = p.n_a
    blocks = []
    magnitude = np.zeros((len(ms), len(ms)))
    for u in range(settings.max_pole_blocks):
        rs = range(u * n + 1, (u + 1) * n + 1)
        terms = np.exp(log_I_block(ms, rs, p, points)[:, :, None] + log_B_block(rs, ms, p)[None, :, :])
        block = terms.sum(axis=1)
        blocks.append(block)
        magnitude += np.abs(terms).sum(axis=1)
        if u and np.max(np.abs(block)) * _tail_ratio(p) < tail_tol:
            break
    else:
        raise ConvergenceError(f"kernel tail above {tail_tol} after {settings.max_pole_blocks} pole blocks")
    total = np.abs(np.sum(blocks, axis=0))
    if np.any(_ROUNDING * magnitude > settings.cancellation_tol * np.maximum(1.0, total)):
        raise ConvergenceError(f"pole blocks on {window} cancel beyond {settings.cancellation_tol:.1e}")
    return blocks


def hypotheses(p: ParamSet) -> Dict[str, bool]:
    return p.hypotheses()


def verify_theorem31(
    p: ParamSet,
    window: Optional[Tuple[int, int]] = None,
    points: Optional[int] = None,
    ell_max: int = 3,
    tol: float = 1e-6,
    radii: Tuple[Optional[float], Optional[float]] = (None, None),
) -> Theorem31Report:
    """det(1 - fK) three ways and det(1 + fL), with their pairwise gaps

    The measure is symmetric in a, so a is relabelled descending before the
    expansion hypotheses are checked.
    """
    if not p.hypotheses()["sorted_a"]:
        logger.info(f"Relabelling a = {p.a_float} in descending order")
        p = p.sorted_a()
    checks = p.hypotheses()
    for name, ok in checks.items():
        if not ok:
            logger.warning(f"Hypothesis {name} not satisfied by {p.a_float}, {p.b_float}")
    p.require_expansion_hypotheses()
    # validate radii before any quadrature
    contour_pair_L(p, points, *radii)
    points = points or get_settings().quad_nodes
    det_tol = min(tol, DEFAULT_DET_TOL)

    det_k = fredholm_det_window(KernelKind.K, p, window, points, tol=det_tol)
    det_inf = fredholm_det_window(KernelKind.K_INF, p, window, points, tol=det_tol)
    det_l = fredholm_det_window(KernelKind.L, p, window, points, radii=radii, tol=det_tol)
    ranks = [fredholm_det_finite_rank(ell, p, points) for ell in range(ell_max + 1)]

    blocks = plain_kernel_blocks(p, CONVERGENCE_WINDOW, points)
    k_inf = np.sum(blocks, axis=0)
    convergence = []
    for ell, rank in enumerate(ranks):
        k_ell = np.sum(blocks[: ell + 1], axis=0)
        convergence.append(
            ConvergenceRow(
                ell=ell,
                F_ell=rank.value,
                det_gap=abs(rank.value - det_inf.value),
                kernel_gap=float(np.max(np.abs(k_ell - k_inf))),
            )
        )

    rank_values = [r.value for r in ranks]
    gaps = {
        "K_vs_L": abs(det_k.value - det_l.value),
        "K_inf_vs_L": abs(det_inf.value - det_l.value),
        "K_vs_K_inf": abs(det_k.value - det_inf.value),
        "rank0_vs_K": abs(rank_values[0] - det_k.value),
        "rank_spread": max(rank_values) - min(rank_values),
    }
    passed = all(gap < tol for gap in gaps.values())
    if passed:
        logger.info(f"Determinant routes agree within {tol:.1e}")
    else:
        worst = max(gaps, key=gaps.get)
        logger.warning(f"Determinant gap {worst}={gaps[worst]:.3e} exceeds {tol:.1e}")
    return Theorem31Report(
        params=p,
        hypotheses=checks,
        window=det_k.window,
        points=points,
        tol=tol,
        F_window_K=det_k,
        F_rank=ranks,
        F_K_inf=det_inf,
        F_L=det_l,
        gaps=gaps,
        convergence=convergence,
        passed=passed,
    )
