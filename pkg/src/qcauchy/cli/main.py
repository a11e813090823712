"""
qcauchy command line: verify-identity, compare-distributions, fredholm, eval.

Exit codes: 0 verified, 1 verification failed (or a tail/quadrature budget
was exhausted), 2 invalid configuration.  Diagnostics go to stderr; the
report goes to --out or stdout.
"""

import argparse
import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .. import __version__
from ..config import get_settings
from ..core import fredholm, measures, qseries, symfunc
from ..core.errors import ConvergenceError, ParameterError
from ..models.params import ParamSet, RunConfig, TruncationPolicy, VarSpec, parse_scalar
from ..models.partition import Partition
from ..models.reports import EvalResult, IdentityRunReport
from .storage import ReportStorage


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2

EVAL_TARGETS = ("h", "e", "skew", "P", "Q", "qpoch", "theta", "K", "L", "A", "B", "W")


class ConfigError(Exception):
    """Invalid command-line input, reported with the offending flag"""


def _flag(name: str, builder: Callable[[], Any]) -> Any:
    try:
        return builder()
    except (ValidationError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"invalid {name}: {e}") from e


def _window(text: Optional[str]) -> Optional[tuple]:
    if text is None:
        return None
    lo, hi = (int(v) for v in text.split(","))
    return lo, hi


def _partition(text: Optional[str]) -> Partition:
    if not text:
        return Partition()
    return Partition.of(*(int(v) for v in text.split(",")))


def build_params(args: argparse.Namespace) -> ParamSet:
    a = _flag("--a", lambda: VarSpec.model_validate(args.a))
    b = _flag("--b", lambda: VarSpec.model_validate(args.b))
    q = _flag("--q", lambda: float(parse_scalar(args.q)))
    t = _flag("--t", lambda: float(parse_scalar(args.t)))
    values: Dict[str, Any] = {"a": a, "b": b, "q": q, "t": t, "k": args.k}
    if args.eps is not None:
        values["epsilon"] = args.eps
    if args.omega is not None:
        values["omega"] = args.omega
    return _flag("parameters", lambda: ParamSet(**values))


def build_config(args: argparse.Namespace, with_params: bool = True) -> RunConfig:
    params = build_params(args) if with_params else None
    trunc = _flag("--cutoff/--order", lambda: TruncationPolicy(weight_cutoff=args.cutoff, series_order=args.order))
    return _flag(
        "configuration",
        lambda: RunConfig(
            command=args.command,
            params=params,
            trunc=trunc,
            tol=args.tol,
            n_min=args.n_min,
            n_max=args.n_max,
            window=_flag("--window", lambda: _window(args.window)),
            quad_nodes=args.quad_nodes,
            ell_max=args.ell_max,
            radii=(args.radius_inner, args.radius_outer),
            out=args.out,
            format=args.format,
        ),
    )


def cmd_verify_identity(args: argparse.Namespace) -> int:
    config = build_config(args, with_params=False)
    a = _flag("--a", lambda: VarSpec.model_validate(args.a))
    b = _flag("--b", lambda: VarSpec.model_validate(args.b))
    reports = [measures.verify_theorem1(n, a, b, config.trunc.series_order) for n in range(config.n_max + 1)]
    run = IdentityRunReport(
        order=config.trunc.series_order,
        n_max=config.n_max,
        reports=reports,
        passed=all(r.equal for r in reports),
    )
    ReportStorage(config.out).write(run, config.format.value)
    return EXIT_OK if run.passed else EXIT_FAIL


def cmd_compare_distributions(args: argparse.Namespace) -> int:
    config = build_config(args)
    report = measures.compare_distributions(
        config.params,
        config.trunc,
        range(config.n_min, config.n_max + 1),
        config.tol,
    )
    ReportStorage(config.out).write(report, config.format.value)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_fredholm(args: argparse.Namespace) -> int:
    config = build_config(args)
    report = fredholm.verify_theorem31(
        config.params,
        window=config.window,
        points=config.quad_nodes,
        ell_max=config.ell_max,
        tol=config.tol,
        radii=config.radii,
    )
    ReportStorage(config.out).write(report, config.format.value)
    return EXIT_OK if report.passed else EXIT_FAIL


def _exact_or_float(spec: VarSpec) -> tuple:
    return spec.values if spec.is_exact else spec.as_float()


def _render(value: Any) -> EvalResult:
    real = imag = None
    if isinstance(value, qseries.QSeries):
        text = repr(value)
    elif isinstance(value, (int, Fraction)):
        text = str(value)
        real = float(value)
    else:
        c = complex(value)
        real, imag = c.real, c.imag
        text = repr(c) if c.imag else repr(c.real)
    return EvalResult(target="", arguments={}, value=text, real=real, imag=imag)


def evaluate_target(args: argparse.Namespace) -> Any:
    target = args.target
    if target in ("h", "e", "skew", "P", "Q"):
        a = _exact_or_float(_flag("--a", lambda: VarSpec.model_validate(args.a)))
        if target == "h":
            return symfunc.complete_homogeneous(args.degree, a)
        if target == "e":
            return symfunc.elementary(args.degree, a)
        lam = _flag("--lam", lambda: _partition(args.lam))
        if target == "skew":
            return symfunc.skew_schur(lam, _flag("--rho", lambda: _partition(args.rho)), a)
        q = _flag("--q", lambda: parse_scalar(args.q))
        if target == "P":
            return symfunc.qwhittaker_P(lam, a, q)
        return symfunc.qwhittaker_Q(lam, a, q)
    if target in ("qpoch", "theta"):
        x = _flag("--x", lambda: parse_scalar(args.x))
        q = _flag("--q", lambda: parse_scalar(args.q))
        if target == "theta":
            return qseries.theta(float(x), float(q))
        if args.degree is None:
            return qseries.qpoch_inf(float(x), float(q))
        return qseries.qpoch_n(x, q, args.degree)

    p = build_params(args)
    if target == "K":
        return fredholm.kernel_K_ell(args.m1, args.m2, args.ell, p, args.quad_nodes)
    if target == "L":
        inner, outer = fredholm.contour_pair_L(p, args.quad_nodes, args.radius_inner, args.radius_outer)
        return fredholm.kernel_L(args.m1, args.m2, p, inner, outer)
    if target == "A":
        return fredholm.matrix_A(args.m1, args.r, p, args.quad_nodes)
    if target == "B":
        return fredholm.matrix_B(args.r, args.m2, p)
    matrix = fredholm.w_matrix(args.ell, p, args.quad_nodes)
    return np.linalg.det(matrix)


def cmd_eval(args: argparse.Namespace) -> int:
    config = build_config(args, with_params=False)
    result = _render(evaluate_target(args))
    arguments = {
        key: str(value)
        for key, value in sorted(vars(args).items())
        if value is not None and key not in ("func", "command", "target", "out", "format", "log_level")
    }
    result = result.model_copy(update={"target": args.target, "arguments": arguments})
    ReportStorage(config.out).write(result, config.format.value)
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", default="3/10,7/25", help="a_1,...,a_N; p/q strings stay exact")
    common.add_argument("--b", default="1/4,1/5", help="b_1,...,b_M")
    common.add_argument("--q", default="3/20", help="Base q in (0, 1)")
    common.add_argument("--t", default="1", help="Shift parameter t > 0")
    common.add_argument("--k", "-n", dest="k", type=int, default=0, help="Threshold k of the Fermi factor")
    common.add_argument("--order", type=int, default=8, help="Series order for exact checks")
    common.add_argument("--cutoff", type=int, default=16, help="Weight cutoff for brute-force sums")
    common.add_argument("--tol", type=float, default=1e-6, help="Pass/fail tolerance")
    common.add_argument("--n-min", dest="n_min", type=int, default=0)
    common.add_argument("--n-max", dest="n_max", type=int, default=3)
    common.add_argument("--window", help="Determinant window as lo,hi")
    common.add_argument("--quad-nodes", dest="quad_nodes", type=int, default=256)
    common.add_argument("--ell-max", dest="ell_max", type=int, default=3)
    common.add_argument("--radius-inner", dest="radius_inner", type=float, help="r' of the L contours")
    common.add_argument("--radius-outer", dest="radius_outer", type=float, help="r of the L contours")
    common.add_argument("--eps", type=float, help="Conjugator exponent epsilon")
    common.add_argument("--omega", type=float, help="Conjugator exponent omega")
    common.add_argument("--out", help="Report path (written atomically); stdout when absent")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--log-level", dest="log_level", help="Overrides QCAUCHY_LOG_LEVEL")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="qcauchy", description="Restricted Cauchy identities and Fredholm determinants")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify-identity", parents=[common], help="Exact check of the restricted Cauchy identity")
    verify.set_defaults(func=cmd_verify_identity)

    compare = sub.add_parser("compare-distributions", parents=[common], help="Tabulate the equal-in-law quantities")
    compare.set_defaults(func=cmd_compare_distributions)

    det = sub.add_parser("fredholm", parents=[common], help="det(1 - fK) = det(1 + fL) by every route")
    det.set_defaults(func=cmd_fredholm)

    ev = sub.add_parser("eval", parents=[common], help="Evaluate one polynomial, q-function or kernel entry")
    ev.add_argument("target", choices=EVAL_TARGETS)
    ev.add_argument("--lam", help="Partition as 2,1")
    ev.add_argument("--rho", help="Inner partition of a skew shape")
    ev.add_argument("--degree", type=int, help="k of h_k / e_k, or n of (x;q)_n")
    ev.add_argument("--x", help="Argument of qpoch / theta")
    ev.add_argument("--m1", type=int, default=0)
    ev.add_argument("--m2", type=int, default=0)
    ev.add_argument("--r", type=int, default=1, help="Pole index of A / B")
    ev.add_argument("--ell", type=int, default=0, help="ell of K_ell / W")
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = get_settings()
        level = args.log_level.upper() if args.log_level else settings.log_level
    except ValidationError as e:
        print(f"qcauchy: invalid environment: {e}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args)
    except (ConfigError, ParameterError) as e:
        logger.error(f"{args.command} rejected its input: {e}")
        print(f"qcauchy {args.command}: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as e:
        logger.error(f"{args.command} did not converge: {e}")
        print(f"qcauchy {args.command}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
