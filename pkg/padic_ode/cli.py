"""
Command-line front end
Every command prints (or writes to --out) a report {"command", "status", "data"}; exit codes are
0 on success, 1 for malformed input, 2 for precondition failures, 3 when windows or precision run out,
4 for unexpected internal errors.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from padic_ode.config import Settings, get_settings
from padic_ode.decompose import full_split_with_retries, main_theorem_check
from padic_ode.diffmod import (
    DiffModule,
    classify_solution_space,
    from_operator,
    radii_profile,
    solve_horizontal,
    subsidiary_radii_at,
)
from padic_ode.errors import InputFormatError, InternalError, PadicError
from padic_ode.example_rank2 import full_report
from padic_ode.models import (
    ReportDoc,
    SeriesFileDoc,
    load_module,
    load_operator,
    read_json,
    series_from_doc,
    validate,
)
from padic_ode.models.codec import ring_from_doc
from padic_ode.padic_core import format_rational, parse_rational
from padic_ode.twisted import hensel_factor, newton_polygon_twisted

logger = logging.getLogger(__name__)


def parse_grid(text: str) -> List[Fraction]:
    """'lo:hi:n' (n evenly spaced points) or a comma list of rationals"""
    try:
        if ":" in text:
            lo_raw, hi_raw, n_raw = text.split(":")
            lo, hi, n = Fraction(lo_raw), Fraction(hi_raw), int(n_raw)
            if n < 2:
                return [lo]
            return [lo + (hi - lo) * k / (n - 1) for k in range(n)]
        return [Fraction(part) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputFormatError(f"malformed grid {text!r}", location="--grid")


def _rational_arg(text: str) -> Fraction:
    value = parse_rational(text)
    if not isinstance(value, Fraction):
        raise InputFormatError(f"expected a finite rational, got {text!r}")
    return value


def _load_module(args: argparse.Namespace) -> DiffModule:
    if args.module:
        return load_module(read_json(args.module))
    if args.op:
        return from_operator(load_operator(read_json(args.op)))
    raise InputFormatError("one of --op or --module is required")


def _multiset(radii) -> Dict[str, int]:
    return {format_rational(v): k for v, k in sorted(radii.multiset().items(), reverse=True)}


# === Commands ===

def cmd_radii(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    M = _load_module(args)
    if args.grid:
        profile = radii_profile(M, parse_grid(args.grid), settings.cyclic_attempts, settings.seed,
                                settings.terms)
        return {"profile": profile.as_dict(),
                "breakpoints": {f"f_{i + 1}": [format_rational(r) for r in profile.breakpoints(i)]
                                for i in range(M.rank)} if all(r.is_exact for r in profile.rows) else {}}
    radii = subsidiary_radii_at(M, _rational_arg(args.point), attempts=settings.cyclic_attempts,
                                seed=settings.seed, terms=settings.terms)
    data = radii.as_dict()
    if radii.is_exact:
        data["radii"] = _multiset(radii)
    return data


def cmd_newton(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    R = load_operator(read_json(args.op))
    return newton_polygon_twisted(R, _rational_arg(args.point)).as_dict()


def cmd_factor(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    R = load_operator(read_json(args.op))
    r = _rational_arg(args.r) if args.r else None
    points = [_rational_arg(args.point)] if args.point else None
    return hensel_factor(R, args.index, r=r, points=points, variant=args.variant,
                         terms=settings.terms).as_dict()


def cmd_decompose(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    M = _load_module(args)
    if args.theorem:
        return main_theorem_check(M, settings)
    return full_split_with_retries(M, args.index, settings).as_dict()


def cmd_solve(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    M = _load_module(args)
    solutions = solve_horizontal(M, settings.terms)
    return classify_solution_space(M, solutions).as_dict()


def cmd_loggrowth(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    doc = validate(SeriesFileDoc, read_json(args.series))
    f = series_from_doc(doc.series, doc.p, ring_from_doc(doc.ring), doc.prec)
    deltas = [_rational_arg(d) for d in args.deltas.split(",")]
    lo, hi = f.radius_of_convergence_estimate()
    return {"radius_bracket": [format_rational(lo), format_rational(hi)],
            "log_growth": f.log_growth_classify(deltas).as_dict()}


def cmd_verify_example(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    return full_report(settings.prime, settings)


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], Dict[str, Any]]] = {
    "radii": cmd_radii,
    "newton": cmd_newton,
    "factor": cmd_factor,
    "decompose": cmd_decompose,
    "solve": cmd_solve,
    "loggrowth": cmd_loggrowth,
    "verify-example": cmd_verify_example,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padic-ode",
                                     description="p-adic differential operators: radii, factors, decompositions")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="prime (default PADIC_PRIME)")
    common.add_argument("--prec", type=int, default=None, help="relative p-adic precision")
    common.add_argument("--terms", type=int, default=None, help="series window length")
    common.add_argument("--alpha", type=str, default=None, help="-log_p of the inner radius, num/den")
    common.add_argument("--seed", type=int, default=None, help="cyclic-vector search seed")
    common.add_argument("--log-level", type=str, default=None)
    common.add_argument("--out", type=str, default=None, help="write the report here instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True)

    radii = sub.add_parser("radii", parents=[common], help="subsidiary radii at a point or on a grid")
    radii.add_argument("--op")
    radii.add_argument("--module")
    radii.add_argument("--point", default="0")
    radii.add_argument("--grid", help="'lo:hi:n' or a comma list")

    newton = sub.add_parser("newton", parents=[common], help="Newton polygon of an operator")
    newton.add_argument("--op", required=True)
    newton.add_argument("--point", default="0")

    factor = sub.add_parser("factor", parents=[common], help="Hensel factorization at slope index i")
    factor.add_argument("--op", required=True)
    factor.add_argument("--index", type=int, required=True)
    factor.add_argument("--r", default=None)
    factor.add_argument("--point", default=None)
    factor.add_argument("--variant", choices=["PQ", "QP"], default="PQ")

    decompose = sub.add_parser("decompose", parents=[common], help="split off the large-radius part")
    decompose.add_argument("--op")
    decompose.add_argument("--module")
    decompose.add_argument("--index", type=int, default=1)
    decompose.add_argument("--theorem", action="store_true", help="run the rank-two pipeline instead")

    solve = sub.add_parser("solve", parents=[common], help="formal horizontal solutions over the disc")
    solve.add_argument("--op")
    solve.add_argument("--module")

    loggrowth = sub.add_parser("loggrowth", parents=[common], help="log-growth order of a series")
    loggrowth.add_argument("--series", required=True)
    loggrowth.add_argument("--deltas", default="1,2,3")

    sub.add_parser("verify-example", parents=[common], help="all checks of the rank-two example")
    return parser


def _settings_from(args: argparse.Namespace) -> Settings:
    alpha = _rational_arg(args.alpha) if args.alpha else None
    return get_settings().with_overrides(prime=args.p, prec=args.prec, terms=args.terms, alpha=alpha,
                                         seed=args.seed, log_level=args.log_level)


def _emit(report: ReportDoc, out: Optional[str]) -> None:
    text = json.dumps(report.model_dump(), indent=2, sort_keys=True, default=str) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and emit its report; returns the exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings_from(args)
        if args.log_level:
            logging.getLogger().setLevel(settings.log_level.upper())
        logger.info(f"padic-ode {args.command}: p={settings.prime} prec={settings.prec} "
                    f"terms={settings.terms}")
        data = COMMANDS[args.command](args, settings)
        status = "ok"
        if args.command == "verify-example" and data.get("status") != "ok":
            status = "error"
        report = ReportDoc(command=args.command, status=status, data=data)
        code = 0 if status == "ok" else 3
    except PadicError as e:
        logger.error(f"❌ {args.command} failed: {e.message}")
        report = ReportDoc(command=args.command, status="error", data=e.as_dict())
        code = e.exit_code
    except Exception as e:
        logger.exception(f"❌ {args.command} crashed: {e}")
        error = InternalError(f"{type(e).__name__}: {e}")
        report = ReportDoc(command=args.command, status="error", data=error.as_dict())
        code = error.exit_code
    _emit(report, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
