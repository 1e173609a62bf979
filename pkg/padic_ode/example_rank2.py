"""
The rank-two example: R = T^2 + tT + 1 over the bounded disc
Series a, b, c with a' + ta + 1 = 0, b' + tb = 0, c' + tc = 1; the module M = K{T}/K{T}R, its dual,
and the decomposition M = (T + t) (+) (aT - a') over annuli close to |t| = 1.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional

import gmpy2

from padic_ode.config import Settings, get_settings
from padic_ode.decompose.indecomposable import indecomposability_check, is_direct_sum_basis
from padic_ode.decompose.key_lemma import full_split
from padic_ode.diffmod import (
    DiffModule,
    classify_solution_space,
    from_operator,
    operator_radii,
    radii_profile,
    solve_horizontal,
    subsidiary_radii_at,
)
from padic_ode.errors import PadicError, PreconditionError
from padic_ode.frobenius import check_phi_compatibility, pushforward
from padic_ode.padic_core import format_rational
from padic_ode.series import RingDomain, TruncatedSeries
from padic_ode.twisted import DerivationContext, TwistedPoly, tmul
from padic_ode.utils import linalg

logger = logging.getLogger(__name__)


def _check_odd(p: int) -> None:
    if p == 2:
        raise PreconditionError("the rank-two example needs an odd prime")


def default_alpha(p: int) -> Fraction:
    return Fraction(1, 4 * (p - 1))


def check_alpha(p: int, alpha) -> Fraction:
    """a is bounded on |t| >= p^(-alpha) only for 0 < alpha < 1/(2(p-1))"""
    alpha = Fraction(alpha)
    if not 0 < alpha < Fraction(1, 2 * (p - 1)):
        raise PreconditionError(
            f"alpha = {format_rational(alpha)} is outside (0, {format_rational(Fraction(1, 2 * (p - 1)))})",
            alpha=format_rational(alpha),
        )
    return alpha


# === Series ===

def _odd_double_factorial(i: int) -> int:
    """(2i-1)!! with (-1)!! = 1"""
    return 1 if i == 0 else int(gmpy2.double_fac(2 * i - 1))


def build_series_a(p: int, n_terms: int = 200, prec: int = 60, alpha=None) -> TruncatedSeries:
    """a = -sum_(i>=0) (2i-1)!! t^(-2i-1) on the annulus of log-radius alpha"""
    _check_odd(p)
    alpha = check_alpha(p, default_alpha(p) if alpha is None else alpha)
    values = {}
    for i in range(n_terms):
        values[-(2 * i + 1)] = -_odd_double_factorial(i)
    return TruncatedSeries.from_fractions(p, RingDomain.annulus(alpha), values, prec,
                                          lo=-(2 * n_terms - 1))


def build_series_b(p: int, n_terms: int = 200, prec: int = 60,
                   domain: Optional[RingDomain] = None) -> TruncatedSeries:
    """b = exp(-t^2/2)"""
    _check_odd(p)
    values = {2 * i: Fraction((-1) ** i, 2 ** i * int(gmpy2.fac(i))) for i in range((n_terms + 1) // 2)}
    return TruncatedSeries.from_fractions(p, domain or RingDomain.disc(), values, prec, hi=n_terms - 1)


def build_series_c(p: int, n_terms: int = 200, prec: int = 60,
                   domain: Optional[RingDomain] = None) -> TruncatedSeries:
    """c = sum_(i>=0) (-1)^i t^(2i+1) / (2i+1)!!"""
    _check_odd(p)
    values = {2 * i + 1: Fraction((-1) ** i, _odd_double_factorial(i + 1)) for i in range(n_terms // 2)}
    return TruncatedSeries.from_fractions(p, domain or RingDomain.disc(), values, prec, hi=n_terms - 1)


def exp_half_square(p: int, n_terms: int = 200, prec: int = 60) -> TruncatedSeries:
    """exp(t^2/2)"""
    values = {2 * i: Fraction(1, 2 ** i * int(gmpy2.fac(i))) for i in range((n_terms + 1) // 2)}
    return TruncatedSeries.from_fractions(p, RingDomain.disc(), values, prec, hi=n_terms - 1)


# === Operators and modules ===

def _t(p: int, domain: RingDomain, prec: int) -> TruncatedSeries:
    return TruncatedSeries.monomial(p, domain, 1, 1, prec)


def example_operator(p: int, prec: int = 60, domain: Optional[RingDomain] = None) -> TwistedPoly:
    """T^2 + tT + 1"""
    domain = domain or RingDomain.disc()
    one = TruncatedSeries.one(p, domain, prec)
    return TwistedPoly(DerivationContext(), (one, _t(p, domain, prec), one))


def dual_operator(p: int, prec: int = 60, domain: Optional[RingDomain] = None) -> TwistedPoly:
    """T^2 - tT + 1, the operator of M^dual for the cyclic vector e_1^dual"""
    domain = domain or RingDomain.disc()
    one = TruncatedSeries.one(p, domain, prec)
    return TwistedPoly(DerivationContext(), (one, -_t(p, domain, prec), one))


def example_module(p: int, prec: int = 60, domain: Optional[RingDomain] = None) -> DiffModule:
    """Basis 1, T of K{T}/K{T}R: D(e_1) = e_2, D(e_2) = -e_1 - t e_2"""
    return from_operator(example_operator(p, prec, domain))


def dual_module(p: int, prec: int = 60, domain: Optional[RingDomain] = None) -> DiffModule:
    return example_module(p, prec, domain).dual()


def log_module(p: int, n_terms: int = 200, prec: int = 60) -> DiffModule:
    """D(e_1) = (1+t)^(-1) e_2, D(e_2) = 0; solutions (1, -log(1+t)) and (0, 1)"""
    disc = RingDomain.disc()
    inv = TruncatedSeries.from_function(p, disc, lambda e: (-1) ** e, range(n_terms + 1), prec,
                                        hi=n_terms)
    zero = TruncatedSeries.zero(p, disc, prec)
    return DiffModule.from_matrix([[zero, zero], [inv, zero]])


def split_basis(p: int, n_terms: int = 200, prec: int = 60, alpha=None) -> List[List[TruncatedSeries]]:
    """Columns T + t = (t, 1) and aT - a' = (-a', a) in the basis 1, T"""
    a = build_series_a(p, n_terms, prec, alpha)
    domain = a.domain
    one = TruncatedSeries.one(p, domain, prec)
    return [[_t(p, domain, prec), one], [-a.derive(), a]]


# === Verification ===

def _residual(f: TruncatedSeries, min_val: int) -> Dict[str, Any]:
    bad = sorted(e for e, c in f.coeffs.items() if c.val < min_val)
    return {"holds": not bad, "first_nonzero_exponent": bad[0] if bad else None,
            "window": [str(w) for w in f.window]}


def verify_identities(p: int, n_terms: int = 200, prec: int = 60) -> Dict[str, Dict[str, Any]]:
    """Every represented coefficient of each identity vanishes to precision prec - 5"""
    a = build_series_a(p, n_terms, prec)
    b = build_series_b(p, n_terms, prec)
    c = build_series_c(p, n_terms, prec)
    disc, annulus = RingDomain.disc(), a.domain
    t_disc, t_ann = _t(p, disc, prec), _t(p, annulus, prec)
    floor = prec - 5
    a1, b1, c1 = a.derive(), b.derive(), c.derive()
    report = {
        "a' + ta + 1": _residual(a1 + t_ann * a + 1, floor),
        "a'' + ta' + a": _residual(a1.derive() + t_ann * a1 + a, floor),
        "b' + tb": _residual(b1 + t_disc * b, floor),
        "c' + tc - 1": _residual(c1 + t_disc * c - 1, floor),
        "b'' + tb' + b": _residual(b1.derive() + t_disc * b1 + b, floor),
        "c'' + tc' + c": _residual(c1.derive() + t_disc * c1 + c, floor),
    }
    R = example_operator(p, prec, annulus)
    left = R.left_scale(a)
    one = TruncatedSeries.one(p, annulus, prec)
    right = tmul(TwistedPoly(R.ctx, (t_ann, one)), TwistedPoly(R.ctx, (-a1, a)))
    difference = left - right
    report["a(T^2 + tT + 1) - (T + t)(aT - a')"] = {
        "holds": difference.is_zero_on_window(floor),
        "first_nonzero_exponent": None,
        "window": [str(w) for w in a.window],
    }
    for name, entry in report.items():
        logger.info(f"{'✅' if entry['holds'] else '❌'} {name}")
    return report


def verify_decomposition(p: int, alpha=None, n_terms: int = 200, prec: int = 60) -> Dict[str, Any]:
    """
    On the annulus: det of the basis {T + t, aT - a'} is -1, D(T + t) = 0 and
    D(aT - a') = -t (aT - a'), so D is diag(0, -t) in the new basis.
    """
    alpha = check_alpha(p, default_alpha(p) if alpha is None else alpha)
    annulus = RingDomain.annulus(alpha)
    M = example_module(p, prec, annulus)
    u1, u2 = split_basis(p, n_terms, prec, alpha)
    B = linalg.columns_to_matrix([u1, u2])
    floor = prec - 5
    det = linalg.det(B)
    det_ok = (det + 1).is_zero_on_window(floor)
    # B^(-1) = -adj(B) once det = -1
    adj = linalg.adjugate(B)
    columns = [[-x for x in linalg.mat_vec(adj, M.apply_D(u))] for u in (u1, u2)]
    t = _t(p, annulus, prec)
    expected = [[None, None], [None, -t]]
    entries_ok = True
    for j, col in enumerate(columns):
        for i, entry in enumerate(col):
            target = expected[i][j]
            residual = entry if target is None else entry - target
            entries_ok = entries_ok and residual.is_zero_on_window(floor)
    report = {
        "alpha": format_rational(alpha),
        "determinant_is_minus_one": det_ok,
        "determinant_is_unit": is_direct_sum_basis([u1, u2]),
        "D_is_diag_0_minus_t": entries_ok,
        "D(T + t) = 0": all(x.is_zero_on_window(floor) for x in M.apply_D(u1)),
    }
    logger.info(f"verify_decomposition on alpha {format_rational(alpha)}: {report}")
    return report


def _contains(bracket, value: Fraction) -> bool:
    lo, hi = bracket
    return lo <= value <= hi


def verify_radii(p: int, prec: int = 60, alpha=None, terms: int = 200) -> Dict[str, Any]:
    """Radii at the generic point of |t| = 1 are {1/(p-1), 0} for R and for the dual operator"""
    alpha = check_alpha(p, default_alpha(p) if alpha is None else alpha)
    annulus = RingDomain.annulus(alpha)
    expected = [Fraction(1, p - 1), Fraction(0)]
    out = {}
    for name, R in (("operator", example_operator(p, prec, annulus)),
                    ("dual_operator", dual_operator(p, prec, annulus))):
        entries = operator_radii(R, 0, terms)
        values = sorted((lo for lo, hi in entries if lo == hi), reverse=True)
        out[name] = {
            "radii": [[format_rational(lo), format_rational(hi)] for lo, hi in entries],
            "holds": len(values) == 2 and values == expected,
        }
    return out


def verify_solutions(p: int, n_terms: int = 200, prec: int = 60) -> Dict[str, Any]:
    """M has the bounded solution (t, 1); M^dual has none converging on the unit disc"""
    target = Fraction(1, 2 * (p - 1))
    out: Dict[str, Any] = {}
    M = example_module(p, prec)
    sols = solve_horizontal(M, n_terms)
    report = classify_solution_space(M, sols)
    out["module"] = {"report": report.as_dict(), "holds": report.convergent_dimension == 1}
    Md = dual_module(p, prec)
    dual_sols = solve_horizontal(Md, n_terms)
    dual_report = classify_solution_space(Md, dual_sols)
    contains = all(_contains(b, target) for s in dual_report.solutions for b in s.radius_brackets)
    out["dual"] = {"report": dual_report.as_dict(),
                   "holds": dual_report.convergent_dimension == 0 and contains}
    radii = {}
    for name, f in (("b", build_series_b(p, n_terms, prec)), ("c", build_series_c(p, n_terms, prec)),
                    ("exp(t^2/2)", exp_half_square(p, n_terms, prec))):
        bracket = f.radius_of_convergence_estimate()
        radii[name] = {"bracket": [format_rational(x) for x in bracket],
                       "contains_half_omega": _contains(bracket, target)}
    out["series_radii"] = radii
    return out


def verify_frobenius(p: int, prec: int = 60, alpha=None) -> Dict[str, Any]:
    """
    Radii of pushed rank-one modules against phi_multiset: the trivial module (radius {0}) and
    V_(-t), whose radius at the generic point sits on the small-radius side.
    """
    alpha = check_alpha(p, default_alpha(p) if alpha is None else alpha)
    annulus = RingDomain.annulus(alpha)
    out: Dict[str, Any] = {}
    for name, g in (("trivial", TruncatedSeries.zero(p, annulus, prec)),
                    ("small_radius", -_t(p, annulus, prec))):
        V = DiffModule.rank_one(g)
        base = subsidiary_radii_at(V, 0)
        observed = subsidiary_radii_at(pushforward(V).module, 0)
        out[name] = check_phi_compatibility(base, observed, p)
    out["match"] = all(entry["match"] for entry in out.values())
    return out


def _proportional_to(w: List[TruncatedSeries], u: List[TruncatedSeries], min_val: int) -> bool:
    """The 2x2 minor of w and u vanishes to min_val digits beyond the products' valuation"""
    left, right = w[0] * u[1], w[1] * u[0]
    scale = min(left.min_valuation(), right.min_valuation())
    return (left - right).is_zero_on_window(scale + min_val)


def verify_split(p: int, alpha=None, settings: Optional[Settings] = None) -> Dict[str, Any]:
    """
    full_split of M over the annulus: ranks 1 + 1, unit determinant, M' along aT - a' and
    M'' along T + t.
    """
    settings = settings or get_settings()
    alpha = check_alpha(p, default_alpha(p) if alpha is None else alpha)
    prec = settings.prec
    result = full_split(example_module(p, prec, RingDomain.annulus(alpha)), 1, settings)
    report = result.as_dict()
    small, large = split_basis(p, settings.terms, prec, alpha)[::-1]
    lines = {}
    for name, vectors, target in (("prime", result.prime, small),
                                  ("double_prime", result.double_prime.vectors, large)):
        try:
            lines[name] = len(vectors) == 1 and _proportional_to(vectors[0], target, prec - 10)
        except PadicError as e:
            logger.warning(f"proportionality of {name} not decided: {e.message}")
            lines[name] = None
    report["proportional"] = lines
    report["holds"] = (report["rank_prime"] == 1 and report["rank_double_prime"] == 1
                       and result.determinant_unit)
    logger.info(f"verify_split on alpha {format_rational(alpha)}: route "
                f"{result.double_prime.route}, proportional {lines}")
    return report


def profile_breakpoints(p: int, prec: int = 60, alpha=None, points: int = 16) -> Dict[str, Any]:
    """f_1, f_2 on a rational grid of [0, alpha]; each is affine away from at most two breakpoints"""
    alpha = check_alpha(p, default_alpha(p) if alpha is None else alpha)
    M = example_module(p, prec, RingDomain.annulus(alpha))
    grid = [alpha * k / (points - 1) for k in range(points)]
    profile = radii_profile(M, grid)
    breaks = {f"f_{i + 1}": [format_rational(r) for r in profile.breakpoints(i)] for i in range(2)}
    return {"profile": profile.as_dict(), "breakpoints": breaks,
            "holds": all(len(b) <= 2 for b in breaks.values())}


def full_report(p: int, settings: Optional[Settings] = None) -> Dict[str, Any]:
    """Every check of the example; status "ok" when all of them hold"""
    settings = settings or get_settings()
    n, prec = settings.terms, settings.prec
    alpha = settings.alpha if 0 < settings.alpha < Fraction(1, 2 * (p - 1)) else default_alpha(p)
    report: Dict[str, Any] = {"p": p, "prec": prec, "terms": n}
    report["identities"] = verify_identities(p, n, prec)
    report["decomposition"] = verify_decomposition(p, alpha, n, prec)
    report["radii"] = verify_radii(p, prec, alpha, settings.terms)
    report["solutions"] = verify_solutions(p, n, prec)
    report["indecomposable"] = indecomposability_check(example_module(p, prec), n_terms=n)
    checks = [
        all(e["holds"] for e in report["identities"].values()),
        all(v for k, v in report["decomposition"].items() if k != "alpha"),
        all(e["holds"] for e in report["radii"].values()),
        report["solutions"]["module"]["holds"],
        report["solutions"]["dual"]["holds"],
        report["indecomposable"],
    ]
    for name, fn in (("frobenius", lambda: verify_frobenius(p, prec, alpha)),
                     ("split", lambda: verify_split(p, alpha, settings)),
                     ("profile", lambda: profile_breakpoints(p, prec, alpha))):
        try:
            report[name] = fn()
            checks.append(report[name].get("match", report[name].get("holds", False)))
        except PadicError as e:
            report[name] = e.as_dict()
            checks.append(False)
    report["status"] = "ok" if all(checks) else "failed"
    return report
