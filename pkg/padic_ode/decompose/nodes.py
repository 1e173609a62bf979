"""
Pipeline nodes for main_theorem_check
Each node reads the state, appends a StepRecord and returns the state. Library errors are
recorded against the step and mark the run as failed so the router sends it to the verdict.
"""

import logging
from fractions import Fraction
from typing import Any, Dict

from padic_ode.decompose.boundary import bounded_sections, disc_character, finite_zeroes
from padic_ode.decompose.key_lemma import full_split_with_retries, line_character, line_radii
from padic_ode.decompose.state import StepRecord, TheoremState
from padic_ode.diffmod import classify_solution_space, solve_horizontal, subsidiary_radii_at
from padic_ode.errors import PadicError, PreconditionError, WindowInsufficientError
from padic_ode.padic_core import format_rational
from padic_ode.series import RingDomain

logger = logging.getLogger(__name__)


def _record(state: TheoremState, step: str, status: str, detail: Dict[str, Any],
            error: PadicError = None) -> None:
    record: StepRecord = {"step": step, "status": status, "detail": detail}
    if error is not None:
        record["error"] = error.code
        record["detail"] = {**detail, **error.as_dict()}
        state["failed"] = True
        logger.error(f"❌ {step}: {error.message}")
    else:
        logger.info(f"✅ {step}: {status}")
    state.setdefault("steps", []).append(record)


def solve(state: TheoremState) -> TheoremState:
    """Formal horizontal solutions over the disc"""
    settings = state["settings"]
    try:
        M = state["module"]
        if M.rank != 2:
            raise PreconditionError(f"main_theorem_check needs rank 2, got {M.rank}")
        state["solutions"] = solve_horizontal(M, settings.terms)
        _record(state, "solve", "ok", {"formal_dimension": len(state["solutions"]),
                                      "order": settings.terms - 1})
    except PadicError as e:
        _record(state, "solve", "failed", {}, e)
    return state


def classify(state: TheoremState) -> TheoremState:
    """m' = number of formal solutions converging on the open unit disc"""
    if state.get("failed"):
        return state
    try:
        report = classify_solution_space(state["module"], state["solutions"])
        state["solution_report"] = report
        state["m_prime"] = report.convergent_dimension
        _record(state, "classify", "ok", {"m_prime": report.convergent_dimension,
                                         "solutions": report.as_dict()["solutions"]})
    except PadicError as e:
        _record(state, "classify", "failed", {}, e)
    return state


def trivial(state: TheoremState) -> TheoremState:
    """m' = 0: there is nothing to prove"""
    _record(state, "trivial", "ok", {"m_prime": 0})
    return state


def dwork(state: TheoremState) -> TheoremState:
    """m' = rank: every solution must have log-growth at most 1"""
    report = state["solution_report"]
    orders = [s.log_growth.order if s.log_growth else None for s in report.convergent_reports]
    detail = {"orders": [format_rational(o) if o is not None else "unknown" for o in orders]}
    if all(o is not None and o <= 1 for o in orders):
        _record(state, "dwork", "ok", detail)
    else:
        _record(state, "dwork", "failed", detail,
                PreconditionError("a convergent solution has log-growth above 1"))
    return state


def separation(state: TheoremState) -> TheoremState:
    """f_1(M, 0) > f_2(M, 0) at the generic point of the annulus"""
    settings = state["settings"]
    try:
        M = state["module"].on_domain(RingDomain.annulus(Fraction(settings.alpha)))
        radii = subsidiary_radii_at(M, 0, attempts=settings.cyclic_attempts, seed=settings.seed,
                                    terms=settings.terms)
        state["radii"] = radii
        values = radii.values() if radii.is_exact else None
        if values is None or not values[0] > values[1]:
            raise PreconditionError("radii are not separated at the generic point",
                                    radii=radii.as_dict())
        _record(state, "separation", "ok", {"radii": [format_rational(v) for v in values]})
    except PadicError as e:
        _record(state, "separation", "failed", {}, e)
    return state


def split(state: TheoremState) -> TheoremState:
    """M = M' (+) M'' over an annulus close enough to |t| = 1"""
    settings = state["settings"]
    try:
        result = full_split_with_retries(state["module"], 1, settings)
        state["split"] = result
        state["alpha_used"] = format_rational(result.alpha)
        _record(state, "split", "ok", result.as_dict())
    except PadicError as e:
        _record(state, "split", "failed", {}, e)
    return state


def small_radius_check(state: TheoremState) -> TheoremState:
    """
    Desk check that M' has no solutions bounded toward the boundary: its radius at the
    generic point is below 1, and the remaining rank matches m'.
    """
    settings = state["settings"]
    try:
        result = state["split"]
        annulus = state["module"].on_domain(RingDomain.annulus(result.alpha))
        entry = line_radii(annulus, result.prime[0], 0, settings.terms).entries[0]
        detail = {"minus_log_radius": [format_rational(entry[0]), format_rational(entry[1])],
                  "rank_double_prime": result.double_prime.rank, "m_prime": state["m_prime"]}
        if entry[0] <= 0:
            raise PreconditionError("M' has radius 1 at the generic point")
        if result.double_prime.rank != state["m_prime"]:
            raise PreconditionError("rank of M'' differs from the number of convergent solutions")
        _record(state, "small_radius_check", "ok", detail)
    except PadicError as e:
        _record(state, "small_radius_check", "failed", {}, e)
    return state


def bounded(state: TheoremState) -> TheoremState:
    """The convergent solution is bounded: log-growth 0 = m' - 1"""
    report = state["solution_report"]
    orders = [s.log_growth.order if s.log_growth else None for s in report.convergent_reports]
    detail = {"orders": [format_rational(o) if o is not None else "unknown" for o in orders]}
    if orders and all(o == 0 for o in orders):
        _record(state, "bounded", "ok", detail)
    else:
        _record(state, "bounded", "failed", detail,
                PreconditionError("the convergent solution is not bounded on the window"))
    return state


def no_bounded_sections(state: TheoremState) -> TheoremState:
    """
    The line M' has no formal solution bounded toward |t| = 1, solved over the disc from its
    character. Skipped when the character has a non-negligible principal part or too short a window.
    """
    settings = state["settings"]
    try:
        result = state["split"]
        annulus = state["module"].on_domain(RingDomain.annulus(result.alpha))
        g = line_character(annulus, result.prime[0], settings.terms)
        g_disc = disc_character(g, g.prec // 4)
        if g_disc is None:
            _record(state, "no_bounded_sections", "skipped",
                    {"reason": "character of M' has a principal part"})
            return state
        report = bounded_sections(g_disc, settings)
        if not report.holds:
            raise PreconditionError("M' has a bounded formal solution", **report.as_dict())
        _record(state, "no_bounded_sections", "ok", report.as_dict())
    except WindowInsufficientError as e:
        _record(state, "no_bounded_sections", "skipped", {"reason": e.message})
    except PadicError as e:
        _record(state, "no_bounded_sections", "failed", {}, e)
    return state


def finite_zeroes_check(state: TheoremState) -> TheoremState:
    """The convergent solutions have finitely many zeroes on the annulus of the split"""
    report = state["solution_report"]
    alpha = state["split"].alpha if state.get("split") else Fraction(state["settings"].alpha)
    try:
        detail = finite_zeroes(report.convergent_vectors, RingDomain.annulus(alpha))
        if not detail["holds"]:
            raise PreconditionError("a convergent solution has infinitely many zeroes on the annulus",
                                    **detail)
        _record(state, "finite_zeroes", "ok", detail)
    except WindowInsufficientError as e:
        _record(state, "finite_zeroes", "skipped", {"reason": e.message})
    except PadicError as e:
        _record(state, "finite_zeroes", "failed", {}, e)
    return state


def verdict(state: TheoremState) -> TheoremState:
    if state.get("failed"):
        state["verdict"] = "incomplete"
    elif state.get("m_prime") == 0:
        state["verdict"] = "trivial"
    elif state.get("m_prime") == 2:
        state["verdict"] = "dwork"
    else:
        state["verdict"] = "verified"
    logger.info(f"main_theorem_check verdict: {state['verdict']}")
    return state


# === Routers ===

def route_after_classify(state: TheoremState) -> str:
    if state.get("failed"):
        return "verdict"
    m_prime = state.get("m_prime")
    if m_prime == 0:
        return "trivial"
    if m_prime == 2:
        return "dwork"
    return "separation"


def route_on_failure(next_step: str):
    """Router continuing to next_step unless a step failed"""

    def router(state: TheoremState) -> str:
        return "verdict" if state.get("failed") else next_step

    return router
