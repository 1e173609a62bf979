"""
Boundary checks on rank-one pieces
bounded_sections: a line of radius below 1 at the generic point has no formal solution bounded
toward |t| = 1. finite_zeroes: convergent solutions restricted to the annulus have finitely
many zeroes there.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from padic_ode.config import Settings, get_settings
from padic_ode.diffmod import (
    DiffModule,
    _rank_one_entry,
    classify_solution_space,
    solve_horizontal,
    spectral_norm_bound,
)
from padic_ode.errors import PreconditionError
from padic_ode.padic_core import format_rational
from padic_ode.series import RingDomain, TruncatedSeries
from padic_ode.utils.linalg import Vector

logger = logging.getLogger(__name__)


def disc_character(g: TruncatedSeries, tol: int) -> Optional[TruncatedSeries]:
    """g as a disc series when its negative-exponent part has valuation >= tol, else None"""
    if any(e < 0 and c.val < tol for e, c in g.coeffs.items()):
        return None
    coeffs = {e: c for e, c in g.coeffs.items() if e >= 0}
    return TruncatedSeries(g.p, RingDomain.disc(), coeffs, None, g.hi, g.prec)


@dataclass
class BoundaryReport:
    minus_log_radius: Tuple[Fraction, Fraction]
    formal_dimension: int
    bounded: int
    order: int

    @property
    def holds(self) -> bool:
        return self.minus_log_radius[0] > 0 and self.bounded == 0

    def as_dict(self) -> Dict[str, Any]:
        return {
            "minus_log_radius": [format_rational(v) for v in self.minus_log_radius],
            "formal_dimension": self.formal_dimension,
            "bounded": self.bounded,
            "order": self.order,
            "holds": self.holds,
        }


def bounded_sections(g: TruncatedSeries, settings: Optional[Settings] = None) -> BoundaryReport:
    """
    For D(e) = g e over the disc: -log IR at the generic point of |t| = 1, and the number of
    formal solutions that converge with log-growth 0.
    """
    settings = settings or get_settings()
    if g.domain.is_annulus:
        raise PreconditionError("bounded_sections expects a disc character; see disc_character")
    V = DiffModule.rank_one(g)
    entry = _rank_one_entry(g, Fraction(0), V.ctx)
    if entry is None:
        entry = spectral_norm_bound(V, 0)
    n_terms = settings.terms if g.hi is None else min(settings.terms, g.hi + 2)
    report = classify_solution_space(V, solve_horizontal(V, n_terms))
    bounded = sum(1 for s in report.convergent_reports
                  if s.log_growth is not None and s.log_growth.order == 0)
    logger.info(f"bounded_sections: -log IR in [{format_rational(entry[0])}, "
                f"{format_rational(entry[1])}], {bounded} bounded of {report.formal_dimension}")
    return BoundaryReport(entry, report.formal_dimension, bounded, n_terms - 1)


def finite_zeroes(vectors: List[Vector], domain: RingDomain) -> Dict[str, Any]:
    """has_finitely_many_zeroes for every nonzero component, restricted to the annulus"""
    if not domain.is_annulus:
        raise PreconditionError("finite_zeroes restricts to an annulus")
    verdicts = []
    for v in vectors:
        verdicts.append([comp.on_domain(domain).has_finitely_many_zeroes()
                         for comp in v if comp.coeffs])
    holds = bool(verdicts) and all(all(row) for row in verdicts)
    return {"alpha": format_rational(domain.alpha), "components": verdicts, "holds": holds}
