"""
Splitting off the submodule of larger radii
key_lemma_split: cyclic vector, Hensel split R = Q'P' and the P'-coset when the radii are visible;
otherwise push forward along u = t^p, split there and descend.
full_split: complement through the dual side, direct-sum and separation checks, alpha retries.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from padic_ode.config import Settings, get_settings
from padic_ode.diffmod import (
    DiffModule,
    RadiiMultiset,
    _rank_one_entry,
    cyclic_vector,
    operator_radii,
    spectral_norm_bound,
    subsidiary_radii_at,
)
from padic_ode.errors import (
    PadicError,
    PrecisionExhaustedError,
    PreconditionError,
    RadiiNotSeparatedError,
    WindowInsufficientError,
)
from padic_ode.frobenius import descend, gphi_closure, phi_multiset, pushforward
from padic_ode.padic_core import format_rational
from padic_ode.series import RingDomain, TruncatedSeries
from padic_ode.twisted import TwistedPoly, hensel_factor, tmul
from padic_ode.utils import linalg
from padic_ode.utils.linalg import Vector

logger = logging.getLogger(__name__)


@dataclass
class SubmoduleResult:
    """Basis vectors (in the basis of M) of the split-off submodule"""

    vectors: List[Vector]
    route: str                                  # "direct" or "frobenius"
    depth: int
    index: int
    radii: Optional[RadiiMultiset] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def as_dict(self) -> Dict:
        return {
            "rank": self.rank,
            "route": self.route,
            "depth": self.depth,
            "index": self.index,
            "radii": self.radii.as_dict() if self.radii else None,
            "details": self.details,
        }


def _apply_operator(M: DiffModule, X: TwistedPoly, iterates: List[Vector]) -> Vector:
    """X(v) = sum_k X_k D^k(v), extending the list of iterates D^k(v) when needed"""
    while len(iterates) < len(X.coeffs):
        iterates.append(M.apply_D(iterates[-1]))
    out = M.zero_vector()
    for k, coeff in enumerate(X.coeffs):
        if coeff.is_zero():
            continue
        out = [a + coeff * b for a, b in zip(out, iterates[k])]
    return out


def line_character(M: DiffModule, w: Vector, terms: int = 200) -> TruncatedSeries:
    """g with D(w) = g w, read off a unit component of w"""
    Dw = M.apply_D(w)
    for comp, dcomp in zip(w, Dw):
        if comp.is_unit():
            return dcomp * comp.invert_unit(terms)
    raise PreconditionError("line has no unit component; it is not saturated")


def line_radii(M: DiffModule, w: Vector, x, terms: int = 200) -> RadiiMultiset:
    g = line_character(M, w, terms)
    entry = _rank_one_entry(g, Fraction(x), M.ctx)
    if entry is None:
        entry = spectral_norm_bound(DiffModule.rank_one(g, M.ctx), x)
    return RadiiMultiset((entry,))


def _separated_values(radii: RadiiMultiset, i: int) -> List[Fraction]:
    if not radii.is_exact:
        raise PreconditionError("radii at the generic point are only known up to intervals",
                                radii=radii.as_dict())
    values = radii.values()
    if not 1 <= i < len(values):
        raise RadiiNotSeparatedError(f"split index {i} must lie in 1..{len(values) - 1}")
    if not values[i - 1] > values[i]:
        raise RadiiNotSeparatedError(
            f"f_{i} = f_{i + 1} = {format_rational(values[i])}: nothing to split",
            radii=radii.as_dict(),
        )
    return values


def key_lemma_split(M: DiffModule, i: int, settings: Optional[Settings] = None,
                    radii: Optional[RadiiMultiset] = None, depth: int = 0) -> SubmoduleResult:
    """
    Submodule M'' of rank m - i with f_(i+j)(M, 0) = f_j(M'', 0).
    Requires f_i(M, 0) > f_(i+1)(M, 0) at the generic point of |t| = 1.
    """
    settings = settings or get_settings()
    if not M.domain.is_annulus:
        raise PreconditionError("key_lemma_split works over an annulus")
    m, p = M.rank, M.p
    if radii is None:
        radii = subsidiary_radii_at(M, 0, attempts=settings.cyclic_attempts, seed=settings.seed,
                                    terms=settings.terms)
    values = _separated_values(radii, i)
    threshold = M.ctx.spectral_log_norm(p, 0)
    logger.info(f"key_lemma_split: rank {m}, i={i}, depth {depth}, "
                f"radii {[format_rational(v) for v in values]}")

    if values[i - 1] > threshold:
        return _direct_split(M, i, values, settings, depth)

    if depth >= settings.max_frobenius_depth:
        raise PrecisionExhaustedError(
            f"radius f_{i} needs more than {settings.max_frobenius_depth} Frobenius steps",
            depth=depth,
        )
    pushed = pushforward(M)
    pushed_values = phi_multiset(values, p)
    v = values[i - 1]
    image = p * v if v < threshold else v + 1
    i_pushed = sum(1 for w in pushed_values if w >= image)
    logger.info(f"frobenius step {depth + 1}: f_{i} = {format_rational(v)} -> "
                f"{format_rational(image)}, split index {i_pushed} of {len(pushed_values)}")
    pushed_radii = RadiiMultiset(tuple((w, w) for w in pushed_values))
    inner = key_lemma_split(pushed.module, i_pushed, settings, pushed_radii, depth + 1)
    closure = gphi_closure(pushed, inner.vectors)
    vectors = descend(pushed, closure)
    if len(vectors) != m - i:
        raise PreconditionError(
            f"descent produced {len(vectors)} generators, expected rank {m - i}",
            depth=depth,
        )
    sub_radii = None
    if len(vectors) == 1:
        try:
            sub_radii = line_radii(M, vectors[0], 0, settings.terms)
        except PadicError as exc:
            logger.warning(f"radii of the descended line not computed: {exc}")
    return SubmoduleResult(vectors, "frobenius", depth, i, sub_radii, {
        "pushed_index": i_pushed,
        "pushed_radii": [format_rational(w) for w in pushed_values],
        "inner": inner.as_dict(),
    })


def _direct_split(M: DiffModule, i: int, values: List[Fraction], settings: Settings,
                  depth: int) -> SubmoduleResult:
    m = M.rank
    cyc = cyclic_vector(M, settings.cyclic_attempts, settings.seed)
    R = cyc.operator
    target = max(8, M.prec // 2)
    report = hensel_factor(R, m - i, variant="QP", target=target, terms=settings.terms)
    P_right = report.P
    iterates = [cyc.vector]
    T = TwistedPoly.T(M.p, M.domain, M.prec, R.ctx)
    X = P_right
    vectors = []
    for _ in range(m - i):
        vectors.append(_apply_operator(M, X, iterates))
        X = tmul(T, X)
    sub_radii = RadiiMultiset(tuple(operator_radii(report.Q, 0, settings.terms)))
    expected = values[i:]
    matched = sub_radii.is_exact and sub_radii.values() == expected
    if not matched:
        logger.warning(f"radii of M'' {sub_radii.as_dict()} differ from f_(i+j)(M, 0)")
    return SubmoduleResult(vectors, "direct", depth, i, sub_radii, {
        "hensel": report.as_dict(),
        "radii_match": matched,
    })


# === Complement and full split ===

def annihilator_line(dual_vectors: List[Vector]) -> Vector:
    """v with <v, w> = 0 for m-1 vectors w of M^dual: signed maximal minors"""
    m = len(dual_vectors[0])
    if len(dual_vectors) != m - 1:
        raise PreconditionError("the annihilator is a line only for m-1 dual vectors")
    W = linalg.columns_to_matrix(dual_vectors)
    out = []
    for j in range(m):
        minor = [row for k, row in enumerate(W) if k != j]
        d = linalg.det(minor) if minor else TruncatedSeries.one(W[0][0].p, W[0][0].domain,
                                                                  W[0][0].prec)
        out.append(d if j % 2 == 0 else -d)
    return out


@dataclass
class FullSplit:
    prime: List[Vector]                 # M', the small-radius part
    double_prime: SubmoduleResult       # M''
    alpha: Fraction
    determinant_unit: bool
    separation: List[Dict[str, str]]

    def as_dict(self) -> Dict:
        return {
            "alpha": format_rational(self.alpha),
            "rank_prime": len(self.prime),
            "rank_double_prime": self.double_prime.rank,
            "determinant_unit": self.determinant_unit,
            "separation": self.separation,
            "double_prime": self.double_prime.as_dict(),
        }


def full_split(M: DiffModule, i: int, settings: Optional[Settings] = None) -> FullSplit:
    """
    M = M' (+) M'': M'' from key_lemma_split(M, i), M' the annihilator of the matching
    submodule of M^dual. Checks that the concatenated basis has unit determinant and that
    f(M', r) > f(M'', r) on a grid near 0.
    """
    settings = settings or get_settings()
    m = M.rank
    double = key_lemma_split(M, i, settings)
    dual_side = key_lemma_split(M.dual(), i, settings)
    if len(dual_side.vectors) != m - 1:
        raise PreconditionError("the complement is built as an annihilator line; use i = 1")
    prime = [annihilator_line(dual_side.vectors)]
    basis = linalg.columns_to_matrix(prime + double.vectors)
    det = linalg.det(basis)
    unit = det.is_unit()
    if not unit:
        raise PreconditionError("M' + M'' is not a direct sum on this annulus",
                                alpha=format_rational(M.domain.alpha),
                                suggested_alpha=format_rational(M.domain.alpha / 2))

    separation = []
    alpha = M.domain.alpha
    for r in (Fraction(0), alpha / 4, alpha / 2):
        f_prime = line_radii(M, prime[0], r, settings.terms).entries[0]
        f_double = line_radii(M, double.vectors[0], r, settings.terms).entries[0] \
            if double.rank == 1 else None
        holds = f_double is None or f_prime[0] + r > f_double[1] + r
        separation.append({
            "r": format_rational(r),
            "f_prime": format_rational(f_prime[0] + r),
            "f_double_prime": format_rational(f_double[1] + r) if f_double else "n/a",
            "holds": str(holds).lower(),
        })
        if not holds:
            raise RadiiNotSeparatedError(f"f(M', r) <= f(M'', r) at r = {format_rational(r)}",
                                         grid_point=format_rational(r))
    logger.info(f"full_split: M' rank {len(prime)} (+) M'' rank {double.rank} on alpha "
                f"{format_rational(alpha)}")
    return FullSplit(prime, double, alpha, unit, separation)


def full_split_with_retries(M: DiffModule, i: int, settings: Optional[Settings] = None) -> FullSplit:
    """
    full_split over the annulus of inner log-radius settings.alpha; on failure the annulus is
    moved toward |t| = 1 by halving the log-radius, at most settings.alpha_retries times.
    """
    settings = settings or get_settings()
    alpha = Fraction(settings.alpha)
    last: Optional[PadicError] = None
    for attempt in range(settings.alpha_retries + 1):
        annulus = M.on_domain(RingDomain.annulus(alpha))
        try:
            return full_split(annulus, i, settings)
        except RadiiNotSeparatedError as exc:
            if "grid_point" not in exc.details:
                raise
            last = exc
        except (PreconditionError, WindowInsufficientError) as exc:
            last = exc
        logger.info(f"full_split failed on alpha {format_rational(alpha)} "
                    f"(attempt {attempt + 1}): {last}; moving toward |t| = 1")
        alpha = alpha / 2
    last.details["suggested_alpha"] = format_rational(alpha)
    raise last
