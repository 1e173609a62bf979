"""
Twisted polynomials F{T} over a series ring: T*f = f*T + d(f)
v_r norms, twisted Newton polygons and the slope factorization R = P*Q (or Q'*P')
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from padic_ode.errors import (
    PrecisionExhaustedError,
    PreconditionError,
    RadiiNotSeparatedError,
)
from padic_ode.padic_core import INF, PadicScalar, Rational, format_rational
from padic_ode.series import NewtonPolygon, RingDomain, TruncatedSeries
from padic_ode.utils.hull import hull_segments, lower_hull

logger = logging.getLogger(__name__)

CTX_KINDS = ("d", "d_prime")


@dataclass(frozen=True)
class DerivationContext:
    """
    d = d/dt, or d_prime = (p t^(p-1))^(-1) d (the derivation d/d(t^p) seen on the t-ring).
    sign = -1 is the negated derivation of the opposite ring.
    """

    kind: str = "d"
    sign: int = 1

    def __post_init__(self):
        if self.kind not in CTX_KINDS:
            raise PreconditionError(f"unknown derivation context {self.kind!r}")
        if self.sign not in (1, -1):
            raise PreconditionError("derivation sign must be +1 or -1")

    @property
    def name(self) -> str:
        return self.kind if self.sign == 1 else f"-{self.kind}"

    def negated(self) -> "DerivationContext":
        return DerivationContext(self.kind, -self.sign)

    def log_norm(self, p: int, x: Rational) -> Fraction:
        """-log_p of the operator norm on F_rho, rho = p^(-x)"""
        x = Fraction(x)
        return -x if self.kind == "d" else -1 - p * x

    def spectral_log_norm(self, p: int, x: Rational) -> Fraction:
        """-log_p of the spectral norm on F_rho; omega/rho for d"""
        return Fraction(1, p - 1) + self.log_norm(p, x)

    def apply(self, f: TruncatedSeries) -> TruncatedSeries:
        out = f.derive()
        if self.kind == "d_prime":
            if not f.domain.is_annulus:
                raise PreconditionError("d_prime needs an annulus (t must be invertible)")
            out = out.shift(-(f.p - 1))
            out = out._new({e: c.div_by_p() for e, c in out.coeffs.items()},
                           out.known_lo, out.known_hi)
        return -out if self.sign == -1 else out


# === Twisted polynomials ===

@dataclass(frozen=True, eq=False)
class TwistedPoly:
    ctx: DerivationContext
    coeffs: Tuple[TruncatedSeries, ...]       # index = power of T

    def __post_init__(self):
        if not self.coeffs:
            raise PreconditionError("twisted polynomial needs at least one coefficient")
        coeffs = list(self.coeffs)
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def from_series(cls, coeffs: Sequence[TruncatedSeries],
                    ctx: Optional[DerivationContext] = None) -> "TwistedPoly":
        return cls(ctx or DerivationContext(), tuple(coeffs))

    @classmethod
    def T(cls, p: int, domain: RingDomain, prec: int = 60,
          ctx: Optional[DerivationContext] = None) -> "TwistedPoly":
        zero = TruncatedSeries.zero(p, domain, prec)
        return cls(ctx or DerivationContext(), (zero, TruncatedSeries.one(p, domain, prec)))

    @classmethod
    def constant(cls, f: TruncatedSeries, ctx: Optional[DerivationContext] = None) -> "TwistedPoly":
        return cls(ctx or DerivationContext(), (f,))

    @property
    def p(self) -> int:
        return self.coeffs[0].p

    @property
    def domain(self) -> RingDomain:
        return self.coeffs[0].domain

    @property
    def prec(self) -> int:
        return self.coeffs[0].prec

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs) - 1, -1, -1):
            if not self.coeffs[k].is_zero_on_window():
                return k
        return 0

    def coeff(self, k: int) -> TruncatedSeries:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return TruncatedSeries.zero(self.p, self.domain, self.prec)

    def _zero(self) -> TruncatedSeries:
        return TruncatedSeries.zero(self.p, self.domain, self.prec)

    def _same_ring(self, other: "TwistedPoly") -> None:
        if other.ctx != self.ctx:
            raise PreconditionError(f"context mismatch {self.ctx.name} vs {other.ctx.name}")

    def __add__(self, other: "TwistedPoly") -> "TwistedPoly":
        self._same_ring(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return TwistedPoly(self.ctx, tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    def __neg__(self) -> "TwistedPoly":
        return TwistedPoly(self.ctx, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "TwistedPoly") -> "TwistedPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, TwistedPoly):
            return tmul(self, other)
        return TwistedPoly(self.ctx, tuple(c * other for c in self.coeffs))

    def left_scale(self, f: TruncatedSeries) -> "TwistedPoly":
        """f * R (coefficients multiply on the left, no derivatives appear)"""
        return TwistedPoly(self.ctx, tuple(f * c for c in self.coeffs))

    def apply(self, f: TruncatedSeries) -> TruncatedSeries:
        """The operator sum R_k d^k acting on a series"""
        out = self.coeffs[0] * f
        current = f
        for k in range(1, len(self.coeffs)):
            current = self.ctx.apply(current)
            out = out + self.coeffs[k] * current
        return out

    def is_zero_on_window(self, min_val: Optional[int] = None) -> bool:
        return all(c.is_zero_on_window(min_val) for c in self.coeffs)

    def __repr__(self) -> str:
        return f"TwistedPoly(ctx={self.ctx.name}, degree={self.degree})"


def tmul(f: TwistedPoly, g: TwistedPoly) -> TwistedPoly:
    """
    Twisted product using T^k * b = sum_j C(k, j) d^j(b) T^(k-j).
    Higher derivatives of each right coefficient are computed once.
    """
    f._same_ring(g)
    ctx = f.ctx
    out: Dict[int, TruncatedSeries] = {}
    for l, b in enumerate(g.coeffs):
        if b.is_zero():
            continue
        derivs = [b]
        for k, a in enumerate(f.coeffs):
            if a.is_zero():
                continue
            for j in range(k + 1):
                while len(derivs) <= j:
                    derivs.append(ctx.apply(derivs[-1]))
                if derivs[j].is_zero():
                    break
                term = a * derivs[j]
                binom = math.comb(k, j)
                if binom != 1:
                    term = term.scale(binom)
                slot = k - j + l
                out[slot] = out[slot] + term if slot in out else term
    if not out:
        return TwistedPoly(ctx, (f._zero(),))
    top = max(out)
    return TwistedPoly(ctx, tuple(out.get(k, f._zero()) for k in range(top + 1)))


def opposite(R: TwistedPoly) -> TwistedPoly:
    """
    Anti-isomorphism onto the ring with negated derivation: coefficients are moved to the right of
    T^k via R_k T^k = sum_j (-1)^j C(k, j) T^(k-j) d^j(R_k). Applying it twice is the identity.
    """
    ctx = R.ctx
    out: Dict[int, TruncatedSeries] = {}
    for k, a in enumerate(R.coeffs):
        current = a
        for j in range(k + 1):
            if j:
                current = ctx.apply(current)
            if current.is_zero():
                break
            term = current.scale((-1) ** j * math.comb(k, j))
            slot = k - j
            out[slot] = out[slot] + term if slot in out else term
    zero = R._zero()
    top = max(out, default=0)
    return TwistedPoly(ctx.negated(), tuple(out.get(k, zero) for k in range(top + 1)))


# === Norms and polygons ===

def coefficient_valuations(R: TwistedPoly, point: Rational) -> Dict[int, Fraction]:
    """Gauss valuations v^x(R_k) of the coefficients that are not exactly zero"""
    return {k: c.gauss_valuation(point) for k, c in enumerate(R.coeffs) if not c.is_zero()}


def v_r_twisted(R: TwistedPoly, r: Rational, alpha_point: Rational) -> Union[Fraction, float]:
    """v_r^x(sum R_k T^k) = min_k v^x(R_k) + k*r"""
    r = Fraction(r)
    vals = coefficient_valuations(R, alpha_point)
    if not vals:
        return INF
    return min(v + k * r for k, v in vals.items())


def newton_polygon_twisted(R: TwistedPoly, alpha_point: Rational) -> NewtonPolygon:
    """Lower hull of (-k, v^x(R_k))"""
    vals = coefficient_valuations(R, alpha_point)
    vertices = lower_hull((-k, v) for k, v in vals.items())
    slopes = [(s, int(w)) for s, w, _, _ in hull_segments(vertices)]
    return NewtonPolygon(vertices, slopes)


def sample_points(R: TwistedPoly) -> List[Fraction]:
    """Breakpoints of x -> v^x(R_k) for every coefficient plus the ends of the radius range"""
    points = set()
    for c in R.coeffs:
        if not c.is_zero():
            points.update(c.sample_radii())
    if not points:
        points.add(Fraction(0))
    return sorted(points)


def admissible_interval(R: TwistedPoly, i: int,
                        points: Sequence[Rational]) -> Tuple[Union[Fraction, float], Union[Fraction, float]]:
    """
    Open interval of r with v^x(R_k) + k r > v^x(R_i) + i r for k != i and r < -x at every point.
    """
    lower: Union[Fraction, float] = -INF
    upper: Union[Fraction, float] = INF
    for x in points:
        x = Fraction(x)
        vals = coefficient_valuations(R, x)
        if i not in vals:
            raise PreconditionError(f"coefficient R_{i} vanishes", point=format_rational(x))
        upper = min(upper, -x)
        for k, v in vals.items():
            if k > i:
                lower = max(lower, (vals[i] - v) / (k - i))
            elif k < i:
                upper = min(upper, (v - vals[i]) / (i - k))
    return lower, upper


def choose_r(lower, upper, max_denominator: int = 64) -> Fraction:
    """Simplest rational near the midpoint of (lower, upper), denominators capped"""
    if not lower < upper:
        raise RadiiNotSeparatedError("no admissible r: slopes are not separated",
                                     lower=format_rational(lower), upper=format_rational(upper))
    if lower == -INF:
        return Fraction(math.floor(upper) - 1)
    if upper == INF:
        return Fraction(math.floor(lower) + 1)
    mid = (Fraction(lower) + Fraction(upper)) / 2
    d = 1
    while d <= max_denominator:
        candidate = mid.limit_denominator(d)
        if lower < candidate < upper:
            return candidate
        d *= 2
    return mid


# === Hensel factorization ===

@dataclass
class HenselReport:
    """Factors with their iteration record; residuals are relative to v_r(R_i T^i)"""

    factors: Tuple[TwistedPoly, TwistedPoly]
    variant: str                                   # "PQ" or "QP"
    r_used: Fraction
    iterations: int
    residual_valuations: Dict[Fraction, Union[Fraction, float]] = field(default_factory=dict)
    c0: Dict[Fraction, Fraction] = field(default_factory=dict)

    @property
    def P(self) -> TwistedPoly:
        return self.factors[0] if self.variant == "PQ" else self.factors[1]

    @property
    def Q(self) -> TwistedPoly:
        return self.factors[1] if self.variant == "PQ" else self.factors[0]

    def product(self) -> TwistedPoly:
        return tmul(*self.factors)

    def as_dict(self) -> Dict:
        return {
            "variant": self.variant,
            "r_used": format_rational(self.r_used),
            "iterations": self.iterations,
            "residual_valuations": {format_rational(x): format_rational(v)
                                    for x, v in self.residual_valuations.items()},
            "c0": {format_rational(x): format_rational(v) for x, v in self.c0.items()},
            "degrees": [f.degree for f in self.factors],
        }


def _relative_residual(R: TwistedPoly, E: TwistedPoly, i: int, r: Fraction,
                       points: Sequence[Fraction]) -> Dict[Fraction, Union[Fraction, float]]:
    """Residual terms that vanish on their window count as inf"""
    out = {}
    for x in points:
        dominant = R.coeffs[i].gauss_valuation(x) + i * r
        residual = min((c.window_valuation(x) + k * r for k, c in enumerate(E.coeffs)), default=INF)
        out[x] = residual - dominant
    return out


def hensel_factor(R: TwistedPoly, i: int, r: Optional[Rational] = None,
                  points: Optional[Sequence[Rational]] = None, target: Optional[int] = None,
                  variant: str = "PQ", initial: Optional[Tuple[TwistedPoly, TwistedPoly]] = None,
                  terms: int = 200) -> HenselReport:
    """
    Factor R = P*Q with Q of degree i and leading coefficient R_i (slopes > r) and P of degree
    deg R - i with v_r(P - 1) > 0 (slopes < r). variant "QP" returns R = Q'*P' through the
    opposite ring. Iterates P += X, Q += Y until the relative residual reaches target.
    """
    if variant == "QP":
        report = hensel_factor(opposite(R), i, r, points, target, "PQ", None, terms)
        P_opp, Q_opp = report.factors
        report.factors = (opposite(Q_opp), opposite(P_opp))
        report.variant = "QP"
        return report
    if variant != "PQ":
        raise PreconditionError(f"unknown Hensel variant {variant!r}")

    n = R.degree
    if not 0 <= i <= n:
        raise PreconditionError(f"split index {i} outside 0..{n}")
    pts = [Fraction(x) for x in (points if points is not None else sample_points(R))]
    for x in pts:
        R.domain.check_point(x)
    if r is None:
        r = choose_r(*admissible_interval(R, i, pts))
    r = Fraction(r)
    target = R.prec if target is None else target

    for x in pts:
        if not r < -x:
            raise PreconditionError(f"r = {format_rational(r)} is not below -x at a sample point",
                                    point=format_rational(x))
    R_i = R.coeffs[i]
    R_i_inv = R_i.invert_unit(terms)

    zero = R._zero()
    one = TruncatedSeries.one(R.p, R.domain, R.prec)
    if initial is None:
        P = TwistedPoly(R.ctx, (one,))
        Q = TwistedPoly(R.ctx, tuple([zero] * i + [R_i]))
    else:
        P, Q = initial
    head = TwistedPoly(R.ctx, tuple([zero] * i + [R_i]))
    c0 = _relative_residual(R, R - head, i, r, pts)
    for x, c in c0.items():
        if not c > 0:
            raise PreconditionError(
                f"R_{i} T^{i} does not dominate at r = {format_rational(r)}",
                point=format_rational(x), c0=format_rational(c),
            )
    c_min = min(c0.values())
    budget = (math.ceil(target / c_min) if c_min != INF else 0) + 4
    inv_poly = TwistedPoly(R.ctx, (R_i_inv,))

    iterations = 0
    while True:
        E = R - tmul(P, Q)
        residual = _relative_residual(R, E, i, r, pts)
        worst = min(residual.values())
        logger.debug(f"hensel iteration {iterations}: min relative residual {format_rational(worst)}")
        if worst >= target:
            break
        if iterations >= budget:
            raise PrecisionExhaustedError(
                f"Hensel iteration stalled at relative residual {format_rational(worst)}",
                target=target, iterations=iterations,
            )
        upper = TwistedPoly(R.ctx, tuple(E.coeff(k) for k in range(i, len(E.coeffs))) or (zero,))
        X = tmul(upper, inv_poly)
        Y = TwistedPoly(R.ctx, tuple(E.coeff(k) for k in range(i)) or (zero,))
        P = P + X
        Q = Q + Y
        iterations += 1

    logger.info(f"hensel_factor: degree {n} split at i={i}, r={format_rational(r)}, "
                f"{iterations} iterations")
    return HenselReport((P, Q), "PQ", r, iterations, residual, c0)
