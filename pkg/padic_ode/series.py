"""
Truncated Laurent series over Q_p with explicit exponent windows
Models the bounded disc, the open disc and bounded annuli at finite precision:
Gauss valuations, Newton polygons, derivation, unit inversion, radius and log-growth estimates
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from padic_ode.errors import InputFormatError, PreconditionError, WindowInsufficientError
from padic_ode.padic_core import INF, LogVal, PadicScalar, Rational, format_rational
from padic_ode.utils.hull import breakpoints_in, hull_segments, lower_hull

logger = logging.getLogger(__name__)

DOMAIN_KINDS = ("bounded_disc", "open_disc", "bounded_annulus")


# === Domains ===

@dataclass(frozen=True)
class RingDomain:
    """Which ring a series lives in; inner_log_radius is -log_p(alpha) for annuli"""

    kind: str = "bounded_disc"
    inner_log_radius: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise InputFormatError(f"Unknown ring kind {self.kind!r}")
        if self.kind == "bounded_annulus":
            if not (0 < self.inner_log_radius < INF):
                raise PreconditionError("bounded_annulus requires a finite inner_log_radius > 0")
        elif self.inner_log_radius != 0:
            raise PreconditionError("disc domains have inner_log_radius 0")

    @classmethod
    def disc(cls) -> "RingDomain":
        return cls("bounded_disc", Fraction(0))

    @classmethod
    def open_disc(cls) -> "RingDomain":
        return cls("open_disc", Fraction(0))

    @classmethod
    def annulus(cls, alpha: Rational) -> "RingDomain":
        return cls("bounded_annulus", LogVal(alpha))

    @property
    def is_annulus(self) -> bool:
        return self.kind == "bounded_annulus"

    @property
    def alpha(self) -> Fraction:
        return self.inner_log_radius

    def check_point(self, r: Fraction) -> None:
        """r must lie in [0, -log alpha] (annuli) or [0, inf) (discs)"""
        if r < 0 or (self.is_annulus and r > self.alpha):
            raise PreconditionError(
                f"radius {format_rational(r)} outside {self.kind} range",
                alpha=format_rational(self.alpha),
            )


# === Newton polygons and reports ===

@dataclass(frozen=True)
class NewtonPolygon:
    vertices: List[Tuple[Fraction, Fraction]]
    slopes: List[Tuple[Fraction, int]]       # (slope, horizontal width), slopes increasing

    @property
    def width(self) -> int:
        return sum(w for _, w in self.slopes)

    def slope_multiset(self) -> Dict[Fraction, int]:
        return {s: w for s, w in self.slopes}

    def as_dict(self) -> Dict:
        return {
            "vertices": [[format_rational(x), format_rational(y)] for x, y in self.vertices],
            "slopes": [[format_rational(s), w] for s, w in self.slopes],
        }


@dataclass(frozen=True)
class LogGrowthReport:
    delta_estimate: Union[Fraction, str]     # "bounded", "exceeds_window" or a rational
    witness: List[int] = field(default_factory=list)
    tested: Dict[str, bool] = field(default_factory=dict)

    @property
    def order(self) -> Optional[Fraction]:
        """Numeric log-growth order; None when the window was exceeded"""
        if self.delta_estimate == "bounded":
            return Fraction(0)
        if self.delta_estimate == "exceeds_window":
            return None
        return Fraction(self.delta_estimate)

    def as_dict(self) -> Dict:
        est = self.delta_estimate
        return {
            "delta_estimate": est if isinstance(est, str) else format_rational(est),
            "witness": list(self.witness),
            "tested": dict(self.tested),
        }


# === Series ===

def _digits(p: int, n: int) -> int:
    """Number of base-p digits of n >= 1 (an integer upper bound for log_p n)"""
    d = 0
    while n:
        n //= p
        d += 1
    return d


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """
    sum a_e t^e with a_e known for lo <= e <= hi.
    lo = None (hi = None) means every coefficient below (above) the stored ones is exactly zero.
    Stored coefficients are nonzero; a known exponent missing from coeffs is zero.
    """

    p: int
    domain: RingDomain
    coeffs: Dict[int, PadicScalar]
    lo: Optional[int] = None
    hi: Optional[int] = None
    prec: int = 60

    def __post_init__(self):
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise WindowInsufficientError(f"empty exponent window [{self.lo}, {self.hi}]")
        if not self.domain.is_annulus:
            if any(e < 0 for e in self.coeffs):
                raise PreconditionError("disc series cannot have negative exponents")

    # --- constructors ---

    @classmethod
    def zero(cls, p: int, domain: RingDomain, prec: int = 60) -> "TruncatedSeries":
        return cls(p, domain, {}, None, None, prec)

    @classmethod
    def constant(cls, p: int, domain: RingDomain, c: Union[Rational, PadicScalar],
                 prec: int = 60) -> "TruncatedSeries":
        return cls.monomial(p, domain, 0, c, prec)

    @classmethod
    def one(cls, p: int, domain: RingDomain, prec: int = 60) -> "TruncatedSeries":
        return cls.monomial(p, domain, 0, 1, prec)

    @classmethod
    def monomial(cls, p: int, domain: RingDomain, k: int,
                 c: Union[Rational, PadicScalar] = 1, prec: int = 60) -> "TruncatedSeries":
        scalar = c if isinstance(c, PadicScalar) else PadicScalar.from_fraction(p, c, prec)
        coeffs = {} if scalar.is_zero() else {k: scalar}
        return cls(p, domain, coeffs, None, None, prec)

    @classmethod
    def from_fractions(cls, p: int, domain: RingDomain, values: Dict[int, Rational],
                       prec: int = 60, lo: Optional[int] = None,
                       hi: Optional[int] = None) -> "TruncatedSeries":
        coeffs = {}
        for e, v in values.items():
            if v != 0:
                coeffs[e] = PadicScalar.from_fraction(p, v, prec)
        return cls(p, domain, coeffs, lo, hi, prec)

    @classmethod
    def from_function(cls, p: int, domain: RingDomain, fn: Callable[[int], Rational],
                      exponents: Iterable[int], prec: int = 60, lo: Optional[int] = None,
                      hi: Optional[int] = None) -> "TruncatedSeries":
        return cls.from_fractions(p, domain, {e: fn(e) for e in exponents}, prec, lo, hi)

    def _new(self, coeffs: Dict[int, PadicScalar], lo, hi) -> "TruncatedSeries":
        lo = None if lo is None or lo == -INF else int(lo)
        hi = None if hi is None or hi == INF else int(hi)
        if lo is not None or hi is not None:
            coeffs = {e: c for e, c in coeffs.items()
                      if (lo is None or e >= lo) and (hi is None or e <= hi)}
        coeffs = {e: c for e, c in coeffs.items() if not c.is_zero()}
        return TruncatedSeries(self.p, self.domain, coeffs, lo, hi, self.prec)

    # --- window bookkeeping ---

    @property
    def known_lo(self) -> Union[int, float]:
        return -INF if self.lo is None else self.lo

    @property
    def known_hi(self) -> Union[int, float]:
        return INF if self.hi is None else self.hi

    @property
    def window(self) -> Tuple[int, int]:
        """Represented exponent interval [e_min, e_max]"""
        e_min = self.lo if self.lo is not None else min(self.coeffs, default=0)
        e_max = self.hi if self.hi is not None else max(self.coeffs, default=0)
        return e_min, e_max

    @property
    def is_exact(self) -> bool:
        return self.lo is None and self.hi is None

    def _lowest_possible(self) -> Union[int, float]:
        """Smallest exponent that may carry a nonzero coefficient"""
        if self.lo is not None:
            return -INF
        return min(self.coeffs, default=INF)

    def _highest_possible(self) -> Union[int, float]:
        if self.hi is not None:
            return INF
        return max(self.coeffs, default=-INF)

    def is_known(self, e: int) -> bool:
        return self.known_lo <= e <= self.known_hi

    def coeff(self, e: int) -> PadicScalar:
        if not self.is_known(e):
            raise WindowInsufficientError(f"coefficient of t^{e} lies outside the window",
                                          window=self.window)
        return self.coeffs.get(e, PadicScalar.zero(self.p))

    def is_zero(self) -> bool:
        """Exactly zero everywhere"""
        return not self.coeffs and self.is_exact

    def is_zero_on_window(self, min_val: Optional[int] = None) -> bool:
        """True if every represented coefficient is zero (or has valuation >= min_val)"""
        if min_val is None:
            return not self.coeffs
        return all(c.val >= min_val for c in self.coeffs.values())

    def min_valuation(self) -> Union[int, float]:
        return min((c.val for c in self.coeffs.values()), default=INF)

    def leading_exponent(self) -> Optional[int]:
        return min(self.coeffs, default=None)

    def truncate(self, lo: Optional[int] = None, hi: Optional[int] = None) -> "TruncatedSeries":
        """Forget coefficients outside [lo, hi]"""
        new_lo = self.known_lo if lo is None else max(self.known_lo, lo)
        new_hi = self.known_hi if hi is None else min(self.known_hi, hi)
        if new_lo > new_hi:
            raise WindowInsufficientError(f"truncation to [{lo}, {hi}] leaves nothing")
        return self._new(dict(self.coeffs), new_lo, new_hi)

    def with_prec(self, prec: int) -> "TruncatedSeries":
        coeffs = {e: c.with_prec(prec) for e, c in self.coeffs.items()}
        return TruncatedSeries(self.p, self.domain, coeffs, self.lo, self.hi, prec)

    def on_domain(self, domain: RingDomain) -> "TruncatedSeries":
        """Same coefficients viewed in another ring (disc to annulus restriction)"""
        return TruncatedSeries(self.p, domain, dict(self.coeffs), self.lo, self.hi, self.prec)

    # --- arithmetic ---

    def _check(self, other: "TruncatedSeries") -> None:
        if other.p != self.p:
            raise PreconditionError(f"prime mismatch {self.p} vs {other.p}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            other = TruncatedSeries.constant(self.p, self.domain, other, self.prec)
        self._check(other)
        lo = max(self.known_lo, other.known_lo)
        hi = min(self.known_hi, other.known_hi)
        if lo > hi:
            raise WindowInsufficientError("sum of series with disjoint windows")
        coeffs = dict(self.coeffs)
        for e, c in other.coeffs.items():
            coeffs[e] = coeffs[e] + c if e in coeffs else c
        return self._new(coeffs, lo, hi)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return self._new({e: -c for e, c in self.coeffs.items()}, self.known_lo, self.known_hi)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            other = TruncatedSeries.constant(self.p, self.domain, other, self.prec)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Union[Rational, PadicScalar]) -> "TruncatedSeries":
        if not isinstance(c, PadicScalar):
            c = PadicScalar.from_fraction(self.p, c, self.prec)
        if c.is_zero():
            return TruncatedSeries.zero(self.p, self.domain, self.prec)
        return self._new({e: a * c for e, a in self.coeffs.items()}, self.known_lo, self.known_hi)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by t^k"""
        return self._new({e + k: c for e, c in self.coeffs.items()},
                         self.known_lo + k, self.known_hi + k)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self.scale(other)
        self._check(other)
        if self.is_zero() or other.is_zero():
            return TruncatedSeries.zero(self.p, self.domain, self.prec)
        lo_bounds = [-INF]
        hi_bounds = [INF]
        if self.lo is not None:
            lo_bounds.append(self.lo + other._highest_possible())
        if other.lo is not None:
            lo_bounds.append(other.lo + self._highest_possible())
        if self.hi is not None:
            hi_bounds.append(self.hi + other._lowest_possible())
        if other.hi is not None:
            hi_bounds.append(other.hi + self._lowest_possible())
        lo, hi = max(lo_bounds), min(hi_bounds)
        if lo > hi or lo == INF or hi == -INF:
            raise WindowInsufficientError(
                "product has no guaranteed window (unknown tails on opposite sides)",
                left=self.window, right=other.window,
            )
        coeffs: Dict[int, PadicScalar] = {}
        right = sorted(other.coeffs.items())
        for i, a in self.coeffs.items():
            for j, b in right:
                e = i + j
                if e < lo:
                    continue
                if e > hi:
                    break
                prod = a * b
                coeffs[e] = coeffs[e] + prod if e in coeffs else prod
        return self._new(coeffs, lo, hi)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TruncatedSeries":
        if n < 0:
            raise PreconditionError("negative powers need invert_unit")
        out = TruncatedSeries.one(self.p, self.domain, self.prec)
        for _ in range(n):
            out = out * self
        return out

    def derive(self) -> "TruncatedSeries":
        """Termwise d/dt"""
        coeffs = {e - 1: c * e for e, c in self.coeffs.items() if e != 0}
        return self._new(coeffs, self.known_lo - 1, self.known_hi - 1)

    def substitute_power(self, k: int, domain: Optional[RingDomain] = None) -> "TruncatedSeries":
        """f(t^k); the window grows to the gaps that are known to vanish"""
        lo = self.known_lo * k - (k - 1) if self.lo is not None else -INF
        hi = self.known_hi * k + (k - 1) if self.hi is not None else INF
        target = domain if domain is not None else self.domain
        out = TruncatedSeries(self.p, target, {e * k: c for e, c in self.coeffs.items()},
                              None, None, self.prec)
        return out._new(out.coeffs, lo, hi)

    # --- valuations ---

    def _guard(self) -> int:
        e_min, e_max = self.window
        return max(1, (e_max - e_min + 1) // 8)

    def _in_guard(self, e: int) -> bool:
        g = self._guard()
        return (self.hi is not None and e > self.hi - g) or (self.lo is not None and e < self.lo + g)

    def _check_range(self, r: Fraction) -> None:
        self.domain.check_point(Fraction(r))

    def gauss_valuation(self, r: Rational, check: bool = True) -> Union[Fraction, float]:
        """
        v_r(f) = min_i v(a_i) + i*r.
        Raises WindowInsufficientError when the minimum is only reached near an unknown tail.
        """
        r = Fraction(r)
        if check:
            self._check_range(r)
        if not self.coeffs:
            if self.is_exact:
                return INF
            raise WindowInsufficientError("series vanishes on its window; valuation unknown")
        best = INF
        best_inner = INF
        for e, c in self.coeffs.items():
            value = c.val + e * r
            if value < best:
                best = value
            if not self._in_guard(e) and value < best_inner:
                best_inner = value
        if best_inner > best and not self.is_exact:
            raise WindowInsufficientError(
                f"Gauss valuation at r={format_rational(r)} is reached at the truncation boundary",
                window=self.window,
            )
        return Fraction(best)

    def window_valuation(self, r: Rational) -> Union[Fraction, float]:
        """min v(a_i) + i*r over the represented coefficients only; inf when there are none"""
        r = Fraction(r)
        return min((c.val + e * r for e, c in self.coeffs.items()), default=INF)

    def newton_polygon(self, slope_window: Tuple[Optional[Rational], Optional[Rational]] = (None, None),
                       ) -> NewtonPolygon:
        """
        Lower convex hull of (-i, v(a_i)); only slopes s with lo < s <= hi are kept.
        """
        s_lo = -INF if slope_window[0] is None else Fraction(slope_window[0])
        s_hi = INF if slope_window[1] is None else Fraction(slope_window[1])
        points = [(-e, c.val) for e, c in self.coeffs.items()]
        vertices = lower_hull(points)
        slopes = []
        for slope, width, left, right in hull_segments(vertices):
            if not (s_lo < slope <= s_hi):
                continue
            for x in (left[0], right[0]):
                if self._in_guard(int(-x)):
                    raise WindowInsufficientError(
                        f"Newton polygon vertex at exponent {int(-x)} is too close to the truncation",
                        window=self.window,
                    )
            slopes.append((slope, int(width)))
        return NewtonPolygon(vertices, slopes)

    def sample_radii(self) -> List[Fraction]:
        """Endpoints of the domain range plus the breakpoints of r -> v_r(f)"""
        hi = self.domain.alpha if self.domain.is_annulus else Fraction(1)
        vertices = lower_hull((-e, c.val) for e, c in self.coeffs.items())
        return breakpoints_in(vertices, Fraction(0), hi)

    # --- units ---

    def is_unit(self) -> bool:
        """No zeroes on the domain: no Newton slopes in (0, alpha] (annuli) or (0, inf) (discs)"""
        if not self.coeffs:
            return False
        if not self.domain.is_annulus and 0 not in self.coeffs:
            return False
        upper = self.domain.alpha if self.domain.is_annulus else None
        try:
            polygon = self.newton_polygon((Fraction(0), upper))
        except WindowInsufficientError:
            return False
        return not polygon.slopes

    def invert_unit(self, terms: int = 200) -> "TruncatedSeries":
        """
        1/f for a unit f = c t^k (1 + h) whose dominant term sits at the extreme exponent on the
        exactly-known side, so 1/(1+h) is a one-sided geometric series computed order by order.
        terms bounds the output window when f is exact on both sides.
        """
        if not self.coeffs:
            raise PreconditionError("cannot invert zero")
        if len(self.coeffs) == 1 and self.is_exact:
            (k, c), = self.coeffs.items()
            return self._new({-k: c.inv()}, -INF, INF)
        upward = self.lo is None
        if upward and self.hi is None:
            upward = self._dominant_is_lowest()
        if not upward and self.hi is not None:
            raise PreconditionError("unit inversion needs one exactly-known side")
        k = min(self.coeffs) if upward else max(self.coeffs)
        c_inv = self.coeffs[k].inv()
        # h = f / (c t^k) - 1, exponents of one sign only
        h = {e - k: a * c_inv for e, a in self.coeffs.items() if e != k}
        self._check_unit(h, upward)
        span = terms
        if upward and self.hi is not None:
            span = self.hi - k
        if not upward and self.lo is not None:
            span = k - self.lo
        g = self._geometric(h, span, upward)
        out = {e - k: a * c_inv for e, a in g.items()}
        if upward:
            return self._new(out, -INF, span - k)
        return self._new(out, -span - k, INF)

    def _dominant_is_lowest(self) -> bool:
        lowest, highest = min(self.coeffs), max(self.coeffs)
        ends = [Fraction(0)]
        if self.domain.is_annulus:
            ends.append(self.domain.alpha)
        for r in ends:
            values = {e: c.val + e * r for e, c in self.coeffs.items()}
            best = min(values.values())
            winners = [e for e, v in values.items() if v == best]
            if winners == [lowest]:
                return True
            if winners == [highest]:
                return False
        raise PreconditionError("no single dominant extreme term; two-sided inversion unsupported")

    def _check_unit(self, h: Dict[int, PadicScalar], upward: bool) -> None:
        if not h:
            return
        r = Fraction(0) if upward else (self.domain.alpha if self.domain.is_annulus else Fraction(0))
        worst = min(c.val + e * r for e, c in h.items())
        if worst < 0:
            raise PreconditionError(
                "series is not a unit on its domain (dominant term changes)",
                radius=format_rational(r),
            )

    def _geometric(self, h: Dict[int, PadicScalar], span: int, upward: bool) -> Dict[int, PadicScalar]:
        """Coefficients of 1/(1+h) up to |exponent| span"""
        sign = 1 if upward else -1
        terms = sorted((sign * e, c) for e, c in h.items())
        one = PadicScalar.from_int(self.p, 1, self.prec)
        g: Dict[int, PadicScalar] = {0: one}
        for n in range(1, span + 1):
            acc = PadicScalar.zero(self.p)
            for e, c in terms:
                if e > n:
                    break
                prev = g.get(n - e)
                if prev is not None:
                    acc = acc + c * prev
            if not acc.is_zero():
                g[n] = -acc
        return {sign * e: c for e, c in g.items()}

    # --- zero counting, radius, growth ---

    def has_finitely_many_zeroes(self) -> bool:
        """
        True when the represented part lies in the bounded annulus ring: coefficients stay bounded
        toward |t| = 1 and v(a_i) + i*alpha stays bounded below toward the inner circle.
        """
        if not self.coeffs:
            raise PreconditionError("zero series")
        alpha = self.domain.alpha if self.domain.is_annulus else Fraction(0)
        if self.hi is not None:
            if not self._tail_bounded([e for e in self.coeffs if e >= 0], Fraction(0), upper=True):
                return False
        if self.lo is not None and self.domain.is_annulus:
            if not self._tail_bounded([e for e in self.coeffs if e < 0], alpha, upper=False):
                return False
        self.newton_polygon((Fraction(0), alpha if alpha else None))
        return True

    def _tail_bounded(self, exponents: List[int], r: Fraction, upper: bool) -> bool:
        if len(exponents) < 8:
            raise WindowInsufficientError("too few coefficients to judge the tail", window=self.window)
        exponents.sort(reverse=not upper)
        cut = (3 * len(exponents)) // 4
        body = min(self.coeffs[e].val + e * r for e in exponents[:cut])
        tail = min(self.coeffs[e].val + e * r for e in exponents[cut:])
        return tail >= body

    def radius_of_convergence_estimate(self) -> Tuple[Fraction, Fraction]:
        """
        Bracket for -log_p R(f) = -liminf v(a_i)/i from the tail half [W/2, W] of the window.
        The upper end is widened by (1 + digits_p(W))/W, which covers the factorial digit-sum defect.
        R(f) >= 1 exactly when the bracket reaches down to 0 or below. A window with no tail
        coefficients is a polynomial: (-inf, -inf), R(f) = inf.
        """
        _, w = self.window
        if w < 32:
            raise WindowInsufficientError("radius estimate needs at least 32 exponents", window=self.window)
        tail = [(e, c) for e, c in self.coeffs.items() if w // 2 <= e <= w]
        if not tail:
            return -INF, -INF
        ratios = [Fraction(-c.val, e) for e, c in tail]
        widen = Fraction(1 + _digits(self.p, w), w)
        return min(ratios), max(ratios) + widen

    def log_growth_classify(self, deltas: Iterable[Rational] = (1, 2, 3)) -> LogGrowthReport:
        """
        Decide which orders delta keep v(a_i) + delta*log_p(i+1) bounded below on the window.
        A delta passes when the running maximum of -v(a_i) - delta*floor(log_p(i+1)) over the whole
        window is already reached within its first 1/p part.
        """
        deltas = [Fraction(d) for d in deltas]
        _, w = self.window
        lo_r, _ = self.radius_of_convergence_estimate()
        # -log R below this is indistinguishable from R = 1 for the tested orders
        slack = (1 + max(deltas, default=0)) * Fraction(1 + _digits(self.p, max(w, 1)), max(w, 1))
        if lo_r > slack:
            raise PreconditionError("log-growth needs radius of convergence >= 1",
                                    radius_bracket_low=format_rational(lo_r))
        if w < self.p ** 2:
            raise WindowInsufficientError("log-growth needs a window of at least p^2 exponents")
        head_end = w // self.p
        tested: Dict[str, bool] = {}
        witness: List[int] = []
        candidates = [Fraction(0)] + sorted(d for d in deltas if d > 0)
        for delta in candidates:
            head = -INF
            whole = -INF
            jumps = []
            for e in sorted(self.coeffs):
                if e < 0:
                    continue
                h = -self.coeffs[e].val - delta * (_digits(self.p, e + 1) - 1)
                if h > whole:
                    whole = h
                    jumps.append(e)
                if e <= head_end and h > head:
                    head = h
            passed = whole <= head
            tested[format_rational(delta)] = passed
            logger.debug(f"log-growth delta={delta}: head={head} whole={whole} -> {passed}")
            if passed:
                estimate = "bounded" if delta == 0 else delta
                return LogGrowthReport(estimate, jumps, tested)
            witness = jumps
        return LogGrowthReport("exceeds_window", witness, tested)

    def __repr__(self) -> str:
        shown = ", ".join(f"{format_rational(c.to_fraction())}*t^{e}"
                          for e, c in sorted(self.coeffs.items())[:6])
        more = " ..." if len(self.coeffs) > 6 else ""
        return f"TruncatedSeries(p={self.p}, window={self.window}, [{shown}{more}])"
