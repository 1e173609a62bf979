"""
Differential modules (M, D) over the series rings
Cyclic vectors, subsidiary radii at a point and along [0, alpha], formal horizontal solutions
"""

import math
import random
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from padic_ode.errors import (
    CyclicVectorError,
    PadicError,
    PreconditionError,
    WindowInsufficientError,
)
from padic_ode.padic_core import INF, PadicScalar, Rational, format_rational, val_rational
from padic_ode.series import LogGrowthReport, RingDomain, TruncatedSeries, _digits
from padic_ode.twisted import (
    DerivationContext,
    TwistedPoly,
    hensel_factor,
    newton_polygon_twisted,
    tmul,
)
from padic_ode.utils import linalg
from padic_ode.utils.linalg import Matrix, Vector

logger = logging.getLogger(__name__)

RadiusEntry = Tuple[Fraction, Fraction]      # closed interval for -log_p IR; lo == hi when exact


# === Modules ===

@dataclass(frozen=True, eq=False)
class DiffModule:
    """
    Free module with basis e_1..e_m; D(e_j) = sum_i action[i][j] e_i.
    D(f v) = ctx(f) v + f D(v).
    """

    action: Tuple[Tuple[TruncatedSeries, ...], ...]
    ctx: DerivationContext = field(default_factory=DerivationContext)

    def __post_init__(self):
        m = len(self.action)
        if m == 0 or any(len(row) != m for row in self.action):
            raise PreconditionError("action matrix must be square and nonempty")
        object.__setattr__(self, "action", tuple(tuple(row) for row in self.action))

    @classmethod
    def from_matrix(cls, A: Sequence[Sequence[TruncatedSeries]],
                    ctx: Optional[DerivationContext] = None) -> "DiffModule":
        return cls(tuple(tuple(row) for row in A), ctx or DerivationContext())

    @classmethod
    def rank_one(cls, g: TruncatedSeries, ctx: Optional[DerivationContext] = None) -> "DiffModule":
        """D(e) = g e"""
        return cls(((g,),), ctx or DerivationContext())

    @property
    def rank(self) -> int:
        return len(self.action)

    @property
    def p(self) -> int:
        return self.action[0][0].p

    @property
    def domain(self) -> RingDomain:
        return self.action[0][0].domain

    @property
    def prec(self) -> int:
        return self.action[0][0].prec

    def matrix(self) -> Matrix:
        return [list(row) for row in self.action]

    def is_diagonal(self) -> bool:
        return all(self.action[i][j].is_zero()
                   for i in range(self.rank) for j in range(self.rank) if i != j)

    def zero_vector(self) -> Vector:
        return [TruncatedSeries.zero(self.p, self.domain, self.prec) for _ in range(self.rank)]

    def basis_vector(self, k: int) -> Vector:
        v = self.zero_vector()
        v[k] = TruncatedSeries.one(self.p, self.domain, self.prec)
        return v

    def apply_D(self, v: Vector) -> Vector:
        """Components of D(sum v_j e_j)"""
        Av = linalg.mat_vec(self.matrix(), v)
        return [self.ctx.apply(vi) + wi for vi, wi in zip(v, Av)]

    def dual(self) -> "DiffModule":
        """Action -A^T on the dual basis"""
        return DiffModule.from_matrix(linalg.mat_neg(linalg.transpose(self.matrix())), self.ctx)

    def direct_sum(self, other: "DiffModule") -> "DiffModule":
        if other.ctx != self.ctx:
            raise PreconditionError("direct sum needs a common derivation")
        m, n = self.rank, other.rank
        out = linalg.zero_matrix(m + n, self.p, self.domain, self.prec)
        for i in range(m):
            for j in range(m):
                out[i][j] = self.action[i][j]
        for i in range(n):
            for j in range(n):
                out[m + i][m + j] = other.action[i][j]
        return DiffModule.from_matrix(out, self.ctx)

    def on_domain(self, domain: RingDomain) -> "DiffModule":
        """Scalar extension to another ring (disc to annulus)"""
        return DiffModule.from_matrix([[a.on_domain(domain) for a in row] for row in self.action],
                                      self.ctx)

    def with_derivation(self, kind: str) -> "DiffModule":
        """Switch between d and d_prime = (p t^(p-1))^(-1) d, rescaling D accordingly"""
        if kind == self.ctx.kind:
            return self
        if not self.domain.is_annulus:
            raise PreconditionError("changing the derivation needs an annulus")
        p = self.p
        if kind == "d_prime":
            rows = [[_div_p(a.shift(-(p - 1))) for a in row] for row in self.action]
        else:
            rows = [[a.shift(p - 1).scale(p) for a in row] for row in self.action]
        return DiffModule.from_matrix(rows, DerivationContext(kind, self.ctx.sign))

    def change_basis(self, B: Matrix, terms: int = 200) -> "DiffModule":
        """
        New basis given by the columns of B: A' = B^(-1) (ctx(B) + A B).
        det(B) must be a unit.
        """
        d = linalg.det(B)
        if not d.is_unit():
            raise PreconditionError("change of basis matrix is not invertible")
        d_inv = d.invert_unit(terms)
        B_inv = [[d_inv * a for a in row] for row in linalg.adjugate(B)]
        dB = [[self.ctx.apply(b) for b in row] for row in B]
        new = linalg.mat_mul(B_inv, linalg.mat_add(dB, linalg.mat_mul(self.matrix(), B)))
        return DiffModule.from_matrix(new, self.ctx)

    def __repr__(self) -> str:
        return f"DiffModule(rank={self.rank}, ctx={self.ctx.name}, domain={self.domain.kind})"


def _div_p(f: TruncatedSeries) -> TruncatedSeries:
    return f._new({e: c.div_by_p() for e, c in f.coeffs.items()}, f.known_lo, f.known_hi)


def from_operator(R: TwistedPoly, terms: int = 200) -> DiffModule:
    """
    K{T}/K{T}R with basis 1, T, ..., T^(n-1) and D = left multiplication by T.
    The leading coefficient R_n must be a unit.
    """
    n = R.degree
    if n < 1:
        raise PreconditionError("operator must have degree >= 1")
    lead = R.coeffs[n]
    if not lead.is_unit():
        raise PreconditionError("leading coefficient is not a unit")
    lead_inv = lead.invert_unit(terms)
    A = linalg.zero_matrix(n, R.p, R.domain, R.prec)
    for k in range(n - 1):
        A[k + 1][k] = TruncatedSeries.one(R.p, R.domain, R.prec)
    for k in range(n):
        A[k][n - 1] = -(lead_inv * R.coeffs[k])
    return DiffModule.from_matrix(A, R.ctx)


# === Cyclic vectors ===

@dataclass
class CyclicResult:
    vector: Vector
    operator: TwistedPoly       # monic when det(B) is a monomial
    basis: Matrix               # columns v, Dv, ..., D^(m-1) v
    attempts: int


def _candidate_vectors(M: DiffModule, seed: int):
    m, p, domain, prec = M.rank, M.p, M.domain, M.prec
    for k in range(m):
        yield M.basis_vector(k)
    for offset in range(m):
        yield [TruncatedSeries.monomial(p, domain, (k + offset) % m, 1, prec) for k in range(m)]
    rng = random.Random(seed)
    while True:
        yield [TruncatedSeries.monomial(p, domain, rng.randint(0, 2), rng.randint(-3, 3), prec)
               for _ in range(m)]


def cyclic_vector(M: DiffModule, attempts: int = 64, seed: int = 0) -> CyclicResult:
    """
    First candidate v with det(v, Dv, ..., D^(m-1) v) a unit. The annihilating operator is
    det(B) T^m - sum_k (adj(B) D^m v)_k T^k divided by the dominant monomial c t^e of det(B):
    monic when det(B) = c t^e, otherwise with leading coefficient a unit congruent to 1.
    """
    m = M.rank
    for n_try, v in enumerate(_candidate_vectors(M, seed), start=1):
        if n_try > attempts:
            break
        if all(c.is_zero() for c in v):
            continue
        columns = [v]
        for _ in range(m):
            columns.append(M.apply_D(columns[-1]))
        B = linalg.columns_to_matrix(columns[:m])
        try:
            d = linalg.det(B)
            if not d.is_unit():
                continue
            c = linalg.mat_vec(linalg.adjugate(B), columns[m])
        except WindowInsufficientError:
            continue
        scale = linalg.normalize([d] + c, 0)
        R = TwistedPoly(M.ctx, tuple(-ck for ck in scale[1:]) + (scale[0],))
        logger.debug(f"cyclic vector found after {n_try} candidates")
        return CyclicResult(v, R, B, n_try)
    raise CyclicVectorError(f"no cyclic vector among {attempts} candidates", rank=m)


# === Subsidiary radii ===

@dataclass(frozen=True)
class RadiiMultiset:
    """-log_p of the intrinsic subsidiary radii, each entry a closed interval"""

    entries: Tuple[RadiusEntry, ...]

    def __post_init__(self):
        ordered = tuple(sorted(((Fraction(lo), Fraction(hi)) for lo, hi in self.entries),
                               key=lambda e: (e[1], e[0]), reverse=True))
        object.__setattr__(self, "entries", ordered)

    @property
    def rank(self) -> int:
        return len(self.entries)

    @property
    def is_exact(self) -> bool:
        return all(lo == hi for lo, hi in self.entries)

    def values(self) -> List[Fraction]:
        if not self.is_exact:
            raise PreconditionError("radii are only known up to intervals", entries=self.as_dict())
        return [lo for lo, _ in self.entries]

    def multiset(self) -> Dict[Fraction, int]:
        out: Dict[Fraction, int] = {}
        for value in self.values():
            out[value] = out.get(value, 0) + 1
        return out

    def as_dict(self) -> Dict:
        return {
            "entries": [[format_rational(lo), format_rational(hi)] for lo, hi in self.entries],
            "exact": self.is_exact,
        }


def _rank_one_entry(g: TruncatedSeries, x: Fraction, ctx: DerivationContext) -> Optional[RadiusEntry]:
    """
    Exact -log IR for D(e) = g e with g a Laurent polynomial.
    g = lam/t + h: the lam/t part has IR = 1 for lam in Z_p and IR = omega/|lam| otherwise; for h the
    horizontal section exp(-int h) converges on the disc where its Taylor terms stay below omega.
    None when g is only known on a window.
    """
    p = g.p
    if ctx.kind == "d_prime":
        g = g.shift(p - 1).scale(p)
    if g.is_zero():
        return Fraction(0), Fraction(0)
    if not g.is_exact:
        return None
    om = Fraction(1, p - 1)
    lam = g.coeffs.get(-1)
    value = Fraction(0)
    if lam is not None and lam.val < 0:
        value = om - lam.val
    # G = -int h, exponent k+1 for each term c t^k of h
    G = {e + 1: (c.val - val_rational(p, e + 1)) for e, c in g.coeffs.items() if e != -1}
    if G:
        top = max(max(G), 0)
        bound = top + 2 * p + 2 if min(G) < 0 else top
        log_radius = -INF
        for j in range(1, bound + 1):
            v_j = INF
            for e, v in G.items():
                binom = Fraction(math.prod(range(e - j + 1, e + 1)), math.factorial(j))
                if binom == 0:
                    continue
                v_j = min(v_j, v + val_rational(p, binom) + (e - j) * x)
            if v_j != INF:
                log_radius = max(log_radius, (om - v_j) / j)
        if log_radius != -INF:
            value = max(value, Fraction(log_radius) - x)
    return value, value


def spectral_norm_bound(M: DiffModule, x: Rational, s_max: Optional[int] = None) -> RadiusEntry:
    """
    Interval for the largest -log IR from the growth of D^s on the basis.
    mu_s = min_entry v_x(G_s) / s with G_(s+1) = ctx(G_s) + A G_s; exact when mu_s is stationary
    on the second half of the run.
    """
    x = Fraction(x)
    M.domain.check_point(x)
    s_max = s_max or max(16, 4 * M.p * M.rank)
    A = M.matrix()
    G = linalg.identity(M.rank, M.p, M.domain, M.prec)
    mus: List[Union[Fraction, float]] = []
    for s in range(1, s_max + 1):
        G = linalg.mat_add([[M.ctx.apply(a) for a in row] for row in G], linalg.mat_mul(A, G))
        v = min((a.gauss_valuation(x) for row in G for a in row if not a.is_zero()), default=INF)
        mus.append(v / s if v != INF else INF)
    ref = M.ctx.spectral_log_norm(M.p, x)
    best = max(mus)
    hi = Fraction(0) if best == INF else max(Fraction(0), ref - best)
    tail = mus[s_max // 2:]
    if all(mu == tail[0] for mu in tail):
        return hi, hi
    widen = Fraction(1 + _digits(M.p, s_max), s_max)
    lo = Fraction(0) if best == INF else max(Fraction(0), ref - best - widen)
    return lo, hi


def _first_order_character(R: TwistedPoly, terms: int) -> TruncatedSeries:
    """D(e) = g e for K{T}/K{T}(R_1 T + R_0): g = -R_1^(-1) R_0"""
    return -(R.coeffs[1].invert_unit(terms) * R.coeffs[0])


def _right_factor_candidates(R: TwistedPoly) -> List[TruncatedSeries]:
    """0 and +-(each term of R_k / R_n), plus +-(terms of R_0 / R_1) when R_1 is a monomial"""
    n = R.degree
    out = [R._zero()]
    lead = R.coeffs[n]
    if len(lead.coeffs) != 1:
        return out
    (k_lead, c_lead), = lead.coeffs.items()
    inv = c_lead.inv()
    terms = [(e - k_lead, c * inv) for k in range(n) for e, c in R.coeffs[k].coeffs.items()]
    if n >= 2 and len(R.coeffs[1].coeffs) == 1:
        (k1, c1), = R.coeffs[1].coeffs.items()
        terms.extend((e - k1, c * c1.inv()) for e, c in R.coeffs[0].coeffs.items())
    for e, c in terms:
        if e < 0 and not R.domain.is_annulus:
            continue
        mono = TruncatedSeries.monomial(R.p, R.domain, e, c, R.prec)
        out.extend([mono, -mono])
    return out


def linear_right_factor(R: TwistedPoly) -> Optional[Tuple[TruncatedSeries, TwistedPoly]]:
    """
    Search monomial g with R = A (T - g) exactly. The remainder of R modulo K{T}(T - g) is
    sum_k R_k g_k with g_0 = 1, g_(k+1) = ctx(g_k) + g g_k.
    """
    if any(not c.is_exact for c in R.coeffs):
        return None
    n = R.degree
    for g in _right_factor_candidates(R):
        powers = [TruncatedSeries.one(R.p, R.domain, R.prec)]
        for _ in range(n):
            powers.append(R.ctx.apply(powers[-1]) + g * powers[-1])
        remainder = R.coeffs[0]
        for k in range(1, n + 1):
            remainder = remainder + R.coeffs[k] * powers[k]
        if not remainder.is_zero():
            continue
        A = _right_divide_linear(R, g)
        factor = TwistedPoly(R.ctx, (-g, TruncatedSeries.one(R.p, R.domain, R.prec)))
        if not (R - tmul(A, factor)).is_zero_on_window():
            continue
        logger.debug(f"exact right factor T - ({g!r})")
        return g, A
    return None


def _right_divide_linear(R: TwistedPoly, g: TruncatedSeries) -> TwistedPoly:
    """A with R = A (T - g) + remainder: A_(n-1) = R_n, A_(k-1) = R_k + sum_l A_l C(l, l-k) d^(l-k) g"""
    n = R.degree
    derivs = [g]
    for _ in range(n):
        derivs.append(R.ctx.apply(derivs[-1]))
    A: Dict[int, TruncatedSeries] = {n - 1: R.coeffs[n]}
    for k in range(n - 1, 0, -1):
        acc = R.coeffs[k]
        for l in range(k, n):
            acc = acc + (A[l] * derivs[l - k]).scale(math.comb(l, l - k))
        A[k - 1] = acc
    return TwistedPoly(R.ctx, tuple(A[k] for k in range(n)))


def operator_radii(R: TwistedPoly, x: Rational, terms: int = 200) -> List[RadiusEntry]:
    """
    Radii of K{T}/K{T}R at x. Polygon slopes s below -log|ctx|_op give exact entries
    spectral_log_norm - s; the rest are refined through exact first-order right factors, a Hensel
    split at the visible/invisible boundary, or the spectral bound.
    """
    x = Fraction(x)
    n = R.degree
    p, ctx = R.p, R.ctx
    if n == 1:
        entry = _rank_one_entry(_first_order_character(R, terms), x, ctx)
        if entry is None:
            entry = spectral_norm_bound(from_operator(R, terms), x)
        return [entry]

    polygon = newton_polygon_twisted(R, x)
    threshold = ctx.log_norm(p, x)
    ref = ctx.spectral_log_norm(p, x)
    visible = []
    for slope, width in polygon.slopes:
        if slope < threshold:
            visible.extend([(ref - slope, ref - slope)] * width)
    hidden = n - len(visible)
    if hidden == 0:
        return visible

    factor = linear_right_factor(R)
    if factor is not None:
        g, A = factor
        quotient = _rank_one_entry(g, x, ctx)
        if quotient is None:
            quotient = spectral_norm_bound(DiffModule.rank_one(g, ctx), x)
        return operator_radii(A, x, terms) + [quotient]

    if visible:
        try:
            report = hensel_factor(R, hidden, points=[x], terms=terms)
            return visible + operator_radii(report.Q, x, terms)
        except PadicError as exc:
            logger.warning(f"splitting off the hidden radii failed: {exc}")

    lo, hi = spectral_norm_bound(from_operator(R, terms), x)
    rest = [(Fraction(0), max(ref, Fraction(0)))] * (hidden - 1)
    return visible + [(lo, hi)] + rest


def subsidiary_radii_at(M: DiffModule, x: Rational, operator: Optional[TwistedPoly] = None,
                        attempts: int = 64, seed: int = 0, terms: int = 200,
                        try_dual: bool = True) -> RadiiMultiset:
    """
    Multiset of -log IR(M, x, i), decreasing. M and its dual have the same radii, so an inexact
    answer is retried on the dual, whose factor structure is mirrored.
    """
    x = Fraction(x)
    M.domain.check_point(x)
    if M.rank == 1:
        g = M.action[0][0]
        entry = _rank_one_entry(g, x, M.ctx)
        return RadiiMultiset((entry if entry is not None else spectral_norm_bound(M, x),))
    if operator is None and M.is_diagonal():
        entries = []
        for k in range(M.rank):
            g = M.action[k][k]
            entry = _rank_one_entry(g, x, M.ctx)
            if entry is None:
                entry = spectral_norm_bound(DiffModule.rank_one(g, M.ctx), x)
            entries.append(entry)
        return RadiiMultiset(tuple(entries))
    if operator is None:
        operator = cyclic_vector(M, attempts, seed).operator
    result = RadiiMultiset(tuple(operator_radii(operator, x, terms)))
    if not result.is_exact and try_dual:
        mirrored = subsidiary_radii_at(M.dual(), x, None, attempts, seed, terms, try_dual=False)
        if mirrored.is_exact:
            return mirrored
    return result


@dataclass
class RadiiProfile:
    """f_i(M, r) = -log IR(M, r, i) + r on a grid of points r"""

    grid: List[Fraction]
    rows: List[RadiiMultiset]

    def f_values(self) -> List[List[RadiusEntry]]:
        return [[(lo + r, hi + r) for lo, hi in row.entries] for r, row in zip(self.grid, self.rows)]

    def partial_heights(self) -> List[List[Fraction]]:
        """F_i(r) = f_1 + ... + f_i at each grid point (exact rows only)"""
        out = []
        for r, row in zip(self.grid, self.rows):
            running, heights = Fraction(0), []
            for value in row.values():
                running += value + r
                heights.append(running)
            out.append(heights)
        return out

    def breakpoints(self, index: int) -> List[Fraction]:
        """Grid points where f_index changes slope"""
        values = [row.values()[index] + r for r, row in zip(self.grid, self.rows)]
        out = []
        for k in range(1, len(self.grid) - 1):
            left = (values[k] - values[k - 1]) / (self.grid[k] - self.grid[k - 1])
            right = (values[k + 1] - values[k]) / (self.grid[k + 1] - self.grid[k])
            if left != right:
                out.append(self.grid[k])
        return out

    def as_dict(self) -> Dict:
        return {
            "grid": [format_rational(r) for r in self.grid],
            "f": [[[format_rational(lo), format_rational(hi)] for lo, hi in row]
                  for row in self.f_values()],
        }


def radii_profile(M: DiffModule, grid: Sequence[Rational], attempts: int = 64,
                  seed: int = 0, terms: int = 200) -> RadiiProfile:
    points = sorted(Fraction(r) for r in grid)
    operator = None if M.rank == 1 else cyclic_vector(M, attempts, seed).operator
    rows = [subsidiary_radii_at(M, r, operator, attempts, seed, terms) for r in points]
    return RadiiProfile(points, rows)


# === Horizontal solutions ===

def _scalar_kernel(rows: List[List[PadicScalar]], p: int, prec: int) -> List[List[PadicScalar]]:
    """Kernel basis of a square scalar matrix by elimination with minimal-valuation pivots"""
    m = len(rows)
    work = [list(r) for r in rows]
    pivots: Dict[int, int] = {}
    r_idx = 0
    for col in range(m):
        candidates = [i for i in range(r_idx, m) if not work[i][col].is_zero()]
        if not candidates:
            continue
        best = min(candidates, key=lambda i: work[i][col].val)
        work[r_idx], work[best] = work[best], work[r_idx]
        inv = work[r_idx][col].inv()
        work[r_idx] = [a * inv for a in work[r_idx]]
        for i in range(m):
            if i != r_idx and not work[i][col].is_zero():
                factor = work[i][col]
                work[i] = [a - factor * b for a, b in zip(work[i], work[r_idx])]
        pivots[col] = r_idx
        r_idx += 1
    basis = []
    for free in range(m):
        if free in pivots:
            continue
        vec = [PadicScalar.zero(p) for _ in range(m)]
        vec[free] = PadicScalar.from_int(p, 1, prec)
        for col, row in pivots.items():
            vec[col] = -work[row][free]
        basis.append(vec)
    return basis


def _scalar_solve(rows: List[List[PadicScalar]], rhs: List[PadicScalar], p: int,
                  order: int) -> List[PadicScalar]:
    m = len(rows)
    work = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(m):
        candidates = [i for i in range(col, m) if not work[i][col].is_zero()]
        if not candidates:
            raise PreconditionError(f"horizontal recursion is singular at order {order}", order=order)
        best = min(candidates, key=lambda i: work[i][col].val)
        work[col], work[best] = work[best], work[col]
        inv = work[col][col].inv()
        work[col] = [a * inv for a in work[col]]
        for i in range(m):
            if i != col and not work[i][col].is_zero():
                factor = work[i][col]
                work[i] = [a - factor * b for a, b in zip(work[i], work[col])]
    return [work[i][m] for i in range(m)]


def solve_horizontal(M: DiffModule, n_terms: int = 200) -> List[Vector]:
    """
    Basis of formal solutions of D(v) = 0 over the disc, exponents 0..n_terms-1.
    With A = sum_(k>=-1) A_k t^k: A_(-1) c_0 = 0 and (n + A_(-1)) c_n = -sum_(k>=0) A_k c_(n-1-k).
    """
    if M.domain.is_annulus or M.ctx.kind != "d":
        raise PreconditionError("formal solutions are computed over the disc with d = d/dt")
    m, p, prec = M.rank, M.p, M.prec
    for row in M.action:
        for a in row:
            if a.coeffs and min(a.coeffs) < -1:
                raise PreconditionError("action entries must have exponents >= -1")
            if a.known_hi < n_terms - 2:
                raise WindowInsufficientError("action matrix is not known far enough",
                                              needed=n_terms - 2, window=a.window)
    zero = PadicScalar.zero(p)

    def block(k: int) -> List[List[PadicScalar]]:
        return [[a.coeffs.get(k, zero) for a in row] for row in M.action]

    residue = block(-1)
    if any(not a.is_zero() for row in residue for a in row):
        starts = _scalar_kernel(residue, p, prec)
    else:
        starts = [[PadicScalar.from_int(p, int(i == j), prec) for i in range(m)] for j in range(m)]
    blocks = {}
    for k in range(0, n_terms - 1):
        Ak = block(k)
        if any(not a.is_zero() for row in Ak for a in row):
            blocks[k] = Ak

    solutions = []
    for start in starts:
        coeffs: List[List[PadicScalar]] = [start]
        for n in range(1, n_terms):
            rhs = [zero] * m
            for k, Ak in blocks.items():
                if k >= n:
                    continue
                c = coeffs[n - 1 - k]
                for i in range(m):
                    for j in range(m):
                        if not Ak[i][j].is_zero() and not c[j].is_zero():
                            rhs[i] = rhs[i] + Ak[i][j] * c[j]
            rhs = [-a for a in rhs]
            lhs = [[residue[i][j] + PadicScalar.from_int(p, n, prec) if i == j else residue[i][j]
                    for j in range(m)] for i in range(m)]
            coeffs.append(_scalar_solve(lhs, rhs, p, n))
        vector = []
        for i in range(m):
            values = {n: coeffs[n][i] for n in range(n_terms) if not coeffs[n][i].is_zero()}
            vector.append(TruncatedSeries(p, M.domain, values, None, n_terms - 1, prec))
        solutions.append(vector)
    logger.info(f"solve_horizontal: {len(solutions)} formal solutions to order {n_terms - 1}")
    return solutions


@dataclass
class SolutionReport:
    radius_brackets: List[Tuple[Fraction, Fraction]]
    convergent: bool
    log_growth: Optional[LogGrowthReport]

    def as_dict(self) -> Dict:
        return {
            "radius_brackets": [[format_rational(lo), format_rational(hi)]
                                for lo, hi in self.radius_brackets],
            "convergent": self.convergent,
            "log_growth": self.log_growth.as_dict() if self.log_growth else None,
        }


@dataclass
class SolutionSpaceReport:
    """
    formal_dimension counts the formal basis; convergent_dimension is the dimension of the
    convergent subspace, which may exceed the number of convergent basis solutions when a
    combination of divergent ones converges.
    """

    formal_dimension: int
    convergent_dimension: int
    solutions: List[SolutionReport]
    combinations: List[SolutionReport] = field(default_factory=list)
    convergent_vectors: List[Vector] = field(default_factory=list)

    @property
    def basis_convergent(self) -> int:
        return sum(1 for s in self.solutions if s.convergent)

    @property
    def convergent_reports(self) -> List[SolutionReport]:
        return [s for s in self.solutions if s.convergent] + list(self.combinations)

    def as_dict(self) -> Dict:
        return {
            "formal_dimension": self.formal_dimension,
            "convergent_dimension": self.convergent_dimension,
            "basis_convergent": self.basis_convergent,
            "solutions": [s.as_dict() for s in self.solutions],
            "combinations": [s.as_dict() for s in self.combinations],
        }


def _solution_report(p: int, vector: Vector, deltas: Sequence[Rational]) -> SolutionReport:
    """Converges on the open unit disc when every component's bracket reaches down to the slack"""
    components = [c for c in vector if c.coeffs]
    brackets = [comp.radius_of_convergence_estimate() for comp in components]
    slack = Fraction(0)
    if components:
        w = components[0].window[1]
        slack = Fraction(1 + _digits(p, w), w)
    convergent = all(lo <= slack for lo, _ in brackets)
    growth = None
    if convergent:
        for comp in components:
            rep = comp.log_growth_classify(deltas)
            if growth is None or _growth_key(rep) > _growth_key(growth):
                growth = rep
    return SolutionReport(brackets, convergent, growth)


def _pivot(vectors: Sequence[Vector]) -> Optional[Tuple[int, int, int]]:
    """(vector, component, exponent) of the lowest-valuation coefficient at the top exponent"""
    top = max((e for v in vectors for comp in v for e in comp.coeffs), default=None)
    if top is None:
        return None
    best = None
    for k, v in enumerate(vectors):
        for i, comp in enumerate(v):
            c = comp.coeffs.get(top)
            if c is not None and not c.is_zero() and (best is None or c.val < best[0]):
                best = (c.val, k, i)
    return best[1], best[2], top


def _convergent_combinations(p: int, divergent: List[Vector],
                             deltas: Sequence[Rational]) -> List[Tuple[Vector, SolutionReport]]:
    """
    Eliminate the top tail coefficient of the divergent solutions one pivot at a time; every
    reduced vector that converges spans a new direction of the convergent subspace.
    """
    found = []
    remaining = list(divergent)
    while remaining:
        keep = []
        for v in remaining:
            if all(not comp.coeffs for comp in v):
                continue
            rep = _solution_report(p, v, deltas)
            if rep.convergent:
                found.append((v, rep))
            else:
                keep.append(v)
        if len(keep) < 2:
            break
        pivot = _pivot(keep)
        if pivot is None:
            break
        k, i, e = pivot
        head = keep[k]
        inv = head[i].coeffs[e].inv()
        remaining = []
        for j, v in enumerate(keep):
            if j == k:
                continue
            c = v[i].coeffs.get(e)
            if c is None or c.is_zero():
                remaining.append(v)
                continue
            lam = c * inv
            remaining.append([a - b.scale(lam) for a, b in zip(v, head)])
    return found


def classify_solution_space(M: DiffModule, solutions: Sequence[Vector],
                            deltas: Sequence[Rational] = (1, 2, 3)) -> SolutionSpaceReport:
    """
    Radius bracket and log-growth of every solution in the initial-value basis, then of the
    convergent combinations of the divergent ones.
    """
    reports = [_solution_report(M.p, vector, deltas) for vector in solutions]
    convergent = [v for v, r in zip(solutions, reports) if r.convergent]
    divergent = [v for v, r in zip(solutions, reports) if not r.convergent]
    extra = _convergent_combinations(M.p, divergent, deltas) if len(divergent) > 1 else []
    dim = len(convergent) + len(extra)
    logger.info(f"classify_solution_space: {len(convergent)} of {len(reports)} basis solutions "
                f"converge, convergent subspace of dimension {dim}")
    return SolutionSpaceReport(len(reports), dim, reports, [r for _, r in extra],
                               convergent + [v for v, _ in extra])


def _growth_key(report: LogGrowthReport) -> Fraction:
    order = report.order
    return Fraction(10 ** 6) if order is None else order
