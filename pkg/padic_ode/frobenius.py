"""
Frobenius pushforward along u = t^p
A module (M, D') over the t-annulus becomes a rank p*m module over the u-annulus with basis
e_k t^j (0 <= j < p); multiplication by t^i is the semilinear map psi_i.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from padic_ode.errors import PreconditionError
from padic_ode.padic_core import INF, PadicScalar, Rational, format_rational
from padic_ode.series import RingDomain, TruncatedSeries
from padic_ode.twisted import DerivationContext
from padic_ode.diffmod import DiffModule, RadiiMultiset
from padic_ode.utils import linalg
from padic_ode.utils.linalg import Matrix, Vector

logger = logging.getLogger(__name__)


def u_domain(domain: RingDomain, p: int) -> RingDomain:
    """|t| >= p^(-alpha) on the t-annulus is |u| >= p^(-p alpha)"""
    if not domain.is_annulus:
        return domain
    return RingDomain.annulus(p * domain.alpha)


def decompose_by_residue(f: TruncatedSeries, target: RingDomain = None) -> List[TruncatedSeries]:
    """f(t) = sum_j t^j f_j(t^p); returns [f_0, ..., f_(p-1)] as series in u"""
    p = f.p
    target = target or u_domain(f.domain, p)
    parts: List[Dict[int, PadicScalar]] = [{} for _ in range(p)]
    for e, c in f.coeffs.items():
        j = e % p
        parts[j][(e - j) // p] = c
    out = []
    for j in range(p):
        lo = -INF if f.lo is None else -((j - f.lo) // p)
        hi = INF if f.hi is None else (f.hi - j) // p
        base = TruncatedSeries(p, target, {}, None, None, f.prec)
        out.append(base._new(parts[j], lo, hi))
    return out


def recombine(parts: Sequence[TruncatedSeries], target: RingDomain) -> TruncatedSeries:
    """Inverse of decompose_by_residue"""
    p = len(parts)
    acc = None
    for j, part in enumerate(parts):
        term = part.substitute_power(p, target).shift(j)
        acc = term if acc is None else acc + term
    return acc


@dataclass(frozen=True, eq=False)
class PushedModule:
    """phi_* of a base module; index(k, j) = k*p + j is the basis vector e_k t^j"""

    module: DiffModule
    base: DiffModule

    @property
    def p(self) -> int:
        return self.base.p

    def index(self, k: int, j: int) -> int:
        return k * self.p + j

    def psi(self, i: int) -> Matrix:
        """Matrix of multiplication by t^i: E_(k,j) -> E_(k,i+j), or u E_(k,i+j-p) past the top"""
        p, m = self.p, self.base.rank
        dom, prec = self.module.domain, self.module.prec
        i = i % p
        out = linalg.zero_matrix(p * m, p, dom, prec)
        for k in range(m):
            for j in range(p):
                target = i + j
                if target < p:
                    out[self.index(k, target)][self.index(k, j)] = TruncatedSeries.one(p, dom, prec)
                else:
                    out[self.index(k, target - p)][self.index(k, j)] = TruncatedSeries.monomial(
                        p, dom, 1, 1, prec)
        return out

    def apply_psi(self, i: int, v: Vector) -> Vector:
        return linalg.mat_vec(self.psi(i), v)

    def to_base(self, v: Vector) -> Vector:
        """Pushed components c_(k,j)(u) back to base components sum_j t^j c_(k,j)(t^p)"""
        p, m = self.p, self.base.rank
        return [recombine([v[self.index(k, j)] for j in range(p)], self.base.domain) for k in range(m)]

    def from_base(self, v: Vector) -> Vector:
        out = []
        for comp in v:
            out.extend(decompose_by_residue(comp, self.module.domain))
        return out


def pushforward(M: DiffModule) -> PushedModule:
    """
    phi_*(M, D'): D'(E_(k,j)) = (j/p) u^(-1) E_(k,j) + sum_i t^j A'[i][k] e_i, where the products
    t^j A'[i][k] are split by residue of the exponent mod p.
    """
    if not M.domain.is_annulus:
        raise PreconditionError("the Frobenius pushforward needs an annulus")
    base = M.with_derivation("d_prime")
    p, m = base.p, base.rank
    dom = u_domain(base.domain, p)
    prec = base.prec
    size = p * m
    out = linalg.zero_matrix(size, p, dom, prec)
    for k in range(m):
        for j in range(p):
            col = k * p + j
            for i in range(m):
                entry = base.action[i][k]
                if entry.is_zero():
                    continue
                for l, part in enumerate(decompose_by_residue(entry.shift(j), dom)):
                    if not part.is_zero():
                        out[i * p + l][col] = out[i * p + l][col] + part
            if j:
                out[col][col] = out[col][col] + TruncatedSeries.monomial(p, dom, -1, Fraction(j, p), prec)
    pushed = DiffModule.from_matrix(out, DerivationContext("d", base.ctx.sign))
    logger.info(f"pushforward: rank {m} over the t-annulus -> rank {size} over the u-annulus")
    return PushedModule(pushed, base)


# === Radii under pushforward ===

def phi_multiset(values: Sequence[Rational], p: int) -> List[Fraction]:
    """
    -log radii of phi_*(M) from those of M: v < 1/(p-1) gives p*v and p-1 copies of p/(p-1);
    v >= 1/(p-1) gives p copies of v + 1.
    """
    om = Fraction(1, p - 1)
    out: List[Fraction] = []
    for v in values:
        v = Fraction(v)
        if v < om:
            out.append(p * v)
            out.extend([Fraction(p, p - 1)] * (p - 1))
        else:
            out.extend([v + 1] * p)
    return sorted(out, reverse=True)


def check_phi_compatibility(base: RadiiMultiset, pushed: RadiiMultiset, p: int) -> Dict:
    """Compare the pushed radii with phi_multiset of the base radii"""
    expected = phi_multiset(base.values(), p)
    if pushed.is_exact:
        observed = pushed.values()
        return {"expected": [format_rational(v) for v in expected],
                "observed": [format_rational(v) for v in observed],
                "match": observed == expected}
    contained = all(lo <= v <= hi for v, (lo, hi) in zip(expected, pushed.entries))
    return {"expected": [format_rational(v) for v in expected],
            "observed": pushed.as_dict()["entries"],
            "match": contained}


# === Closure and descent ===

def gphi_closure(pushed: PushedModule, generators: Sequence[Vector], tol: Optional[int] = None) -> List[Vector]:
    """
    Generators of the smallest psi-stable submodule containing the given vectors: psi_i images
    are added until the echelon span stops growing.
    """
    tol = pushed.module.prec // 2 if tol is None else tol
    echelon = linalg.SeriesEchelon(tol)
    out: List[Vector] = []
    queue = list(generators)
    while queue:
        w = queue.pop(0)
        if not echelon.add(w):
            continue
        out.append(w)
        queue.extend(pushed.apply_psi(i, w) for i in range(1, pushed.p))
    logger.debug(f"gphi_closure: {len(generators)} generators -> {len(out)} vectors")
    return out


def is_psi_stable(pushed: PushedModule, vectors: Sequence[Vector], tol: Optional[int] = None) -> bool:
    """Every psi_i(v) lies in the span of the vectors"""
    tol = pushed.module.prec // 2 if tol is None else tol
    echelon = linalg.SeriesEchelon(tol)
    for v in vectors:
        echelon.add(v)
    return all(echelon.contains(pushed.apply_psi(i, v)) for v in vectors for i in range(1, pushed.p))


def descend(pushed: PushedModule, vectors: Sequence[Vector], tol: Optional[int] = None) -> List[Vector]:
    """
    Base submodule N with phi_*(N) spanned by psi-stable vectors: echelon basis of their base
    images, whose rank times p must equal the rank of the pushed span.
    """
    tol = pushed.module.prec // 2 if tol is None else tol
    if not is_psi_stable(pushed, vectors, tol):
        raise PreconditionError("descent needs a psi-stable family; take gphi_closure first")
    upstairs = linalg.SeriesEchelon(tol)
    for v in vectors:
        upstairs.add(v)
    downstairs = linalg.SeriesEchelon(tol)
    for v in vectors:
        downstairs.add(pushed.to_base(v))
    if downstairs.rank * pushed.p != upstairs.rank:
        raise PreconditionError(
            f"pushed span of rank {upstairs.rank} is not p times the base rank {downstairs.rank}",
            pushed_rank=upstairs.rank, base_rank=downstairs.rank,
        )
    return list(downstairs.rows)
