"""
Division-free linear algebra over the series rings
Characteristic polynomials by the Samuelson-Berkowitz recursion, determinants and
adjugates through Cayley-Hamilton; only ring operations on TruncatedSeries are used
"""

import logging
from typing import List, Optional, Sequence

from padic_ode.series import RingDomain, TruncatedSeries

logger = logging.getLogger(__name__)

Matrix = List[List[TruncatedSeries]]
Vector = List[TruncatedSeries]


def zero_matrix(n: int, p: int, domain: RingDomain, prec: int, cols: int = None) -> Matrix:
    cols = n if cols is None else cols
    return [[TruncatedSeries.zero(p, domain, prec) for _ in range(cols)] for _ in range(n)]


def identity(n: int, p: int, domain: RingDomain, prec: int) -> Matrix:
    out = zero_matrix(n, p, domain, prec)
    for i in range(n):
        out[i][i] = TruncatedSeries.one(p, domain, prec)
    return out


def _sum(terms: Sequence[TruncatedSeries], like: TruncatedSeries) -> TruncatedSeries:
    acc = None
    for term in terms:
        if term.is_zero():
            continue
        acc = term if acc is None else acc + term
    return acc if acc is not None else TruncatedSeries.zero(like.p, like.domain, like.prec)


def mat_vec(A: Matrix, v: Vector) -> Vector:
    return [_sum([a * x for a, x in zip(row, v)], v[0]) for row in A]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    cols = list(zip(*B))
    return [[_sum([a * b for a, b in zip(row, col)], row[0]) for col in cols] for row in A]


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_neg(A: Matrix) -> Matrix:
    return [[-a for a in row] for row in A]


def transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def columns_to_matrix(columns: Sequence[Vector]) -> Matrix:
    """Matrix whose j-th column is columns[j]"""
    return [list(row) for row in zip(*columns)]


def charpoly(A: Matrix) -> List[TruncatedSeries]:
    """
    Coefficients [1, c_1, ..., c_n] of det(x I - A), highest power first.
    """
    n = len(A)
    a11 = A[0][0]
    one = TruncatedSeries.one(a11.p, a11.domain, a11.prec)
    if n == 1:
        return [one, -a11]
    R = A[0][1:]
    C = [row[0] for row in A[1:]]
    A1 = [row[1:] for row in A[1:]]
    q = charpoly(A1)

    col = [one, -a11]
    w = C
    for _ in range(n - 1):
        col.append(-_sum([r * x for r, x in zip(R, w)], a11))
        w = mat_vec(A1, w)
    col = col[: n + 1]
    out = []
    for i in range(n + 1):
        out.append(_sum([col[i - j] * q[j] for j in range(min(i, n - 1) + 1)], a11))
    return out


def det(A: Matrix) -> TruncatedSeries:
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    c = charpoly(A)
    return c[n] if n % 2 == 0 else -c[n]


def adjugate(A: Matrix) -> Matrix:
    """adj(A) = (-1)^(n+1) (A^(n-1) + c_1 A^(n-2) + ... + c_(n-1) I)"""
    n = len(A)
    first = A[0][0]
    p, domain, prec = first.p, first.domain, first.prec
    if n == 1:
        return [[TruncatedSeries.one(p, domain, prec)]]
    if n == 2:
        return [[A[1][1], -A[0][1]], [-A[1][0], A[0][0]]]
    c = charpoly(A)
    Q = identity(n, p, domain, prec)
    for k in range(1, n):
        Q = mat_mul(Q, A)
        for i in range(n):
            Q[i][i] = Q[i][i] + c[k]
    return Q if n % 2 == 1 else mat_neg(Q)


# === Echelon bases of submodules ===

def is_zero_vector(v: Vector) -> bool:
    return all(not c.coeffs for c in v)


def monomial_multiple(w: Vector, v: Vector) -> bool:
    """w = c t^k v exactly on the common window, for a scalar c and an integer k"""
    first = next((i for i, comp in enumerate(v) if comp.coeffs), None)
    if first is None or not w[first].coeffs:
        return False
    e_v, e_w = min(v[first].coeffs), min(w[first].coeffs)
    c = w[first].coeffs[e_w] * v[first].coeffs[e_v].inv()
    k = e_w - e_v
    for a, b in zip(w, v):
        if not a.coeffs and not b.coeffs:
            continue
        diff = a - b.shift(k).scale(c) if k >= 0 else a.shift(-k) - b.scale(c)
        if not diff.is_zero_on_window():
            return False
    return True


def normalize(v: Vector, pivot: int) -> Vector:
    """
    Divide by the dominant monomial c t^e of the pivot component (its lowest-exponent term of
    least valuation); over the disc the shift is the common t-power of all components.
    """
    comp = v[pivot]
    least = min(c.val for c in comp.coeffs.values())
    e = min(k for k, c in comp.coeffs.items() if c.val == least)
    inv = comp.coeffs[e].inv()
    if not comp.domain.is_annulus:
        e = min(min(c.coeffs) for c in v if c.coeffs)
    return [c.shift(-e).scale(inv) for c in v]


class SeriesEchelon:
    """
    Unit-pivot echelon basis of a submodule of F^n, built fraction-free: a new vector w is
    reduced by w <- r[j] w - w[j] r for every stored row r with pivot j, and counts as
    dependent when what is left has valuation >= tol above the valuation of w.
    """

    def __init__(self, tol: int = 30):
        self.tol = tol
        self.rows: List[Vector] = []
        self.pivots: List[int] = []
        self._seen: List[Vector] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _pick_pivot(self, w: Vector) -> Optional[int]:
        live = [i for i, c in enumerate(w) if c.coeffs and i not in self.pivots]
        if not live:
            return None
        units = [i for i in live if w[i].is_unit()]
        if units:
            return units[0]
        return min(live, key=lambda i: w[i].min_valuation())

    def reduce(self, w: Vector) -> Vector:
        for row, j in zip(self.rows, self.pivots):
            if not w[j].coeffs:
                continue
            head = w[j]
            w = [row[j] * a - head * b for a, b in zip(w, row)]
            w[j] = TruncatedSeries.zero(head.p, head.domain, head.prec)
        return w

    def _negligible(self, w: Vector, scale) -> bool:
        return all(not c.coeffs or c.min_valuation() >= scale + self.tol for c in w)

    def contains(self, w: Vector) -> bool:
        if is_zero_vector(w) or any(monomial_multiple(w, v) for v in self._seen):
            return True
        scale = min(c.min_valuation() for c in w if c.coeffs)
        return self._negligible(self.reduce(w), scale)

    def add(self, w: Vector) -> bool:
        """Insert w; False when it already lies in the span"""
        if is_zero_vector(w) or any(monomial_multiple(w, v) for v in self._seen):
            return False
        scale = min(c.min_valuation() for c in w if c.coeffs)
        reduced = self.reduce(w)
        if self._negligible(reduced, scale):
            return False
        pivot = self._pick_pivot(reduced)
        if pivot is None:
            return False
        self.rows.append(normalize(reduced, pivot))
        self.pivots.append(pivot)
        self._seen.append(w)
        return True
