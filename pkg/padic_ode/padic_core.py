"""
p-adic scalars at capped relative precision, factorial valuations and the LogVal radius scale
Radii and norms are carried as exact rationals r = -log_p(rho)
"""

import math
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Union

import gmpy2

from padic_ode.errors import InputFormatError, PreconditionError

logger = logging.getLogger(__name__)

INF = math.inf

Rational = Union[int, Fraction]


# === Rational formatting ===

def format_rational(x: Union[Rational, float]) -> str:
    """'num/den' (or an integer string) for exact values, 'inf' or '-inf' for infinities"""
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return str(Fraction(x))


def parse_rational(raw: Union[str, int, Fraction]) -> Union[Fraction, float]:
    """Inverse of format_rational"""
    if isinstance(raw, (int, Fraction)) and not isinstance(raw, bool):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise InputFormatError(f"Expected a 'num/den' string, got {raw!r}")
    text = raw.strip()
    if text in ("inf", "+inf"):
        return INF
    if text == "-inf":
        return -INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputFormatError(f"Malformed rational {raw!r}")


class LogVal(Fraction):
    """
    Exact nonnegative rational r = -log_p(rho) for a radius rho in (0, 1].
    r = 0 is rho = 1; omega(p) = 1/(p-1) is the radius p^(-1/(p-1)).
    """

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if self < 0:
            raise PreconditionError(f"LogVal must be nonnegative, got {Fraction(self)}")
        return self

    @classmethod
    def parse(cls, raw: Union[str, int, Fraction]) -> "LogVal":
        value = parse_rational(raw)
        if value == INF:
            raise InputFormatError("LogVal cannot be infinite here")
        return cls(value)

    def __repr__(self) -> str:
        return f"LogVal({format_rational(self)})"


def omega(p: int) -> LogVal:
    """LogVal of omega = p^(-1/(p-1))"""
    return LogVal(1, p - 1)


# === Valuations of integers and factorials ===

def val_int(p: int, n: int) -> Union[int, float]:
    """v_p(n); +inf for n = 0"""
    if n == 0:
        return INF
    return int(gmpy2.remove(gmpy2.mpz(n), p)[1])


def val_rational(p: int, x: Rational) -> Union[int, float]:
    x = Fraction(x)
    if x == 0:
        return INF
    return val_int(p, x.numerator) - val_int(p, x.denominator)


def val_factorial(p: int, i: int) -> int:
    """v_p(i!) by the Legendre sum of floor(i/p^k)"""
    if i < 0:
        raise PreconditionError(f"val_factorial needs i >= 0, got {i}")
    total = 0
    q = i // p
    while q:
        total += q
        q //= p
    return total


def val_odd_double_factorial(p: int, i: int) -> int:
    """
    v_p((2i-1)!!) with 0!! = 1 and (-1)!! = -1 (a unit, valuation 0).
    Uses (2i-1)!! = (2i)! / (2^i i!), so for odd p it is v((2i)!) - v(i!).
    """
    if p == 2:
        raise PreconditionError("double factorial valuations need an odd prime")
    if i < 0:
        raise PreconditionError(f"val_odd_double_factorial needs i >= 0, got {i}")
    if i == 0:
        return 0
    return val_factorial(p, 2 * i) - val_factorial(p, i)


def factorial_bounds_hold(p: int, i: int) -> bool:
    """
    Exact check of i/(p-1) - (1 + log_p i) <= v_p(i!) <= i/(p-1) for i >= 1.
    The lower bound reduces to p^q <= i with q = i/(p-1) - v - 1.
    """
    v = val_factorial(p, i)
    upper = Fraction(i, p - 1)
    if v > upper:
        return False
    q = upper - v - 1
    if q <= 0:
        return True
    return p ** q.numerator <= i ** q.denominator


# === Scalars ===

@dataclass(frozen=True, eq=False)
class PadicScalar:
    """
    unit * p^val with unit known modulo p^prec.
    Exact zero has val = +inf, unit = 0.
    """

    p: int
    val: Union[int, float]
    unit: Any            # gmpy2.mpz in [1, p^prec - 1], coprime to p
    prec: int

    # --- constructors ---

    @classmethod
    def zero(cls, p: int) -> "PadicScalar":
        return cls(p, INF, gmpy2.mpz(0), 0)

    @classmethod
    def from_int(cls, p: int, n: int, prec: int) -> "PadicScalar":
        return cls.from_fraction(p, Fraction(n), prec)

    @classmethod
    def from_fraction(cls, p: int, x: Rational, prec: int) -> "PadicScalar":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p)
        if prec <= 0:
            raise PreconditionError(f"precision must be positive, got {prec}")
        num, vn = gmpy2.remove(gmpy2.mpz(x.numerator), p)
        den, vd = gmpy2.remove(gmpy2.mpz(x.denominator), p)
        modulus = gmpy2.mpz(p) ** prec
        unit = (num * gmpy2.invert(den, modulus)) % modulus
        return cls(p, int(vn) - int(vd), unit, prec)

    @classmethod
    def from_parts(cls, p: int, val: int, unit: int, prec: int) -> "PadicScalar":
        """Normalizing constructor: strips p from unit and reduces it"""
        u = gmpy2.mpz(unit)
        if u == 0:
            return cls.zero(p)
        u, k = gmpy2.remove(u, p)
        return cls(p, val + int(k), u % (gmpy2.mpz(p) ** prec), prec)

    # --- predicates ---

    def is_zero(self) -> bool:
        return self.val == INF

    @property
    def abs_prec(self) -> Union[int, float]:
        """Absolute precision val + prec"""
        return INF if self.is_zero() else self.val + self.prec

    def _modulus(self, n: int):
        return gmpy2.mpz(self.p) ** n

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise PreconditionError(f"prime mismatch {self.p} vs {other.p}")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_fraction(self.p, other, max(self.prec, 1))
        return NotImplemented

    # --- arithmetic ---

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        p = self.p
        vmin = min(self.val, other.val)
        abs_prec = min(self.abs_prec, other.abs_prec)
        span = abs_prec - vmin
        modulus = self._modulus(span)
        s = (self.unit * self._modulus(self.val - vmin)
             + other.unit * self._modulus(other.val - vmin)) % modulus
        if s == 0:
            return PadicScalar.zero(p)
        s, k = gmpy2.remove(s, p)
        k = int(k)
        return PadicScalar(p, vmin + k, s, span - k)

    __radd__ = __add__

    def __neg__(self) -> "PadicScalar":
        if self.is_zero():
            return self
        return PadicScalar(self.p, self.val, self._modulus(self.prec) - self.unit, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return PadicScalar.zero(self.p)
        prec = min(self.prec, other.prec)
        return PadicScalar(self.p, self.val + other.val,
                           (self.unit * other.unit) % self._modulus(prec), prec)

    __rmul__ = __mul__

    def inv(self) -> "PadicScalar":
        if self.is_zero():
            raise PreconditionError("inversion of exact zero")
        return PadicScalar(self.p, -self.val,
                           gmpy2.invert(self.unit, self._modulus(self.prec)), self.prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def div_by_p(self) -> "PadicScalar":
        """Exact division by p: valuation drops by one, unit unchanged"""
        if self.is_zero():
            return self
        return PadicScalar(self.p, self.val - 1, self.unit, self.prec)

    def shift(self, k: int) -> "PadicScalar":
        """Multiply by p^k"""
        if self.is_zero():
            return self
        return PadicScalar(self.p, self.val + k, self.unit, self.prec)

    def with_prec(self, prec: int) -> "PadicScalar":
        """Cap the relative precision at prec"""
        if self.is_zero() or prec >= self.prec:
            return self
        return PadicScalar(self.p, self.val, self.unit % self._modulus(prec), prec)

    # --- comparison and export ---

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except PreconditionError:
            return False
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.val != other.val:
            return False
        prec = min(self.prec, other.prec)
        modulus = self._modulus(prec)
        return (self.unit - other.unit) % modulus == 0

    __hash__ = None

    def to_fraction(self) -> Fraction:
        """
        Smallest rational congruent to the scalar, by rational reconstruction
        of the unit modulo p^prec; falls back to the balanced residue.
        """
        if self.is_zero():
            return Fraction(0)
        modulus = self._modulus(self.prec)
        unit = _reconstruct(self.unit, modulus)
        return unit * Fraction(self.p) ** self.val

    def as_dict(self) -> Dict[str, Any]:
        if self.is_zero():
            return {"val": None, "unit": "0", "prec": self.prec}
        return {"val": int(self.val), "unit": str(int(self.unit)), "prec": self.prec}

    def __repr__(self) -> str:
        if self.is_zero():
            return f"PadicScalar(p={self.p}, 0)"
        return f"PadicScalar(p={self.p}, {format_rational(self.to_fraction())}, prec={self.prec})"


def _reconstruct(u, modulus) -> Fraction:
    """Rational reconstruction a/b = u mod m with |a|, b <= sqrt(m/2)"""
    bound = gmpy2.isqrt(modulus // 2)
    r0, r1 = modulus, gmpy2.mpz(u) % modulus
    s0, s1 = gmpy2.mpz(0), gmpy2.mpz(1)
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 != 0 and abs(s1) <= bound and gmpy2.gcd(s1, modulus) == 1:
        return Fraction(int(r1), int(s1))
    balanced = int(u) if u <= modulus // 2 else int(u - modulus)
    return Fraction(balanced)
