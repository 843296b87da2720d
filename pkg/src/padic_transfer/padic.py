"""Exact arithmetic in the unramified quadratic extension F = Q_p(sqrt(delta)) of Q_p.

Values are stored as exact elements of Q(sqrt(delta)), which embeds densely in F.
A scalar may optionally carry an absolute precision; arithmetic on such
scalars tracks error balls and raises rather than returning digits that are
no longer significant.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction

GUARD = 5
INF = math.inf


def default_precision() -> int:
    return int(os.environ.get("PADIC_TRANSFER_PREC", "40"))


class PrecisionExhausted(ArithmeticError):
    """Significant relative precision fell below the guard."""


class DivisionByZero(ZeroDivisionError):
    pass


class ZeroArgument(ValueError):
    """A character was evaluated at zero."""


def vp_int(n: int, p: int) -> float:
    if n == 0:
        return INF
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


_DELTA: dict[int, int] = {}


def nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod p."""
    if p not in _DELTA:
        if p == 2 or not is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        _DELTA[p] = next(d for d in range(2, p) if pow(d, (p - 1) // 2, p) == p - 1)
    return _DELTA[p]


def _frac_residue(num: int, den: int, p: int, k: int) -> tuple[int, int]:
    """Canonical representative of num/den modulo p^k as (r, j) meaning r / p^j."""
    j = 0
    while den % p == 0:
        den //= p
        j += 1
    mod = p ** (k + j)
    return (num * pow(den, -1, mod)) % mod, j


class PadicScalar:
    """Element (na + nb*sqrt(delta)) / den of F, optionally with an absolute precision."""

    __slots__ = ("p", "field", "na", "nb", "den", "absprec", "_val")

    def __init__(self, p, na=0, nb=0, den=1, field=None, absprec=None, _normalized=False):
        self.p = p
        if not _normalized:
            if den == 0:
                raise DivisionByZero("zero denominator")
            if den < 0:
                na, nb, den = -na, -nb, -den
            g = math.gcd(math.gcd(na, nb), den)
            if g > 1:
                na //= g
                nb //= g
                den //= g
        self.na = na
        self.nb = nb
        self.den = den
        self.field = field or ("F" if nb else "F0")
        self.absprec = absprec
        self._val = None
        if absprec is not None:
            self._check_precision()

    # construction -------------------------------------------------------

    @classmethod
    def from_parts(cls, p, a0, a1=0, field=None, absprec=None):
        a0 = Fraction(a0)
        a1 = Fraction(a1)
        den = a0.denominator * a1.denominator // math.gcd(a0.denominator, a1.denominator)
        return cls(p, a0.numerator * (den // a0.denominator),
                   a1.numerator * (den // a1.denominator), den, field, absprec)

    @classmethod
    def F0(cls, p, x):
        return cls.from_parts(p, x, 0, "F0")

    @classmethod
    def F(cls, p, a0, a1=0):
        return cls.from_parts(p, a0, a1, "F")

    @classmethod
    def uniformizer(cls, p, k=1):
        if k >= 0:
            return cls(p, p**k, 0, 1, "F0", _normalized=True)
        return cls(p, 1, 0, p ** (-k), "F0", _normalized=True)

    def _like(self, na, nb, den, field, absprec=None):
        return PadicScalar(self.p, na, nb, den, field, absprec)

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError(f"mixed primes {self.p} and {other.p}")
            return other
        if isinstance(other, int):
            return PadicScalar(self.p, other, 0, 1, "F0", _normalized=True)
        if isinstance(other, Fraction):
            return PadicScalar(self.p, other.numerator, 0, other.denominator, "F0", _normalized=True)
        return NotImplemented

    # basic data -----------------------------------------------------------

    @property
    def delta(self) -> int:
        return nonresidue(self.p)

    @property
    def a0(self) -> Fraction:
        return Fraction(self.na, self.den)

    @property
    def a1(self) -> Fraction:
        return Fraction(self.nb, self.den)

    def is_zero(self) -> bool:
        return self.na == 0 and self.nb == 0

    @property
    def val(self):
        """Valuation; +inf for exact zero."""
        if self._val is None:
            if self.na == 0 and self.nb == 0:
                if self.absprec is not None:
                    raise PrecisionExhausted("valuation of a value indistinguishable from zero")
                self._val = INF
            else:
                p = self.p
                self._val = min(vp_int(self.na, p), vp_int(self.nb, p)) - vp_int(self.den, p)
        return self._val

    def is_integral(self) -> bool:
        return self.is_zero() or self.val >= 0

    def is_unit(self) -> bool:
        return not self.is_zero() and self.val == 0

    def is_real(self) -> bool:
        return self.nb == 0

    def unit(self, N=None):
        """Residues (u0, u1) mod p^N of the unit part x / p^v(x)."""
        if self.is_zero():
            raise ZeroArgument("zero has no unit part")
        if N is None:
            N = self.relprec if self.absprec is not None else default_precision()
        v = self.val
        scale = Fraction(self.p) ** (-v)
        out = []
        for c in (self.a0 * scale, self.a1 * scale):
            r, j = _frac_residue(c.numerator, c.denominator, self.p, N)
            assert j == 0
            out.append(r % self.p**N)
        return tuple(out)

    @property
    def relprec(self):
        if self.absprec is None:
            return INF
        return self.absprec - self.val

    def _check_precision(self):
        if self.na == 0 and self.nb == 0:
            raise PrecisionExhausted("result is zero to working precision")
        if self.absprec - self.val < GUARD:
            raise PrecisionExhausted(
                f"relative precision {self.absprec - self.val} below guard {GUARD}")

    # arithmetic -------------------------------------------------------------

    def _combine_field(self, o):
        return "F" if (self.field == "F" or o.field == "F") else "F0"

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d1, d2 = self.den, o.den
        if d1 == d2:
            na, nb, den = self.na + o.na, self.nb + o.nb, d1
        else:
            na = self.na * d2 + o.na * d1
            nb = self.nb * d2 + o.nb * d1
            den = d1 * d2
        ap = _min_prec(self.absprec, o.absprec)
        return PadicScalar(self.p, na, nb, den, self._combine_field(o), ap)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.p, -self.na, -self.nb, self.den, self.field, self.absprec, True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = nonresidue(self.p)
        na = self.na * o.na + d * self.nb * o.nb
        nb = self.na * o.nb + self.nb * o.na
        ap = None
        if self.absprec is not None or o.absprec is not None:
            if self.is_zero() and self.absprec is None:
                ap = None
            elif o.is_zero() and o.absprec is None:
                ap = None
            else:
                a1 = INF if self.absprec is None else self.absprec + o.val
                a2 = INF if o.absprec is None else o.absprec + self.val
                ap = min(a1, a2)
                ap = None if ap == INF else ap
        return PadicScalar(self.p, na, nb, self.den * o.den, self._combine_field(o), ap)

    __rmul__ = __mul__

    def norm(self) -> "PadicScalar":
        d = nonresidue(self.p)
        ap = None if self.absprec is None else self.absprec + self.val
        return PadicScalar(self.p, self.na * self.na - d * self.nb * self.nb, 0,
                           self.den * self.den, "F0", ap)

    def trace(self) -> "PadicScalar":
        return PadicScalar(self.p, 2 * self.na, 0, self.den, "F0", self.absprec)

    def conj(self) -> "PadicScalar":
        return PadicScalar(self.p, self.na, -self.nb, self.den, self.field, self.absprec, True)

    def inv(self) -> "PadicScalar":
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        d = nonresidue(self.p)
        n = self.na * self.na - d * self.nb * self.nb
        ap = None if self.absprec is None else self.absprec - 2 * self.val
        # 1/x = conj(x) * den / norm_numerator
        return PadicScalar(self.p, self.na * self.den, -self.nb * self.den, n, self.field, ap)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        result = PadicScalar(self.p, 1, 0, 1, self.field, _normalized=True)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def eta(self) -> int:
        """The quadratic character (-1)^v of the unramified extension, extended to F^x."""
        if self.is_zero():
            raise ZeroArgument("eta(0)")
        return -1 if self.val % 2 else 1

    def mod_pk(self, k: int) -> "PadicScalar":
        """Canonical representative of the class of self modulo p^k O_F."""
        if k < 0:
            s = PadicScalar.uniformizer(self.p, -k)
            return (self * s).mod_pk(0) / s
        ra, ja = _frac_residue(self.na, self.den, self.p, k)
        rb, jb = _frac_residue(self.nb, self.den, self.p, k)
        j = max(ja, jb)
        return PadicScalar(self.p, ra * self.p ** (j - ja), rb * self.p ** (j - jb), self.p**j,
                           self.field)

    # comparison -------------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.nb == 0 and Fraction(self.na, self.den) == other
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self.p == other.p and self.na == other.na and self.nb == other.nb
                and self.den == other.den)

    def __hash__(self):
        return hash((self.p, self.na, self.nb, self.den))

    def key(self):
        return (self.na, self.nb, self.den)

    def __repr__(self):
        if self.nb == 0:
            return f"PadicScalar({self.a0}; p={self.p})"
        return f"PadicScalar({self.a0} + {self.a1}*sqrt({self.delta}); p={self.p})"

    def __str__(self):
        if self.nb == 0:
            return str(self.a0)
        return f"{self.a0}{'+' if self.a1 >= 0 else '-'}{abs(self.a1)}s"

    # serialization ----------------------------------------------------------

    def to_json(self, N=None) -> dict:
        if self.is_zero():
            return {"p": self.p, "field": self.field, "val": None, "unit": [0, 0],
                    "prec": N or default_precision()}
        if N is None:
            N = int(self.relprec) if self.absprec is not None else default_precision()
        return {"p": self.p, "field": self.field, "val": int(self.val),
                "unit": list(self.unit(N)), "prec": N}

    @classmethod
    def from_json(cls, obj, p=None, track=False) -> "PadicScalar":
        """Parse a literal; accepts the dict form, a bare integer, a fraction string or [a0, a1].

        By default the literal denotes the exact rational it spells out. With
        ``track=True`` its ``prec`` field becomes a relative precision that is
        carried through later arithmetic.
        """
        if isinstance(obj, dict):
            p = obj["p"]
            field = obj.get("field", "F")
            if obj.get("val") is None:
                return cls(p, 0, 0, 1, field)
            u = obj["unit"]
            u = list(u) if isinstance(u, (list, tuple)) else [u, 0]
            if len(u) == 1:
                u.append(0)
            if field == "F0" and Fraction(u[1]) != 0:
                raise ValueError("F0 literal with nonzero sqrt(delta) part")
            if Fraction(u[0]) % p == 0 and Fraction(u[1]) % p == 0:
                raise ValueError("unit part is not a unit")
            prec = obj.get("prec")
            x = cls.from_parts(p, u[0], u[1], field) * cls.uniformizer(p, obj["val"])
            if track and prec is not None:
                x = PadicScalar(p, x.na, x.nb, x.den, field, obj["val"] + int(prec))
            return x
        if p is None:
            raise ValueError("prime required for shorthand scalar literals")
        if isinstance(obj, (list, tuple)):
            return cls.from_parts(p, Fraction(obj[0]), Fraction(obj[1]) if len(obj) > 1 else 0,
                                  "F")
        return cls.from_parts(p, Fraction(obj), 0, "F0")

    def exact(self) -> "PadicScalar":
        """Same center with the error ball dropped."""
        return PadicScalar(self.p, self.na, self.nb, self.den, self.field, None, True)


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def scalar(p, a0=0, a1=0) -> PadicScalar:
    return PadicScalar.from_parts(p, a0, a1)


def norm_one_sample(p: int, seed=None, a=None) -> PadicScalar:
    """xi = a / conj(a) for a unit a; a = 1 gives xi = 1."""
    if a is None:
        rng = random.Random(seed)
        while True:
            a0, a1 = rng.randrange(p), rng.randrange(p)
            if (a0 * a0 - nonresidue(p) * a1 * a1) % p:
                break
        a = scalar(p, a0, a1)
    elif not isinstance(a, PadicScalar):
        a = scalar(p, *a) if isinstance(a, (list, tuple)) else scalar(p, a)
    if a.is_zero():
        raise ZeroArgument("a must be nonzero")
    return a / a.conj()


@dataclass(frozen=True)
class LogMultiple:
    """A rational multiple r * log q."""

    r: Fraction

    def __add__(self, other):
        return LogMultiple(self.r + other.r)

    def __neg__(self):
        return LogMultiple(-self.r)

    def __sub__(self, other):
        return LogMultiple(self.r - other.r)

    def scale(self, c) -> "LogMultiple":
        return LogMultiple(self.r * Fraction(c))

    def __str__(self):
        return f"{self.r}*log(q)"

    def to_json(self):
        return {"log_q_multiple": str(self.r)}
