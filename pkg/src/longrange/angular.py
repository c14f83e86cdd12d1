"""Exact angular-momentum algebra.

All public functions take angular momenta and projections as *doubled*
integers, so that j = 3/2 is passed as 3.  Exact results are returned as
:class:`Surd` values; the ``*_value`` variants return cached floats.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

_TRIAL_LIMIT = 10**6


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


@lru_cache(maxsize=4096)
def _square_split(n: int) -> tuple[int, int]:
    """Return (a, r) with n = a*a*r, r square-free when fully factored."""
    if n < 2:
        return 1, n
    a, r = 1, 1
    d = 2
    while d * d <= n and d <= _TRIAL_LIMIT:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            a *= d ** (e // 2)
            if e % 2:
                r *= d
        d += 1 if d == 2 else 2
    s = math.isqrt(n)
    if s * s == n:
        a *= s
    else:
        r *= n
    return a, r


def parse_halfint(text: str | int | Fraction) -> int:
    """Convert '3/2', 1.5 or Fraction(3, 2) to the doubled integer 3."""
    value = Fraction(str(text)) if not isinstance(text, Fraction) else text
    twice = 2 * value
    if twice.denominator != 1:
        raise ValueError(f"{text!r} is not an integer or half-integer")
    return int(twice)


def _check_projection(tj: int, tm: int) -> None:
    if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
        raise ValueError(f"invalid projection: 2j={tj}, 2m={tm}")


def triangle_ok(ta: int, tb: int, tc: int) -> bool:
    """True iff |a-b| <= c <= a+b and a+b+c is an integer (doubled inputs)."""
    if min(ta, tb, tc) < 0:
        return False
    return abs(ta - tb) <= tc <= ta + tb and (ta + tb + tc) % 2 == 0


class Surd:
    """Exact number sign * (p/q) * sqrt(r/s) in canonical form."""

    __slots__ = ("sign", "rational", "radicand", "_square")

    def __init__(self, sign: int, square: Fraction):
        square = Fraction(square)
        if square < 0:
            raise ValueError("square must be non-negative")
        if sign == 0 or square == 0:
            self.sign, self.rational, self.radicand = 0, Fraction(0), Fraction(1)
            self._square = Fraction(0)
            return
        a, r = _square_split(square.numerator)
        b, s = _square_split(square.denominator)
        self.sign = 1 if sign > 0 else -1
        self.rational = Fraction(a, b)
        self.radicand = Fraction(r, s)
        self._square = square

    @classmethod
    def zero(cls) -> "Surd":
        return cls(0, Fraction(0))

    @classmethod
    def from_product(cls, factor: Fraction | int, square: Fraction | int) -> "Surd":
        """factor * sqrt(square) with rational factor."""
        factor = Fraction(factor)
        return cls((factor > 0) - (factor < 0), factor * factor * Fraction(square))

    @property
    def square(self) -> Fraction:
        return self._square

    @property
    def is_rational(self) -> bool:
        return self.radicand == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.sign * self.rational

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * float(self.rational) * math.sqrt(float(self.radicand))

    def __bool__(self) -> bool:
        return self.sign != 0

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Surd.from_product(other, 1)
        if not isinstance(other, Surd):
            return NotImplemented
        return self.sign == other.sign and self._square == other._square

    def __hash__(self) -> int:
        return hash((self.sign, self._square))

    def __neg__(self) -> "Surd":
        return Surd(-self.sign, self._square)

    def __mul__(self, other) -> "Surd":
        if isinstance(other, (int, Fraction)):
            other = Surd.from_product(other, 1)
        if not isinstance(other, Surd):
            return NotImplemented
        return Surd(self.sign * other.sign, self._square * other._square)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Surd":
        if isinstance(other, (int, Fraction)):
            other = Surd.from_product(other, 1)
        if not other:
            raise ZeroDivisionError("division by zero Surd")
        return Surd(self.sign * other.sign, self._square / other._square)

    def __repr__(self) -> str:
        return f"Surd({self})"

    def __str__(self) -> str:
        if self.sign == 0:
            return "0"
        p, q = self.rational.numerator, self.rational.denominator
        r, s = self.radicand.numerator, self.radicand.denominator
        sign = "-" if self.sign < 0 else ""
        if p == 1 and q == 1 and r > 1 and s > 1:
            return f"{sign}sqrt({r}/{s})"
        if r == 1:
            num = str(p)
        elif p == 1:
            num = f"sqrt({r})"
        else:
            num = f"{p}*sqrt({r})"
        if s == 1:
            den = "" if q == 1 else str(q)
        elif q == 1:
            den = f"sqrt({s})"
        else:
            den = f"({q}*sqrt({s}))"
        return f"{sign}{num}/{den}" if den else f"{sign}{num}"


class SurdSum:
    """Exact linear combination sum_k c_k sqrt(k) over square-free integers k.

    Closed under +, - and *, which is what exact eigenvalue work on small
    blocks needs (for example -(13*sqrt(3)+16)/100).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def of(cls, value: "Surd | SurdSum | int | Fraction") -> "SurdSum":
        if isinstance(value, SurdSum):
            return value
        if isinstance(value, (int, Fraction)):
            return cls({1: Fraction(value)})
        if not value:
            return cls()
        r, s = value.radicand.numerator, value.radicand.denominator
        a, k = _square_split(r * s)
        return cls({k: value.sign * value.rational * a / s})

    @classmethod
    def sqrt_of(cls, square: Fraction | int) -> "SurdSum":
        return cls.of(Surd(1, Fraction(square)))

    def __add__(self, other) -> "SurdSum":
        other = SurdSum.of(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return SurdSum(out)

    __radd__ = __add__

    def __neg__(self) -> "SurdSum":
        return SurdSum({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "SurdSum":
        return self + (-SurdSum.of(other))

    def __rsub__(self, other) -> "SurdSum":
        return SurdSum.of(other) - self

    def __mul__(self, other) -> "SurdSum":
        other = SurdSum.of(other)
        out: dict[int, Fraction] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                g = math.gcd(k1, k2)
                k = (k1 // g) * (k2 // g)
                out[k] = out.get(k, Fraction(0)) + v1 * v2 * g
        return SurdSum(out)

    __rmul__ = __mul__

    def __truediv__(self, other: int | Fraction) -> "SurdSum":
        return SurdSum({k: v / Fraction(other) for k, v in self.terms.items()})

    @property
    def is_rational(self) -> bool:
        return set(self.terms) <= {1}

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.terms.get(1, Fraction(0))

    def as_surd(self) -> Surd:
        """Collapse to a single Surd; raises when several radicands survive."""
        if not self.terms:
            return Surd.zero()
        if len(self.terms) != 1:
            raise ValueError(f"{self} is not a single surd")
        (k, v), = self.terms.items()
        return Surd.from_product(v, k)

    def __float__(self) -> float:
        return math.fsum(float(v) * math.sqrt(k) for k, v in self.terms.items())

    def __eq__(self, other) -> bool:
        try:
            other = SurdSum.of(other)
        except (TypeError, AttributeError):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self) -> str:
        return f"SurdSum({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            v = self.terms[k]
            parts.append(str(v) if k == 1 else f"{v}*sqrt({k})")
        return " + ".join(parts).replace("+ -", "- ")


def clebsch_gordan(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> Surd:
    """Exact C^{JM}_{j1 m1 j2 m2} (Condon-Shortley) from the Racah sum."""
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tJ, tM)):
        _check_projection(tj, tm)
    if tm1 + tm2 != tM or not triangle_ok(tj1, tj2, tJ):
        return Surd.zero()
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        den = _fact(k) * _fact(a - k) * _fact(b - k) * _fact(c - k) * _fact(d + k) * _fact(e + k)
        total += Fraction((-1) ** k, den)
    square = Fraction(
        (tJ + 1)
        * _fact((tJ + tj1 - tj2) // 2)
        * _fact((tJ - tj1 + tj2) // 2)
        * _fact(a)
        * _fact((tJ + tM) // 2)
        * _fact((tJ - tM) // 2)
        * _fact((tj1 - tm1) // 2)
        * _fact((tj1 + tm1) // 2)
        * _fact((tj2 - tm2) // 2)
        * _fact((tj2 + tm2) // 2),
        _fact((tj1 + tj2 + tJ) // 2 + 1),
    )
    return Surd.from_product(total, square)


def cg_stretched(tla: int, tma: int, tlb: int, tmb: int) -> Surd:
    """Closed form of C^{l m}_{la ma lb mb} for l = la + lb (doubled inputs)."""
    if tla % 2 or tlb % 2:
        raise ValueError("stretched coupling requires integer ranks")
    if abs(tma) > tla or abs(tmb) > tlb or (tla - tma) % 2 or (tlb - tmb) % 2:
        return Surd.zero()
    la, lb, ma, mb = tla // 2, tlb // 2, tma // 2, tmb // 2
    l, m = la + lb, ma + mb
    square = Fraction(
        _fact(2 * la) * _fact(2 * lb) * _fact(l + m) * _fact(l - m),
        _fact(2 * l) * _fact(la + ma) * _fact(la - ma) * _fact(lb + mb) * _fact(lb - mb),
    )
    return Surd(1, square)


def _delta_square(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        _fact((ta + tb - tc) // 2) * _fact((ta - tb + tc) // 2) * _fact((-ta + tb + tc) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


def wigner_6j(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> Surd:
    """Exact {a b c; d e f} from the Racah single sum (doubled inputs)."""
    triads = ((ta, tb, tc), (ta, te, tf), (td, tb, tf), (td, te, tc))
    if not all(triangle_ok(*t) for t in triads):
        return Surd.zero()
    s1 = (ta + tb + tc) // 2
    s2 = (ta + te + tf) // 2
    s3 = (td + tb + tf) // 2
    s4 = (td + te + tc) // 2
    p1 = (ta + tb + td + te) // 2
    p2 = (ta + tc + td + tf) // 2
    p3 = (tb + tc + te + tf) // 2
    total = Fraction(0)
    for t in range(max(s1, s2, s3, s4), min(p1, p2, p3) + 1):
        den = (
            _fact(t - s1) * _fact(t - s2) * _fact(t - s3) * _fact(t - s4)
            * _fact(p1 - t) * _fact(p2 - t) * _fact(p3 - t)
        )
        total += Fraction((-1) ** t * _fact(t + 1), den)
    square = math.prod((_delta_square(*t) for t in triads), start=Fraction(1))
    return Surd.from_product(total, square)


def wigner_9j(ta, tb, tc, td, te, tf, tg, th, ti) -> Surd:
    """Exact {a b c; d e f; g h i} as a sum over products of three 6j symbols."""
    rows = ((ta, tb, tc), (td, te, tf), (tg, th, ti))
    cols = ((ta, td, tg), (tb, te, th), (tc, tf, ti))
    if not all(triangle_ok(*t) for t in rows + cols):
        return Surd.zero()
    lo = max(abs(ta - ti), abs(td - th), abs(tb - tf))
    hi = min(ta + ti, td + th, tb + tf)
    total = SurdSum()
    for tx in range(lo, hi + 1, 2):
        term = (
            wigner_6j(ta, td, tg, th, ti, tx)
            * wigner_6j(tb, te, th, td, tx, tf)
            * wigner_6j(tc, tf, ti, tx, ta, tb)
        )
        if term:
            total = total + SurdSum.of(term * (tx + 1))
    return total.as_surd()


@lru_cache(maxsize=None)
def cg_value(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    if tm1 + tm2 != tM or not triangle_ok(tj1, tj2, tJ):
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    return float(clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tM))


@lru_cache(maxsize=None)
def sixj_value(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> float:
    return float(wigner_6j(ta, tb, tc, td, te, tf))


@lru_cache(maxsize=None)
def ninej_value(ta, tb, tc, td, te, tf, tg, th, ti) -> float:
    return float(wigner_9j(ta, tb, tc, td, te, tf, tg, th, ti))


def projections(tj: int) -> Iterable[int]:
    """Doubled projections -j..j."""
    return range(-tj, tj + 1, 2)
