"""Exact sums of rational multiples of rational prime powers, and certified
comparison of them by outward-rounded interval refinement.

Every scalar that shows up in the package (Haar measures, kernel weights,
norms, operator constants) is a finite sum

    sum_i  c_i * prod_p p**e_{i,p}

with rational ``c_i`` and rational ``e_{i,p}``.  The canonical form keeps only
the fractional part of each exponent in the term key and folds the integer
part into the rational coefficient, so ``2**(5/4)`` and ``2 * 2**(1/4)`` are
the same term.  Terms with distinct keys are linearly independent over Q, so
two canonical forms denote the same real number iff they are identical.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import gmpy2

from .errors import MultiTermPower, PrecisionExhausted

Rational = Union[int, Fraction]

DEFAULT_MAX_BITS = 4096
DEFAULT_DIGITS = 12
WORK_BITS = 192


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and "num/den" strings into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass a Fraction or 'num/den'")
    return Fraction(x)


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple:
    """Prime factorization of a positive integer as ((p, e), ...)."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out = []
    for p in (2, 3, 5, 7, 11, 13):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        if n < 17 * 17:
            out.append((n, 1))
        else:
            from sympy import factorint

            out.extend(sorted((int(q), int(e)) for q, e in factorint(n).items()))
    return tuple(sorted(out))


SMALL_RATIONAL_LIMIT = 1 << 64


def _cheap_to_factor(n: int) -> bool:
    n = abs(n)
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            n //= p
    return n < SMALL_RATIONAL_LIMIT


def has_small_rational(x) -> bool:
    """Whether every coefficient of x is cheap to factor, which exact
    fractional powers need."""
    return all(_cheap_to_factor(c.numerator) and _cheap_to_factor(c.denominator) for _, c in x.terms)


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == ((n, 1),)


# ---------------------------------------------------------------------------
# intervals


def _log2_estimate(q: Fraction) -> int:
    return abs(q.numerator).bit_length() - q.denominator.bit_length()


def _floor_scaled(q: Fraction, s: int) -> int:
    if s >= 0:
        return (q.numerator << s) // q.denominator
    return q.numerator // (q.denominator << -s)


def round_down(q: Fraction, bits: int) -> Fraction:
    """Largest dyadic with ``bits`` significant bits that is <= q."""
    if q == 0:
        return Fraction(0)
    s = bits - _log2_estimate(q)
    return Fraction(_floor_scaled(q, s), 1) / Fraction(2) ** s


def round_up(q: Fraction, bits: int) -> Fraction:
    return -round_down(-q, bits)


def _root_bounds(t: Fraction, b: int, bits: int):
    """Bounds (lo, hi) on t**(1/b) for t > 0."""
    if b == 1:
        return t, t
    s = bits + 2 - _log2_estimate(t) // b
    x = t * Fraction(2) ** (s * b)
    lo_int = x.numerator // x.denominator
    hi_int = -((-x.numerator) // x.denominator)
    rl = int(gmpy2.iroot(gmpy2.mpz(lo_int), b)[0])
    rh, exact = gmpy2.iroot(gmpy2.mpz(hi_int), b)
    rh = int(rh) + (0 if exact else 1)
    scale = Fraction(2) ** s
    return Fraction(rl) / scale, Fraction(rh) / scale


def pow_bounds(q: Fraction, e: Fraction, bits: int):
    """Bounds (lo, hi) on q**e for q >= 0 and rational e."""
    e = Fraction(e)
    if q < 0:
        raise ValueError("pow_bounds needs a nonnegative base")
    if q == 0:
        if e <= 0:
            raise ZeroDivisionError("0 raised to a nonpositive power")
        return Fraction(0), Fraction(0)
    if e < 0:
        lo, hi = pow_bounds(q, -e, bits + 2)
        return 1 / hi, 1 / lo
    if e.denominator == 1:
        v = q ** e.numerator
        return v, v
    return _root_bounds(q ** e.numerator, e.denominator, bits)


@dataclass(frozen=True)
class Interval:
    """Closed interval with rational endpoints; arithmetic is exact on the
    endpoints, and :meth:`rounded` widens outward to short dyadics."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q) -> "Interval":
        q = as_fraction(q)
        return cls(q, q)

    @classmethod
    def coerce(cls, x, bits: int = WORK_BITS) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, PPowerSum):
            return x.enclose(bits)
        return cls.point(x)

    def rounded(self, bits: int) -> "Interval":
        return Interval(round_down(self.lo, bits), round_up(self.hi, bits))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, q) -> bool:
        return self.lo <= q <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __add__(self, other):
        o = Interval.coerce(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.coerce(other))

    def __rsub__(self, other):
        return Interval.coerce(other) - self

    def __mul__(self, other):
        o = Interval.coerce(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Interval.coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval division by an interval containing 0")
        return self * Interval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return Interval.coerce(other) / self

    def pow(self, e, bits: int = WORK_BITS) -> "Interval":
        e = as_fraction(e)
        if self.lo < 0:
            raise ValueError("fractional power of an interval reaching below 0")
        if e >= 0:
            return Interval(pow_bounds(self.lo, e, bits)[0], pow_bounds(self.hi, e, bits)[1])
        return Interval(pow_bounds(self.hi, e, bits)[0], pow_bounds(self.lo, e, bits)[1])

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"Interval({float(self.lo):.17g}, {float(self.hi):.17g})"


# ---------------------------------------------------------------------------
# exact p-power sums

Key = tuple  # ((prime, Fraction in (0, 1)), ...) sorted by prime


def _normalize_exps(exps) -> tuple:
    """Split exponents into (integer-part factor, fractional key)."""
    factor = Fraction(1)
    key = []
    for p, e in sorted(exps):
        e = as_fraction(e)
        n = math.floor(e)
        f = e - n
        if n:
            factor *= Fraction(p) ** n
        if f:
            key.append((p, f))
    return factor, tuple(key)


def _merge_keys(k1: Key, k2: Key):
    exps: dict = {}
    for p, f in k1:
        exps[p] = exps.get(p, 0) + f
    for p, f in k2:
        exps[p] = exps.get(p, 0) + f
    return _normalize_exps(exps.items())


@lru_cache(maxsize=65536)
def _radical_bounds(key: Key, bits: int):
    if not key:
        return Fraction(1), Fraction(1)
    L = 1
    for _, f in key:
        L = L * f.denominator // math.gcd(L, f.denominator)
    n = 1
    for p, f in key:
        n *= p ** int(f * L)
    return _root_bounds(Fraction(n), L, bits)


class PPowerSum:
    """Immutable, always-canonical exact scalar.

    >>> PPowerSum.power(2, Fraction(1, 2)) * PPowerSum.power(2, Fraction(1, 2))
    PPowerSum('2')
    """

    __slots__ = ("_terms", "_hash", "_encl")

    def __init__(self, terms: Mapping[Key, Fraction] | None = None):
        t = {k: Fraction(c) for k, c in (terms or {}).items() if c}
        self._terms = tuple(sorted(t.items()))
        self._hash = None
        self._encl = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_terms(cls, raw: Iterable) -> "PPowerSum":
        """Build from raw ``(coef, {prime: exponent})`` pairs (not yet canonical)."""
        acc: dict = {}
        for coef, exps in raw:
            coef = as_fraction(coef)
            if not coef:
                continue
            items = exps.items() if isinstance(exps, Mapping) else exps
            factor, key = _normalize_exps((int(p), e) for p, e in items)
            acc[key] = acc.get(key, 0) + coef * factor
        return cls(acc)

    @classmethod
    def rational(cls, q) -> "PPowerSum":
        return cls({(): as_fraction(q)})

    @classmethod
    def power(cls, base, e, coef=1) -> "PPowerSum":
        """coef * base**e for a positive rational base (factored into primes)."""
        base = as_fraction(base)
        if base <= 0:
            raise ValueError("power() needs a positive base")
        e = as_fraction(e)
        exps: dict = {}
        for p, m in factorize(base.numerator) if base.numerator > 1 else ():
            exps[p] = exps.get(p, 0) + m * e
        for p, m in factorize(base.denominator) if base.denominator > 1 else ():
            exps[p] = exps.get(p, 0) - m * e
        return cls.from_terms([(coef, exps)])

    @classmethod
    def zero(cls) -> "PPowerSum":
        return cls()

    @classmethod
    def one(cls) -> "PPowerSum":
        return cls.rational(1)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> tuple:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_single_term(self) -> bool:
        return len(self._terms) == 1

    def is_rational(self) -> bool:
        return self.is_zero() or (len(self._terms) == 1 and self._terms[0][0] == ())

    def as_fraction(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms[0][1]

    def exponent_map(self) -> tuple:
        """For a single term: (sign, {prime: exponent}) with the coefficient
        folded in, e.g. ``1 + 1`` gives ``(1, {2: 1})``."""
        if not self.is_single_term():
            raise MultiTermPower("exponent_map needs a single-term value")
        key, c = self._terms[0]
        exps = {p: f for p, f in key}
        for part, sgn in ((abs(c.numerator), 1), (c.denominator, -1)):
            if part > 1:
                for p, m in factorize(part):
                    exps[p] = exps.get(p, 0) + sgn * m
        return (1 if c > 0 else -1), {p: Fraction(e) for p, e in sorted(exps.items()) if e}

    def sign(self, max_bits: int = DEFAULT_MAX_BITS) -> int:
        if self.is_zero():
            return 0
        if self.is_single_term():
            return 1 if self._terms[0][1] > 0 else -1
        return {Ordering.LESS: -1, Ordering.GREATER: 1}[
            compare_certified(self, ZERO, max_bits).outcome
        ]

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _lift(x) -> "PPowerSum":
        if isinstance(x, PPowerSum):
            return x
        if isinstance(x, (int, Fraction, str)):
            return PPowerSum.rational(x)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        acc = dict(self._terms)
        for k, c in o._terms:
            acc[k] = acc.get(k, 0) + c
        return PPowerSum(acc)

    __radd__ = __add__

    def __neg__(self):
        return PPowerSum({k: -c for k, c in self._terms})

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PPowerSum({k: c * other for k, c in self._terms})
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        acc: dict = {}
        for k1, c1 in self._terms:
            for k2, c2 in o._terms:
                factor, key = _merge_keys(k1, k2)
                acc[key] = acc.get(key, 0) + c1 * c2 * factor
        return PPowerSum(acc)

    __rmul__ = __mul__

    def inverse(self) -> "PPowerSum":
        if not self.is_single_term():
            raise MultiTermPower("only single-term values can be inverted exactly")
        key, c = self._terms[0]
        factor, nkey = _normalize_exps((p, -f) for p, f in key)
        return PPowerSum({nkey: factor / c})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, e):
        return pow_rational(self, e)

    # -- numerics -----------------------------------------------------------

    def enclose(self, bits: int = WORK_BITS) -> Interval:
        """Outward-rounded enclosure, each term accurate to ~``bits`` relative bits."""
        hit = self._encl.get(bits)
        if hit is not None:
            return hit
        lo = hi = Fraction(0)
        for key, c in self._terms:
            rl, rh = _radical_bounds(key, bits + 4)
            a, b = (c * rl, c * rh) if c > 0 else (c * rh, c * rl)
            lo += round_down(a, bits + 8)
            hi += round_up(b, bits + 8)
        out = Interval(lo, hi)
        self._encl[bits] = out
        return out

    def __float__(self):
        return float(self.enclose(64).mid)

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PPowerSum.rational(other)
        if not isinstance(other, PPowerSum):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for key, c in self._terms:
            rad = "*".join(f"{p}^({fraction_str(f)})" for p, f in key)
            if not rad:
                parts.append(str(c))
            elif c == 1:
                parts.append(rad)
            else:
                parts.append(f"{c}*{rad}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"PPowerSum('{self}')"

    # -- serialization -------------------------------------------------------

    def to_json(self) -> list:
        return [
            {"coef": fraction_str(c), "exps": {str(p): fraction_str(f) for p, f in key}}
            for key, c in self._terms
        ]

    @classmethod
    def from_json(cls, data) -> "PPowerSum":
        if isinstance(data, (int, str)):
            return cls.rational(data)
        return cls.from_terms(
            (t["coef"], {int(p): as_fraction(e) for p, e in t.get("exps", {}).items()})
            for t in data
        )


ZERO = PPowerSum()
ONE = PPowerSum.rational(1)


def canonicalize(x) -> PPowerSum:
    """Canonical form of a PPowerSum or of a raw iterable of (coef, exps) terms."""
    if isinstance(x, PPowerSum):
        return PPowerSum(dict(x.terms))
    return PPowerSum.from_terms(x)


def arith(x: PPowerSum, y: PPowerSum, op: str) -> PPowerSum:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def pow_rational(x: PPowerSum, e) -> PPowerSum:
    """x**e for a single-term nonnegative x (any single term for integer e)."""
    e = as_fraction(e)
    if x.is_zero():
        if e <= 0:
            raise ZeroDivisionError("0 raised to a nonpositive power")
        return ZERO
    if not x.is_single_term():
        if e.denominator == 1 and e >= 0:
            out = ONE
            for _ in range(e.numerator):
                out = out * x
            return out
        raise MultiTermPower(f"cannot raise the sum {x} to the power {e}")
    key, c = x.terms[0]
    if e.denominator == 1:
        factor, nkey = _normalize_exps((p, f * e) for p, f in key)
        return PPowerSum({nkey: factor * c ** e.numerator})
    if c < 0:
        raise ValueError("fractional power of a negative value")
    sign, exps = x.exponent_map()
    return PPowerSum.from_terms([(1, {p: m * e for p, m in exps.items()})])


class Ordering(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"


@dataclass(frozen=True)
class Comparison:
    outcome: Ordering
    precision_used: int

    @property
    def le(self) -> bool:
        return self.outcome in (Ordering.LESS, Ordering.EQUAL)


def compare_certified(x: PPowerSum, y: PPowerSum, max_bits: int = DEFAULT_MAX_BITS,
                      start_bits: int = 64) -> Comparison:
    """Sign of x - y, decided exactly (identical canonical forms) or by
    interval refinement at doubling precision."""
    x, y = PPowerSum._lift(x), PPowerSum._lift(y)
    if x == y:
        return Comparison(Ordering.EQUAL, 0)
    d = x - y
    if d.is_single_term():
        return Comparison(Ordering.GREATER if d.terms[0][1] > 0 else Ordering.LESS, 0)
    bits = start_bits
    while True:
        iv = d.enclose(bits)
        if iv.lo > 0:
            return Comparison(Ordering.GREATER, bits)
        if iv.hi < 0:
            return Comparison(Ordering.LESS, bits)
        if bits >= max_bits:
            raise PrecisionExhausted(f"sign of {d} undecided at {bits} bits")
        bits = min(2 * bits, max_bits)


def compare_values(x, y, max_bits: int = DEFAULT_MAX_BITS) -> Comparison:
    """Like :func:`compare_certified` but also accepts fixed Intervals."""
    if not isinstance(x, Interval) and not isinstance(y, Interval):
        return compare_certified(PPowerSum._lift(x), PPowerSum._lift(y), max_bits)
    bits = 64
    while True:
        a, b = Interval.coerce(x, bits), Interval.coerce(y, bits)
        if a.lo == a.hi == b.lo == b.hi:
            return Comparison(Ordering.EQUAL, bits)
        if a.hi < b.lo:
            return Comparison(Ordering.LESS, bits)
        if a.lo > b.hi:
            return Comparison(Ordering.GREATER, bits)
        if bits >= max_bits:
            raise PrecisionExhausted("enclosures overlap; comparison undecided")
        bits = min(2 * bits, max_bits)


def certified_le(x, y, max_bits: int = DEFAULT_MAX_BITS) -> bool:
    return compare_values(x, y, max_bits).le


def to_decimal(x, digits: int = DEFAULT_DIGITS) -> str:
    """Render ``midpoint ± radius`` with radius <= 10**-digits (0 when exact)."""
    if digits < 1:
        raise ValueError("digits must be >= 1")
    scale = 10 ** digits
    if isinstance(x, (int, Fraction)) or (isinstance(x, PPowerSum) and x.is_rational()):
        q = as_fraction(x) if not isinstance(x, PPowerSum) else x.as_fraction()
        scaled = q * scale
        if scaled.denominator == 1:
            return f"{_fmt_fixed(scaled.numerator, digits)} ± 0"
        return f"{_fmt_fixed(_round_half_even(scaled), digits)} ± 1e-{digits}"
    target = Fraction(1, 2 * scale)
    bits = 64
    while True:
        iv = Interval.coerce(x, bits)
        if iv.width < target or isinstance(x, Interval):
            break
        bits *= 2
    shown = _round_half_even(iv.mid * scale)
    radius = iv.width / 2 + abs(Fraction(shown, scale) - iv.mid)
    if radius <= Fraction(1, scale):
        return f"{_fmt_fixed(shown, digits)} ± 1e-{digits}"
    # fixed enclosures coarser than the requested digits report their true radius
    return f"{_fmt_fixed(shown, digits)} ± {float(round_up(radius, 8)):.2e}"


def _round_half_even(q: Fraction) -> int:
    return round(q)


def _fmt_fixed(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    s = str(abs(n)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"
