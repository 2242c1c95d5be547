"""Valuations, p-adic norms of rationals, and Haar measures of balls and spheres."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .exact import ONE, ZERO, PPowerSum, as_fraction, is_prime


@dataclass(frozen=True)
class Prime:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"{self.p!r} is not a prime")

    def __int__(self):
        return self.p

    def __index__(self):
        return self.p


def prime_value(p) -> int:
    return p.p if isinstance(p, Prime) else Prime(int(p)).p


class Shape(enum.Enum):
    BALL = "Ball"
    SPHERE = "Sphere"


def valuation(x, p) -> int:
    """Exponent of p in the nonzero rational x."""
    x = as_fraction(x)
    p = prime_value(p)
    if x == 0:
        raise ValueError("valuation of 0 is +infinity")
    v = 0
    n, d = abs(x.numerator), x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def padic_norm(x, p) -> PPowerSum:
    """|x|_p = p**(-v_p(x)), and 0 for x = 0."""
    x = as_fraction(x)
    if x == 0:
        return ZERO
    p = prime_value(p)
    return PPowerSum.rational(Fraction(p) ** -valuation(x, p))


def p_power(p, e) -> PPowerSum:
    """p**e for rational e."""
    return PPowerSum.power(prime_value(p), as_fraction(e))


def sphere_factor(p) -> PPowerSum:
    """1 - 1/p, the Haar measure of the unit sphere."""
    p = prime_value(p)
    return PPowerSum.rational(1 - Fraction(1, p))


def haar_measure(k: int, shape, p) -> PPowerSum:
    """|B^k| = p^k and |S^k| = p^k (1 - 1/p)."""
    shape = Shape(shape) if not isinstance(shape, Shape) else shape
    p = prime_value(p)
    ball = PPowerSum.rational(Fraction(p) ** k)
    if shape is Shape.BALL:
        return ball
    return ball * sphere_factor(p)


def ultrametric_check(a, b, p) -> tuple:
    """(strong triangle inequality holds, equality holds when the norms differ).

    The second entry is True vacuously when |a|_p == |b|_p.
    """
    a, b = as_fraction(a), as_fraction(b)
    na, nb, ns = (padic_norm(v, p).as_fraction() for v in (a, b, a + b))
    holds = ns <= max(na, nb)
    eq_case = ns == max(na, nb) if na != nb else True
    return holds, eq_case


__all__ = [
    "Prime",
    "Shape",
    "valuation",
    "padic_norm",
    "haar_measure",
    "ultrametric_check",
    "p_power",
    "sphere_factor",
    "ONE",
]
