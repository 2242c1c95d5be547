"""Closed forms for sums of polynomial-times-geometric sequences.

A *tail* of a radial function, and every intermediate sequence produced by
the operators, is an exponential polynomial in the step offset ``m``::

    value(m) = sum_i P_i(m) * rho_i**m

with single-term positive ratios ``rho_i`` and polynomials ``P_i`` whose
coefficients are :class:`PPowerSum`.  Infinite sums of such sequences, and
partial sums up to a symbolic bound, have exact closed forms as long as
``1 / (1 - x)`` can be written for single-term ``x``; that is done here by
rationalizing the denominator.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .exact import ONE, ZERO, Interval, PPowerSum, compare_certified, Ordering

Poly = tuple  # (c0, c1, ...) of PPowerSum, lowest degree first


def geometric_inverse(x: PPowerSum) -> PPowerSum:
    """Exact 1 / (1 - x) for a single-term x != 1."""
    if x.is_zero():
        return ONE
    if not x.is_single_term():
        raise ValueError("geometric_inverse needs a single-term ratio")
    key, _ = x.terms[0]
    L = 1
    for _, f in key:
        L = L * f.denominator // math.gcd(L, f.denominator)
    xl = x ** L
    if xl == ONE:
        raise ZeroDivisionError("ratio equals 1")
    num = ZERO
    xp = ONE
    for _ in range(L):
        num = num + xp
        xp = xp * x
    return num * (1 / (1 - xl.as_fraction()))


def power_sums(x: PPowerSum, n: int) -> list:
    """[S_0, ..., S_n] with S_i = sum_{t>=0} t**i x**t as formal closed forms.

    The identities are rational in x, so they also give the right finite-sum
    algebra when x >= 1 (as long as x != 1)."""
    g = geometric_inverse(x)
    out = [g]
    for i in range(1, n + 1):
        acc = ZERO
        for j in range(i):
            sj = out[j] - ONE if j == 0 else out[j]
            acc = acc + sj * (math.comb(i, j) * (-1) ** (i - j + 1))
        out.append(g * acc)
    return out


# -- polynomials ------------------------------------------------------------


def poly_trim(p: Iterable) -> Poly:
    p = [c if isinstance(c, PPowerSum) else PPowerSum.rational(c) for c in p]
    while p and p[-1].is_zero():
        p.pop()
    return tuple(p)


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return poly_trim((a[i] if i < len(a) else ZERO) + (b[i] if i < len(b) else ZERO) for i in range(n))


def poly_scale(a: Poly, s) -> Poly:
    return poly_trim(c * s for c in a)


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] = out[i + j] + ca * cb
    return poly_trim(out)


def poly_eval(a: Poly, m) -> PPowerSum:
    acc = ZERO
    for c in reversed(a):
        acc = acc * m + c
    return acc


def poly_shift(a: Poly, c: int) -> Poly:
    """Coefficients of P(M + c)."""
    out = [ZERO] * len(a)
    for d, coef in enumerate(a):
        for e in range(d + 1):
            out[e] = out[e] + coef * (math.comb(d, e) * c ** (d - e))
    return poly_trim(out)


@lru_cache(maxsize=None)
def faulhaber(d: int) -> tuple:
    """Rational coefficients of F(M) = sum_{s=1}^{M-1} s**d (degree d + 1)."""
    n = d + 2
    xs = list(range(1, n + 1))
    ys = [sum(Fraction(s) ** d for s in range(1, M)) for M in xs]
    # solve the Vandermonde system exactly
    rows = [[Fraction(x) ** k for k in range(n)] + [y] for x, y in zip(xs, ys)]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        rows[col] = [v / pv for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[k][n] for k in range(n))


def shifted_sum(P: Poly, x: PPowerSum, sums=None) -> Poly:
    """Q(M) = sum_{t>=0} P(M + t) x**t as a polynomial in M."""
    if not P:
        return ()
    S = sums if sums is not None else power_sums(x, len(P) - 1)
    out = [ZERO] * len(P)
    for d, c in enumerate(P):
        for e in range(d + 1):
            out[d - e] = out[d - e] + c * S[e] * math.comb(d, e)
    return poly_trim(out)


def series_value(P: Poly, x: PPowerSum) -> PPowerSum:
    """sum_{m>=1} P(m) x**m (formal; the caller checks x < 1)."""
    if not P:
        return ZERO
    S = power_sums(x, len(P) - 1)
    acc = ZERO
    for d, c in enumerate(P):
        acc = acc + c * (S[d] - ONE if d == 0 else S[d])
    return acc


def partial_sum_exppoly(P: Poly, y: PPowerSum) -> "ExpPoly":
    """sum_{s=1}^{M-1} P(s) y**s as an exponential polynomial in M."""
    if not P:
        return ExpPoly()
    if y == ONE:
        out: Poly = ()
        for d, c in enumerate(P):
            out = poly_add(out, poly_scale(tuple(PPowerSum.rational(q) for q in faulhaber(d)), c))
        return ExpPoly({ONE: out})
    Q = shifted_sum(P, y)
    # sum_{s>=1} - sum_{s>=M}  =  y Q(1) - y^M Q(M)
    const = y * poly_eval(Q, 1)
    return ExpPoly({ONE: (const,)}) + ExpPoly({y: poly_scale(Q, -1)})


class ExpPoly:
    """Exponential polynomial sum_r P_r(M) * r**M with single-term ratios r > 0."""

    __slots__ = ("comps",)

    def __init__(self, comps: Mapping[PPowerSum, Poly] | None = None):
        out = {}
        for r, P in (comps or {}).items():
            if r.is_zero():
                continue
            if not r.is_single_term() or r.sign() < 0:
                raise ValueError(f"tail ratio {r} must be a positive single term")
            P = poly_trim(P)
            if P:
                out[r] = poly_add(out.get(r, ()), P)
        self.comps = {r: P for r, P in sorted(out.items(), key=lambda kv: kv[0].terms) if P}

    @classmethod
    def geometric(cls, base, ratio) -> "ExpPoly":
        base = PPowerSum._lift(base)
        return cls({PPowerSum._lift(ratio): (base,)})

    def is_zero(self) -> bool:
        return not self.comps

    @property
    def kind(self) -> str:
        if not self.comps:
            return "zero"
        if len(self.comps) == 1:
            (P,) = self.comps.values()
            if len(P) == 1:
                return "geometric"
            if len(P) == 2:
                return "affine_geometric"
        return "sum"

    @property
    def degree(self) -> int:
        return max((len(P) - 1 for P in self.comps.values()), default=-1)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        out = dict(self.comps)
        for r, P in other.comps.items():
            out[r] = poly_add(out.get(r, ()), P)
        return ExpPoly(out)

    def scale(self, s) -> "ExpPoly":
        s = PPowerSum._lift(s)
        return ExpPoly({r: poly_scale(P, s) for r, P in self.comps.items()})

    def times_geometric(self, g: PPowerSum) -> "ExpPoly":
        """Multiply pointwise by g**M."""
        return ExpPoly({r * g: P for r, P in self.comps.items()})

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        out = ExpPoly()
        for r1, P1 in self.comps.items():
            for r2, P2 in other.comps.items():
                out = out + ExpPoly({r1 * r2: poly_mul(P1, P2)})
        return out

    def shift(self, c: int) -> "ExpPoly":
        """The sequence M -> E(M + c)."""
        return ExpPoly({r: poly_scale(poly_shift(P, c), r ** c) for r, P in self.comps.items()})

    def __call__(self, m: int) -> PPowerSum:
        acc = ZERO
        for r, P in self.comps.items():
            acc = acc + poly_eval(P, m) * r ** m
        return acc

    def max_ratio(self) -> PPowerSum:
        best = None
        for r in self.comps:
            if best is None or compare_certified(r, best).outcome is Ordering.GREATER:
                best = r
        return best

    def sum_from_one(self) -> PPowerSum:
        """sum_{m>=1} E(m); every ratio must be < 1 (checked by the caller)."""
        acc = ZERO
        for r, P in self.comps.items():
            acc = acc + series_value(P, r)
        return acc

    def abs_majorant(self, bits: int = 128):
        """(coefficient upper bounds lowest degree first, ratio upper bound)
        such that |E(m)| <= A(m) * R**m for all m >= 1."""
        deg = self.degree
        A = [Fraction(0)] * (deg + 1)
        R = Fraction(0)
        for r, P in self.comps.items():
            R = max(R, r.enclose(bits).hi)
            for d, c in enumerate(P):
                iv = c.enclose(bits)
                A[d] += max(abs(iv.lo), abs(iv.hi))
        return A, R

    def __eq__(self, other):
        return isinstance(other, ExpPoly) and self.comps == other.comps

    def __repr__(self):
        inner = ", ".join(f"{r}: [{', '.join(map(str, P))}]" for r, P in self.comps.items())
        return f"ExpPoly({{{inner}}})"

    def to_json(self) -> dict:
        return {
            "kind": "sum",
            "terms": [
                {"ratio": r.to_json(), "poly": [c.to_json() for c in P]} for r, P in self.comps.items()
            ],
        }


def check_below_one(x: PPowerSum) -> bool:
    return compare_certified(x, ONE).outcome is Ordering.LESS


def enclose_abs_poly(A, m: int) -> Fraction:
    return sum(a * Fraction(m) ** d for d, a in enumerate(A))


__all__ = [
    "ExpPoly",
    "Interval",
    "geometric_inverse",
    "power_sums",
    "shifted_sum",
    "series_value",
    "partial_sum_exppoly",
    "faulhaber",
    "poly_eval",
    "poly_shift",
    "check_below_one",
]
