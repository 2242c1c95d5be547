"""Radial functions on Q_p^*: values on each sphere S^k.

A :class:`RadialFunction` stores explicit sphere values on a window
``[kmin, kmax]`` and two tails.  The inner tail gives the value on
``S^{kmin - m}`` and the outer tail the value on ``S^{kmax + m}`` for
``m >= 1``, each as an :class:`~padic_hh.series.ExpPoly` in ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DivergentIntegral, DivergentNorm
from .exact import (
    ONE,
    ZERO,
    Interval,
    Ordering,
    PPowerSum,
    as_fraction,
    compare_certified,
    has_small_rational,
    pow_bounds,
)
from .padic import haar_measure, p_power, prime_value, sphere_factor
from .series import ExpPoly, check_below_one, enclose_abs_poly

LR_REL_TOL = Fraction(1, 2 ** 80)


def _pps(x) -> PPowerSum:
    return x if isinstance(x, PPowerSum) else PPowerSum.rational(x)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    p: int
    kmin: int
    coeffs: tuple
    inner: ExpPoly = field(default_factory=ExpPoly)
    outer: ExpPoly = field(default_factory=ExpPoly)

    def __post_init__(self):
        object.__setattr__(self, "p", prime_value(self.p))
        coeffs = tuple(_pps(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("window must hold at least one sphere")
        for c in coeffs:
            if c.is_single_term() and c.terms[0][1] < 0:
                raise ValueError(f"negative sphere value {c}")
        object.__setattr__(self, "coeffs", coeffs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, p) -> "RadialFunction":
        return cls(p, 0, (ZERO,))

    @classmethod
    def ball_indicator(cls, p, n: int, value=ONE) -> "RadialFunction":
        """value * Phi_{B^n}."""
        return cls(p, n, (value,), ExpPoly.geometric(value, ONE))

    @classmethod
    def sphere_indicator(cls, p, k: int, value=ONE) -> "RadialFunction":
        return cls(p, k, (value,))

    @classmethod
    def power_function(cls, p, e, top: int = 0) -> "RadialFunction":
        """|x|_p**e restricted to the ball B^top."""
        e = as_fraction(e)
        p = prime_value(p)
        return cls(p, top, (p_power(p, top * e),), ExpPoly.geometric(p_power(p, top * e), p_power(p, -e)))

    @property
    def kmax(self) -> int:
        return self.kmin + len(self.coeffs) - 1

    # -- evaluation ---------------------------------------------------------

    def __call__(self, k: int) -> PPowerSum:
        if k < self.kmin:
            return self.inner(self.kmin - k)
        if k > self.kmax:
            return self.outer(k - self.kmax)
        return self.coeffs[k - self.kmin]

    def is_compact(self) -> bool:
        return self.inner.is_zero() and self.outer.is_zero()

    def is_zero(self) -> bool:
        return self.is_compact() and all(c.is_zero() for c in self.coeffs)

    def nonzero_indices(self):
        return [self.kmin + i for i, c in enumerate(self.coeffs) if not c.is_zero()]

    def support_top(self):
        """Largest k with f nonzero on S^k; None for the zero function.

        Raises ValueError when the outer tail is nonzero (unbounded support)."""
        if not self.outer.is_zero():
            raise ValueError("support is unbounded above")
        nz = self.nonzero_indices()
        if nz:
            return nz[-1]
        return None if self.inner.is_zero() else self.kmin - 1

    # -- structural helpers -------------------------------------------------

    def rebase(self, kmin: int, kmax: int) -> "RadialFunction":
        """Same function with its explicit window widened to [kmin, kmax]."""
        kmin, kmax = min(kmin, self.kmin), max(kmax, self.kmax)
        din, dout = self.kmin - kmin, kmax - self.kmax
        pre = tuple(self.inner(m) for m in range(din, 0, -1))
        post = tuple(self.outer(m) for m in range(1, dout + 1))
        return RadialFunction(
            self.p, kmin, pre + self.coeffs + post, self.inner.shift(din), self.outer.shift(dout)
        )

    def beyond(self, n: int) -> "RadialFunction":
        """Only the tail values more than n steps outside the window."""
        z = (ZERO,) * (len(self.coeffs) + 2 * n)
        return RadialFunction(self.p, self.kmin - n, z, self.inner.shift(n), self.outer.shift(n))

    def window_only(self) -> "RadialFunction":
        return RadialFunction(self.p, self.kmin, self.coeffs)

    def restrict_ball(self, n: int) -> "RadialFunction":
        """f * Phi_{B^n}."""
        if n < self.kmin:
            f = self.rebase(n, self.kmax)
        else:
            f = self
        if n >= f.kmax and f.outer.is_zero():
            return f
        if n >= f.kmax:
            f = f.rebase(f.kmin, n)
        return RadialFunction(f.p, f.kmin, f.coeffs[: n - f.kmin + 1], f.inner)

    def scale(self, s) -> "RadialFunction":
        s = _pps(s)
        return RadialFunction(
            self.p, self.kmin, tuple(c * s for c in self.coeffs), self.inner.scale(s), self.outer.scale(s)
        )

    def same_as(self, other: "RadialFunction") -> bool:
        """Exact structural equality of the represented functions."""
        if self.p != other.p:
            return False
        lo, hi = min(self.kmin, other.kmin), max(self.kmax, other.kmax)
        a, b = self.rebase(lo, hi), other.rebase(lo, hi)
        return a.coeffs == b.coeffs and a.inner == b.inner and a.outer == b.outer

    def __eq__(self, other):
        return isinstance(other, RadialFunction) and self.same_as(other)

    __hash__ = None

    def __repr__(self):
        vals = ", ".join(str(c) for c in self.coeffs)
        return (
            f"RadialFunction(p={self.p}, window=[{self.kmin}, {self.kmax}], coeffs=[{vals}], "
            f"inner={self.inner!r}, outer={self.outer!r})"
        )

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "prime": self.p,
            "window": {"kmin": self.kmin, "kmax": self.kmax},
            "coeffs": [c.to_json() for c in self.coeffs],
            "inner_tail": _tail_to_json(self.inner),
            "outer_tail": _tail_to_json(self.outer),
        }

    @classmethod
    def from_json(cls, data: dict) -> "RadialFunction":
        p = int(data["prime"])
        kmin = int(data["window"]["kmin"])
        coeffs = tuple(PPowerSum.from_json(c) for c in data["coeffs"])
        if "kmax" in data["window"] and int(data["window"]["kmax"]) != kmin + len(coeffs) - 1:
            raise ValueError("window length does not match the number of coefficients")
        inner = _tail_from_json(data.get("inner_tail", {"kind": "zero"}), coeffs[0])
        outer = _tail_from_json(data.get("outer_tail", {"kind": "zero"}), coeffs[-1])
        return cls(p, kmin, coeffs, inner, outer)


def _tail_to_json(t: ExpPoly) -> dict:
    kind = t.kind
    if kind == "zero":
        return {"kind": "zero"}
    if kind in ("geometric", "affine_geometric"):
        ((r, P),) = t.comps.items()
        out = {"kind": kind, "ratio": r.to_json(), "base": P[0].to_json()}
        if kind == "affine_geometric":
            out["slope"] = P[1].to_json()
        return out
    return t.to_json()


def _tail_from_json(d: dict, boundary: PPowerSum) -> ExpPoly:
    kind = d.get("kind", "zero")
    if kind == "zero":
        return ExpPoly()
    if kind in ("geometric", "affine_geometric"):
        ratio = PPowerSum.from_json(d["ratio"])
        base = PPowerSum.from_json(d["base"]) if "base" in d else boundary
        poly = (base,)
        if kind == "affine_geometric":
            poly = (base, PPowerSum.from_json(d["slope"]))
        for c in poly:
            if c.is_single_term() and c.terms[0][1] < 0:
                raise ValueError("tail base and slope must be nonnegative")
        return ExpPoly({ratio: poly})
    if kind == "sum":
        return ExpPoly(
            {
                PPowerSum.from_json(t["ratio"]): tuple(PPowerSum.from_json(c) for c in t["poly"])
                for t in d["terms"]
            }
        )
    raise ValueError(f"unknown tail kind {kind!r}")


# -- operations --------------------------------------------------------------


def evaluate_at(f: RadialFunction, k: int) -> PPowerSum:
    return f(k)


def dilate(f: RadialFunction, t: int) -> RadialFunction:
    """(D_tau f) for |tau|_p = p^t: g(S^k) = f(S^{k+t})."""
    return RadialFunction(f.p, f.kmin - t, f.coeffs, f.inner, f.outer)


def combine(f: RadialFunction, g: RadialFunction, weights=(ONE, ONE)) -> RadialFunction:
    """Pointwise w1 f + w2 g for nonnegative single-term weights."""
    if f.p != g.p:
        raise ValueError("cannot combine functions over different primes")
    w1, w2 = (_pps(w) for w in weights)
    for w in (w1, w2):
        if not w.is_zero() and (not w.is_single_term() or w.terms[0][1] < 0):
            raise ValueError("weights must be nonnegative single terms")
    lo, hi = min(f.kmin, g.kmin), max(f.kmax, g.kmax)
    a, b = f.rebase(lo, hi), g.rebase(lo, hi)
    return RadialFunction(
        f.p,
        lo,
        tuple(x * w1 + y * w2 for x, y in zip(a.coeffs, b.coeffs)),
        a.inner.scale(w1) + b.inner.scale(w2),
        a.outer.scale(w1) + b.outer.scale(w2),
    )


def multiply(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    """Pointwise product f * g."""
    if f.p != g.p:
        raise ValueError("cannot multiply functions over different primes")
    lo, hi = min(f.kmin, g.kmin), max(f.kmax, g.kmax)
    a, b = f.rebase(lo, hi), g.rebase(lo, hi)
    return RadialFunction(
        f.p, lo, tuple(x * y for x, y in zip(a.coeffs, b.coeffs)), a.inner * b.inner, a.outer * b.outer
    )


def _require_below_one(tail: ExpPoly, g: PPowerSum, side: str, exc):
    for r in tail.comps:
        if not check_below_one(r * g):
            raise exc(side, f"tail ratio {r} times {g} is not < 1")


def integrate(f: RadialFunction) -> PPowerSum:
    """Exact Haar integral sum_k f(S^k) |S^k|."""
    p = f.p
    acc = ZERO
    for i, c in enumerate(f.coeffs):
        if not c.is_zero():
            acc = acc + c * haar_measure(f.kmin + i, "Sphere", p)
    inv_p, pp = PPowerSum.rational(Fraction(1, p)), PPowerSum.rational(p)
    if not f.inner.is_zero():
        _require_below_one(f.inner, inv_p, "inner", DivergentIntegral)
        acc = acc + haar_measure(f.kmin, "Sphere", p) * f.inner.times_geometric(inv_p).sum_from_one()
    if not f.outer.is_zero():
        _require_below_one(f.outer, pp, "outer", DivergentIntegral)
        acc = acc + haar_measure(f.kmax, "Sphere", p) * f.outer.times_geometric(pp).sum_from_one()
    return acc


def _exact_power_ok(c: PPowerSum) -> bool:
    return c.is_zero() or (c.is_single_term() and has_small_rational(c))


def _tail_is_exact_geometric(t: ExpPoly) -> bool:
    if t.kind == "zero":
        return True
    if t.kind != "geometric":
        return False
    ((rho, (base,)),) = t.comps.items()
    return _exact_power_ok(base) and has_small_rational(rho)


def lr_exact(f: RadialFunction) -> bool:
    """Whether ||f||_r^r has an exact closed form: pure-power values with
    factorable rational parts and geometric tails."""
    return all(_exact_power_ok(c) for c in f.coeffs) and all(
        _tail_is_exact_geometric(t) for t in (f.inner, f.outer)
    )


def lr_norm_pow(f: RadialFunction, r, tol: Fraction = LR_REL_TOL):
    """||f||_{L^r}^r: exact PPowerSum for pure-power values with geometric
    tails, otherwise a certified :class:`Interval`."""
    r = as_fraction(r)
    if r < 1:
        raise ValueError("r must be >= 1")
    p = f.p
    inv_p, pp = PPowerSum.rational(Fraction(1, p)), PPowerSum.rational(p)
    if lr_exact(f):
        acc = ZERO
        for i, c in enumerate(f.coeffs):
            if not c.is_zero():
                acc = acc + c ** r * haar_measure(f.kmin + i, "Sphere", p)
        for tail, g, k0, side in ((f.inner, inv_p, f.kmin, "inner"), (f.outer, pp, f.kmax, "outer")):
            if tail.is_zero():
                continue
            ((rho, (base,)),) = tail.comps.items()
            x = rho ** r * g
            if not check_below_one(x):
                raise DivergentNorm(side, f"ratio {x} >= 1")
            acc = acc + base ** r * haar_measure(k0, "Sphere", p) * x * _geo_tail(x)
        return acc
    acc = Interval.point(0)
    for i, c in enumerate(f.coeffs):
        if not c.is_zero():
            acc = acc + _nonneg(c.enclose(128)).pow(r, 128) * haar_measure(f.kmin + i, "Sphere", p).enclose(128)
    for tail, g, k0, side in ((f.inner, Fraction(1, p), f.kmin, "inner"), (f.outer, Fraction(p), f.kmax, "outer")):
        if not tail.is_zero():
            pre = haar_measure(k0, "Sphere", p).enclose(128)
            acc = acc + pre * tail_power_enclosure(tail, r, g, side, tol)
    return acc


def _geo_tail(x: PPowerSum) -> PPowerSum:
    from .series import geometric_inverse

    return geometric_inverse(x)


def _nonneg(iv: Interval) -> Interval:
    return Interval(max(iv.lo, Fraction(0)), max(iv.hi, Fraction(0)))


def tail_majorant(tail: ExpPoly, r: Fraction, g: Fraction, side: str, exc=DivergentNorm):
    """Constants (A, eta, d) with tail(m)**r * g**m <= A(m)**r * eta**m,
    where A has nonnegative coefficients of degree d and eta < 1."""
    gq = _pps(g)
    A, R = tail.abs_majorant()
    eta = pow_bounds(R, r, 128)[1] * gq.enclose(128).hi
    if eta >= 1:
        top = tail.max_ratio()
        if not check_below_one(top ** r * gq):
            raise exc(side, f"dominant ratio {top} too large")
        A, R = tail.abs_majorant(bits=512)
        eta = pow_bounds(R, r, 512)[1] * gq.enclose(512).hi
        if eta >= 1:
            raise exc(side, "majorant ratio not certified below 1")
    return A, eta, tail.degree


def majorant_tail_bound(A, eta: Fraction, d: int, r: Fraction, M: int):
    """Bound on sum_{m>M} A(m)**r eta**m, or None when M is too small for the
    term ratio bound to drop below 1."""
    if d > 0:
        growth = pow_bounds(Fraction(M + 2, M + 1), d * r, 64)[1]
    else:
        growth = Fraction(1)
    theta = growth * eta
    if theta >= 1:
        return None
    first = pow_bounds(enclose_abs_poly(A, M + 1), r, 64)[1] * eta ** (M + 1)
    return first / (1 - theta)


def tail_power_enclosure(tail: ExpPoly, r: Fraction, g: Fraction, side: str, tol: Fraction = LR_REL_TOL,
                         exc=DivergentNorm) -> Interval:
    """Enclosure of sum_{m>=1} tail(m)**r * g**m."""
    A, eta, d = tail_majorant(tail, r, g, side, exc)
    acc = Interval.point(0)
    m = 0
    M = 16
    while True:
        while m < M:
            m += 1
            v = _nonneg(tail(m).enclose(128)).pow(r, 128)
            acc = (acc + v * Fraction(g) ** m).rounded(160)
        bound = majorant_tail_bound(A, eta, d, r, M)
        if bound is not None and (bound <= tol * acc.lo or bound == 0):
            return Interval(acc.lo, acc.hi + bound)
        if M > 1 << 16:
            raise exc(side, "tail converges too slowly to enclose")
        M *= 2


__all__ = [
    "RadialFunction",
    "evaluate_at",
    "integrate",
    "lr_norm_pow",
    "dilate",
    "combine",
    "multiply",
    "sphere_factor",
]
