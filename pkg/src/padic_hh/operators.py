"""Hardy-Hilbert type operators on radial functions and their norm constants.

With w_k = K(1, p^k) |S^k| the operator acts on sphere values as a
discrete convolution, ``(Tf)(S^m) = sum_k w_k f(S^{m+k})``.  For the Hardy,
HLP and D^p kernels the weights are two one-sided geometric sequences,
``w_k = A u^{-k}`` for ``k <= 0`` and ``w_k = B v^k`` for ``k >= 1``, which
makes the image of an exponential-polynomial function exponential-polynomial
again.  The Hilbert weights are not geometric; its images are sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DivergentOperator, Inadmissible, NoClosedForm
from .exact import (
    ONE,
    WORK_BITS,
    ZERO,
    Interval,
    Ordering,
    PPowerSum,
    as_fraction,
    compare_certified,
    fraction_str,
    round_up,
)
from .padic import haar_measure, p_power, prime_value, sphere_factor
from .radial import RadialFunction, dilate
from .series import (
    ExpPoly,
    check_below_one,
    geometric_inverse,
    partial_sum_exppoly,
    poly_eval,
    shifted_sum,
)
from .spaces import Block, BlockDecomposition, SpaceParams, certify_block

DEFAULT_TOL = Fraction(1, 10 ** 12)
HILBERT_WINDOW_PAD = 32


@dataclass(frozen=True)
class KernelSpec:
    """kind is one of "hilbert", "hardy", "hlp", "dp", "custom"."""

    kind: str
    lam: Fraction | None = None
    coeffs: tuple = ()  # custom: ((k, PPowerSum), ...)

    def __post_init__(self):
        if self.kind not in ("hilbert", "hardy", "hlp", "dp", "custom"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "dp":
            lam = as_fraction(self.lam)
            if lam < 0:
                raise ValueError("lambda must be nonnegative")
            object.__setattr__(self, "lam", lam)
        if self.kind == "custom":
            cs = tuple(sorted((int(k), PPowerSum._lift(c)) for k, c in dict(self.coeffs).items()))
            object.__setattr__(self, "coeffs", tuple((k, c) for k, c in cs if not c.is_zero()))

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        t = text.strip().lower()
        if t in ("hilbert", "hardy", "hlp"):
            return cls(t)
        if t.startswith("dp:"):
            return cls("dp", as_fraction(t[3:]))
        raise ValueError(f"kernel must be hilbert, hardy, hlp or dp:<num/den>, got {text!r}")

    @classmethod
    def custom(cls, coeffs: dict) -> "KernelSpec":
        return cls("custom", coeffs=tuple(coeffs.items()))

    @property
    def dp_lambda(self) -> Fraction | None:
        """lambda for the D^p family, with HLP as lambda = 0."""
        return Fraction(0) if self.kind == "hlp" else self.lam

    def __str__(self):
        if self.kind == "dp":
            return f"dp:{fraction_str(self.lam)}"
        if self.kind == "custom":
            return "custom:" + ",".join(f"{k}={c}" for k, c in self.coeffs)
        return self.kind


# -- coefficients and weights -----------------------------------------------------


def kernel_coefficient(K: KernelSpec, k: int, p) -> PPowerSum:
    """K(1, p^k)."""
    p = prime_value(p)
    if K.kind == "hilbert":
        return PPowerSum.rational(1 / (1 + Fraction(p) ** k))
    if K.kind == "hardy":
        return ONE if k <= 0 else ZERO
    if K.kind == "custom":
        return dict(K.coeffs).get(k, ZERO)
    lam = K.dp_lambda
    if k <= 0:
        return p_power(p, k * lam / 2)
    return p_power(p, -k * (lam / 2 + 1))


def kernel_value(K: KernelSpec, x, y) -> PPowerSum:
    """The two-argument kernel K(x, y) for positive x, y (rationals or single terms)."""
    x, y = PPowerSum._lift(x), PPowerSum._lift(y)
    if K.kind == "hilbert":
        return (x + y).inverse() if (x + y).is_single_term() else PPowerSum.rational(
            1 / (x + y).as_fraction()
        )
    small, large = (x, y) if compare_certified(x, y).outcome is not Ordering.GREATER else (y, x)
    if K.kind == "hardy":
        return x.inverse() if compare_certified(y, x).outcome is not Ordering.GREATER else ZERO
    if K.kind == "custom":
        raise NoClosedForm("custom kernels are given by their sphere coefficients only")
    lam = K.dp_lambda
    return small ** (lam / 2) * (large ** (lam / 2 + 1)).inverse()


def kernel_weight(K: KernelSpec, k: int, p) -> PPowerSum:
    """w_k = K(1, p^k) |S^k|."""
    return kernel_coefficient(K, k, p) * haar_measure(k, "Sphere", p)


@dataclass(frozen=True)
class GeometricWeights:
    """w_k = A u^{-k} (k <= 0) and w_k = B v^k (k >= 1)."""

    A: PPowerSum
    u: PPowerSum
    B: PPowerSum
    v: PPowerSum


def geometric_weights(K: KernelSpec, p) -> GeometricWeights:
    p = prime_value(p)
    sf = sphere_factor(p)
    if K.kind == "hardy":
        return GeometricWeights(sf, p_power(p, -1), ZERO, ONE)
    if K.kind in ("hlp", "dp"):
        lam = K.dp_lambda
        return GeometricWeights(sf, p_power(p, -(1 + lam / 2)), sf, p_power(p, -lam / 2))
    raise NoClosedForm(f"{K} weights are not geometric")


# -- operator action -----------------------------------------------------------------


def _lambda_sum(tail: ExpPoly, g: PPowerSum, side: str) -> PPowerSum:
    """sum_{s>=1} tail(s) g^s."""
    if tail.is_zero():
        return ZERO
    t = tail.times_geometric(g)
    for rho in t.comps:
        if not check_below_one(rho):
            raise DivergentOperator(side, f"tail ratio times weight ratio {rho} >= 1")
    return t.sum_from_one()


def _shifted_series(tail: ExpPoly, x: PPowerSum, side: str) -> ExpPoly:
    """M -> sum_{t>=0} tail(M + t) x^t."""
    out = ExpPoly()
    for rho, P in tail.comps.items():
        y = rho * x
        if not check_below_one(y):
            raise DivergentOperator(side, f"tail ratio times weight ratio {y} >= 1")
        out = out + ExpPoly({rho: shifted_sum(P, y)})
    return out


def _partial_series(tail: ExpPoly, x: PPowerSum) -> ExpPoly:
    """M -> sum_{s=1}^{M-1} tail(s) x^{-s}."""
    out = ExpPoly()
    xi = x.inverse()
    for rho, P in tail.comps.items():
        out = out + partial_sum_exppoly(P, rho * xi)
    return out


def _apply_geometric(W: GeometricWeights, f: RadialFunction) -> RadialFunction:
    a, b = f.kmin, f.kmax
    A, u, B, v = W.A, W.u, W.B, W.v
    has_b = not B.is_zero()
    lam_l = _lambda_sum(f.inner, u, "inner")
    lam_r = _lambda_sum(f.outer, v, "outer") if has_b else ZERO
    coeffs = []
    for m in range(a, b + 1):
        acc = ZERO
        for j in range(a, b + 1):
            c = f.coeffs[j - a]
            if c.is_zero():
                continue
            acc = acc + c * (A * u ** (m - j) if j <= m else B * v ** (j - m))
        acc = acc + A * u ** (m - a) * lam_l
        if has_b:
            acc = acc + B * v ** (b - m) * lam_r
        coeffs.append(acc)

    # inner tail, offset M = a - m >= 1
    inner = _shifted_series(f.inner, u, "inner").scale(A)
    if has_b:
        base = ZERO
        for j in range(a, b + 1):
            base = base + f.coeffs[j - a] * v ** (j - a)
        base = base + v ** (b - a) * lam_r
        inner = inner + ExpPoly.geometric(B * base, v)
        inner = inner + _partial_series(f.inner, v).times_geometric(v).scale(B)

    # outer tail, offset M = m - b >= 1
    base = ZERO
    for j in range(a, b + 1):
        base = base + f.coeffs[j - a] * u ** (b - j)
    base = base + u ** (b - a) * lam_l
    outer = ExpPoly.geometric(A * base, u)
    outer = outer + _partial_series(f.outer, u).shift(1).times_geometric(u).scale(A)
    if has_b:
        shifted = _shifted_series(f.outer, v, "outer")
        outer = outer + (shifted + f.outer.scale(-1)).scale(B)
    return RadialFunction(f.p, a, tuple(coeffs), inner, outer)


def _plus(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    lo, hi = min(f.kmin, g.kmin), max(f.kmax, g.kmax)
    x, y = f.rebase(lo, hi), g.rebase(lo, hi)
    return RadialFunction(
        f.p, lo, tuple(s + t for s, t in zip(x.coeffs, y.coeffs)), x.inner + y.inner, x.outer + y.outer
    )


@dataclass
class SampledImage:
    """Image of f under a kernel with non-geometric weights, evaluated sphere
    by sphere.  Contributions from f beyond ``pad`` steps outside its window
    are enclosed using the HLP image, which dominates the Hilbert image
    pointwise (1/(1+t) <= min(1, 1/t))."""

    kernel: KernelSpec
    f: RadialFunction
    pad: int = HILBERT_WINDOW_PAD
    _majorant: RadialFunction | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.f.p

    @property
    def majorant(self) -> RadialFunction:
        if self._majorant is None:
            self._majorant = apply_operator(KernelSpec("hlp"), self.f)
        return self._majorant

    def __call__(self, m: int, tol=Fraction(1, 10 ** 12)):
        f = self.f
        if f.is_compact():
            return self._near(f, m)
        pad = self.pad
        while True:
            near = self._near(f.rebase(f.kmin - pad, f.kmax + pad), m).enclose(WORK_BITS)
            far = apply_operator(KernelSpec("hlp"), f.beyond(pad))(m).enclose(WORK_BITS).hi
            if far <= tol * near.lo or pad >= 1 << 12:
                return near + Interval(Fraction(0), far)
            pad *= 2

    def _near(self, g: RadialFunction, m: int) -> PPowerSum:
        acc = ZERO
        for i, c in enumerate(g.coeffs):
            if not c.is_zero():
                acc = acc + kernel_weight(self.kernel, g.kmin + i - m, g.p) * c
        return acc

    def sample(self, lo: int, hi: int) -> dict:
        return {m: self(m) for m in range(lo, hi + 1)}

    def to_json(self, lo: int | None = None, hi: int | None = None) -> dict:
        from .records import value_json

        lo = self.f.kmin - 10 if lo is None else lo
        hi = self.f.kmax + 10 if hi is None else hi
        return {
            "prime": self.p,
            "kernel": str(self.kernel),
            "samples": [{"k": m, "value": value_json(v)} for m, v in self.sample(lo, hi).items()],
            "majorant": self.majorant.to_json(),
        }


def apply_operator(K: KernelSpec, f: RadialFunction):
    """T f as a RadialFunction (Hardy, HLP, D^p, custom) or a SampledImage (Hilbert)."""
    if f.is_zero():
        return RadialFunction.zero(f.p)
    if K.kind == "hilbert":
        return SampledImage(K, f)
    if K.kind == "custom":
        out = RadialFunction.zero(f.p)
        for k, c in K.coeffs:
            out = _plus(out, dilate(f, k).scale(c * haar_measure(k, "Sphere", f.p)))
        return out
    return _apply_geometric(geometric_weights(K, f.p), f)


# -- constants ---------------------------------------------------------------------


def _beta(params_or_beta) -> Fraction:
    if isinstance(params_or_beta, SpaceParams):
        return params_or_beta.beta
    return as_fraction(params_or_beta)


def side_ratios(K: KernelSpec, beta, p):
    """Geometric ratios (x, y) governing sum_k K(1,p^k) p^{-k(beta-1)} as
    k -> -infinity and k -> +infinity (y is None when that side is empty)."""
    p = prime_value(p)
    beta = _beta(beta)
    if K.kind in ("hardy", "hilbert"):
        return p_power(p, beta - 1), (None if K.kind == "hardy" else p_power(p, -beta))
    if K.kind in ("hlp", "dp"):
        lam = K.dp_lambda
        return p_power(p, beta - 1 - lam / 2), p_power(p, -(beta + lam / 2))
    return None, None


def admissibility_window(K: KernelSpec) -> str:
    if K.kind in ("hardy", "hilbert"):
        return "0 < 1/r + alpha < 1"
    if K.kind in ("hlp", "dp"):
        lam = fraction_str(K.dp_lambda)
        return f"-{lam}/2 < 1/r + alpha < {lam}/2 + 1"
    return "finite kernel: always admissible"


def admissible(K: KernelSpec, beta, p):
    """(True, None) or (False, witness) where the witness names a ratio >= 1."""
    x, y = side_ratios(K, beta, p)
    for side, ratio in (("k -> -infinity", x), ("k -> +infinity", y)):
        if ratio is not None and not check_below_one(ratio):
            return False, f"terms for {side} have geometric ratio {ratio} >= 1"
    if K.kind in ("hardy", "hilbert") and _beta(beta) <= 0:
        return False, f"1/r + alpha = {fraction_str(_beta(beta))} <= 0"
    return True, None


@dataclass
class ConstantResult:
    value: object  # PPowerSum or Interval, None when inadmissible
    form: str  # "ClosedForm" or "TruncatedSeries"
    admissible: bool
    terms_used: int = 0
    tail_bound: Fraction | None = None
    witness: str | None = None

    def to_json(self) -> dict:
        from .records import value_json

        out = {"form": self.form, "admissible": self.admissible, "value": value_json(self.value)}
        if self.form == "TruncatedSeries":
            out["terms_used"] = self.terms_used
            out["tail_bound"] = None if self.tail_bound is None else str(self.tail_bound)
        if self.witness:
            out["witness"] = self.witness
        return out


def constant_closed_form(K: KernelSpec, params, p) -> ConstantResult:
    """C = 2(1 - 1/p) sum_k K(1,p^k) p^{-k(1/r + alpha - 1)} in closed form."""
    p = prime_value(p)
    if K.kind not in ("hardy", "hlp", "dp"):
        raise NoClosedForm(f"no closed form for the {K} kernel")
    ok, witness = admissible(K, params, p)
    if not ok:
        raise Inadmissible(admissibility_window(K), witness)
    x, y = side_ratios(K, params, p)
    s = geometric_inverse(x)
    if y is not None:
        s = s + y * geometric_inverse(y)
    return ConstantResult(sphere_factor(p) * 2 * s, "ClosedForm", True)


def constant_series(K: KernelSpec, params, p, tol=DEFAULT_TOL) -> ConstantResult:
    """Certified enclosure of C by symmetric truncation with geometric tail majorants."""
    p = prime_value(p)
    tol = as_fraction(tol)
    beta = _beta(params)
    ok, witness = admissible(K, beta, p)
    if not ok:
        return ConstantResult(None, "TruncatedSeries", False, witness=witness)
    sf2 = 2 * Fraction(p - 1, p)
    if K.kind == "custom":
        acc = ZERO
        for k, c in K.coeffs:
            acc = acc + c * p_power(p, -k * (beta - 1))
        return ConstantResult(acc * sf2, "TruncatedSeries", True, len(K.coeffs), Fraction(0))
    x, y = side_ratios(K, beta, p)
    xi = x.enclose(WORK_BITS)
    yi = y.enclose(WORK_BITS) if y is not None else Interval.point(0)

    def term(k):
        return (kernel_coefficient(K, k, p) * p_power(p, -k * (beta - 1))).enclose(WORK_BITS)

    acc = term(0)
    xh, yh = round_up(xi.hi, 64), round_up(yi.hi, 64)
    xn, yn = xh, yh
    n = 0
    while True:
        n += 1
        acc = (acc + term(-n) + (term(n) if y is not None else 0)).rounded(WORK_BITS)
        # terms beyond n are bounded by x^k and y^k on the two sides
        xn, yn = round_up(xn * xh, 64), round_up(yn * yh, 64)
        bound = round_up(xn / (1 - xh) + yn / (1 - yh), 64)
        if bound <= tol * acc.lo / 2 or n > 1_000_000:
            break
    value = Interval(acc.lo * sf2, (acc.hi + bound) * sf2)
    return ConstantResult(value, "TruncatedSeries", True, 2 * n + 1, bound * sf2)


def operator_constant(K: KernelSpec, params, p, tol=DEFAULT_TOL) -> ConstantResult:
    """Closed form where one exists, certified series otherwise."""
    if K.kind in ("hardy", "hlp", "dp"):
        return constant_closed_form(K, params, p)
    return constant_series(K, params, p, tol)


# -- transport decomposition -----------------------------------------------------------


def transport_lambda(K: KernelSpec, k: int, p, beta) -> PPowerSum:
    """K(1,p^k) (1 - 1/p) p^{k(1 - beta)}."""
    return kernel_coefficient(K, k, p) * sphere_factor(p) * p_power(p, k * (1 - beta))


def _transport_residual(K: KernelSpec, p: int, beta: Fraction, n: int) -> PPowerSum:
    """Sum (or, for Hilbert, an upper bound) of the lambdas with |k| > n."""
    x, y = side_ratios(K, beta, p)
    acc = x ** (n + 1) * geometric_inverse(x)
    if y is not None:
        acc = acc + y ** (n + 1) * geometric_inverse(y)
    return acc * sphere_factor(p)


def transport_decompose(K: KernelSpec, a: Block, tol=DEFAULT_TOL, certify: bool = True) -> BlockDecomposition:
    """T a = sum_k lambda_k b_k with b_k = p^{k beta} D_k a a block on B^{n-k}.

    Pieces with |k| <= N are explicit; N grows until the remaining lambdas
    (exact for Hardy/HLP/D^p, majorized for Hilbert) are below tol times the
    explicit mass.  The lambdas sum to C/2."""
    p, params = a.fn.p, a.params
    beta = params.beta
    tol = as_fraction(tol)
    ok, witness = admissible(K, beta, p)
    if not ok:
        raise Inadmissible(admissibility_window(K), witness)

    def piece(k):
        lam = transport_lambda(K, k, p, beta)
        if lam.is_zero():
            return None
        fn = dilate(a.fn, k).scale(p_power(p, k * beta))
        blk = certify_block(fn, a.support_index - k, params) if certify else Block(
            fn, a.support_index - k, params, None
        )
        return lam, blk

    if K.kind == "custom":
        pieces = [pc for k, _ in K.coeffs if (pc := piece(k)) is not None]
        return BlockDecomposition(pieces, ZERO, "transport")
    x, y = side_ratios(K, beta, p)
    xf, yf = float(x), float(y) if y is not None else 0.0
    n = 0
    while True:
        rest = xf ** (n + 1) / (1 - xf) + (yf ** (n + 1) / (1 - yf) if y is not None else 0.0)
        if rest < float(tol) / 4 or n > 100_000:
            break
        n += 1
    while True:
        residual = _transport_residual(K, p, beta, n)
        if residual.enclose(64).hi <= tol * Fraction(1, 2) * Fraction(p - 1, p):
            break
        n += 1
    pieces = [pc for k in range(-n, n + 1) if (pc := piece(k)) is not None]
    return BlockDecomposition(pieces, residual, "transport")


__all__ = [
    "KernelSpec",
    "GeometricWeights",
    "SampledImage",
    "ConstantResult",
    "kernel_coefficient",
    "kernel_value",
    "kernel_weight",
    "geometric_weights",
    "apply_operator",
    "admissible",
    "admissibility_window",
    "side_ratios",
    "constant_closed_form",
    "constant_series",
    "operator_constant",
    "transport_lambda",
    "transport_decompose",
]
