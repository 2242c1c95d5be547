"""Central Morrey norms, central blocks, and certified block-norm brackets."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DivergentIntegral,
    DivergentMass,
    DivergentNorm,
    NoClosedForm,
    NormTooLarge,
    NotSupported,
    PrecisionExhausted,
    UnboundedSup,
)
from .exact import (
    ONE,
    WORK_BITS,
    ZERO,
    Interval,
    Ordering,
    PPowerSum,
    as_fraction,
    compare_certified,
    compare_values,
    fraction_str,
    has_small_rational,
    pow_bounds,
    round_up,
)
from .padic import haar_measure, p_power, sphere_factor
from .radial import (
    RadialFunction,
    dilate,
    integrate,
    lr_exact,
    lr_norm_pow,
    majorant_tail_bound,
    multiply,
    tail_majorant,
    tail_power_enclosure,
)
from .records import TheoremId, decide
from .series import check_below_one, geometric_inverse

SCAN_LIMIT = 100_000
ENCLOSURE_SCAN_LIMIT = 4096
EXPLICIT_TAIL_PIECES = 4


@dataclass(frozen=True)
class SpaceParams:
    r: Fraction
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", as_fraction(self.r))
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.r <= 1:
            raise ValueError("r must be > 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")

    @property
    def r_conj(self) -> Fraction:
        return self.r / (self.r - 1)

    @property
    def beta(self) -> Fraction:
        """1/r + alpha."""
        return 1 / self.r + self.alpha

    def conjugate(self) -> "SpaceParams":
        return SpaceParams(self.r_conj, self.alpha)

    def to_json(self) -> dict:
        return {"r": fraction_str(self.r), "alpha": fraction_str(self.alpha)}


# -- small numeric helpers ---------------------------------------------------


def pow_value(x, e):
    """x**e, exact when possible and a certified Interval otherwise."""
    e = as_fraction(e)
    if isinstance(x, Interval):
        return x.pow(e)
    x = PPowerSum._lift(x)
    if x.is_zero() or x.is_single_term() or (e.denominator == 1 and e >= 0):
        return x ** e
    return x.enclose(WORK_BITS).pow(e)


def root_upper(x, r) -> PPowerSum:
    """x**(1/r) exactly, or a rational upper bound when no exact form exists."""
    r = as_fraction(r)
    if isinstance(x, PPowerSum) and (x.is_zero() or (x.is_single_term() and has_small_rational(x))):
        return x ** (1 / r)
    hi = Interval.coerce(x, WORK_BITS).hi
    return PPowerSum.rational(round_up(pow_bounds(hi, 1 / r, WORK_BITS)[1], 96))


def _max_value(a, b):
    """Certified max of two values; returns (value, True if b was strictly larger)."""
    if a is None:
        return b, True
    if isinstance(a, Interval) or isinstance(b, Interval):
        ia, ib = Interval.coerce(a), Interval.coerce(b)
        return Interval(max(ia.lo, ib.lo), max(ia.hi, ib.hi)), ib.lo > ia.hi
    out = compare_certified(b, a).outcome
    return (b, True) if out is Ordering.GREATER else (a, out is Ordering.EQUAL)


# -- Morrey norms ---------------------------------------------------------------


@dataclass(frozen=True)
class MorreySup:
    """sup_k p^{-k alpha r} int_{B^k} |f|^r, with the largest attaining k
    (None when the supremum is only approached)."""

    value: object
    at: int | None
    exact: bool


def morrey_norm_pow(f: RadialFunction, params: SpaceParams):
    """||f||_{M_{r,alpha}}^r as a PPowerSum (exact) or an Interval."""
    return morrey_sup(f, params).value


def morrey_sup(f: RadialFunction, params: SpaceParams) -> MorreySup:
    if f.is_zero():
        return MorreySup(ZERO, None, True)
    if lr_exact(f):
        return _morrey_exact(f, params)
    return _morrey_enclosure(f, params)


def _morrey_exact(f: RadialFunction, params: SpaceParams) -> MorreySup:
    p, r, alpha = f.p, params.r, params.alpha
    a, b = f.kmin, f.kmax
    sf = sphere_factor(p)
    par = p_power(p, alpha * r)
    inv_p = PPowerSum.rational(Fraction(1, p))

    def weight(k):
        return p_power(p, -k * alpha * r)

    best, at = None, None
    P = ZERO
    if not f.inner.is_zero():
        ((rho, (base,)),) = f.inner.comps.items()
        eta = rho ** r * inv_p
        if not check_below_one(eta):
            raise DivergentNorm("inner", f"ratio {eta} >= 1")
        z = eta * par
        if compare_certified(z, ONE).outcome is Ordering.GREATER:
            raise UnboundedSup(f"p^(-k alpha r) int_(B^k) |f|^r grows like ({z})^|k| as k -> -infinity")
        P = base ** r * sf * p_power(p, a) * eta * geometric_inverse(eta)
        best, at = weight(a - 1) * P, a - 1
    for i, c in enumerate(f.coeffs):
        k = a + i
        if not c.is_zero():
            P = P + c ** r * haar_measure(k, "Sphere", p)
        best, up = _max_value(best, weight(k) * P)
        if up:
            at = k
    if f.outer.is_zero():
        return MorreySup(best, at, True)
    ((sig, (base,)), ) = f.outer.comps.items()
    y = sig ** r * p
    z = y * weight(1)
    cz = compare_certified(z, ONE).outcome
    if cz is Ordering.GREATER:
        raise UnboundedSup(f"outer growth ratio {z} > 1")
    E = base ** r * sf * p_power(p, b)
    if cz is Ordering.EQUAL:
        # G(b+s) = K1 q^s + K2 with q < 1, so the sup is max(G(b), K2)
        K2 = -(weight(b) * E * y * geometric_inverse(y))
        val, _ = _max_value(best, K2)
        return MorreySup(val, None if val is K2 else at, True)
    # unimodal in s: scan until the first certified decrease
    prev = weight(b) * P
    yp = ONE
    for s in range(1, SCAN_LIMIT):
        yp = yp * y
        P = P + E * yp
        g = weight(b + s) * P
        if compare_certified(g, prev).outcome is not Ordering.GREATER:
            return MorreySup(best, at, True)
        best, up = _max_value(best, g)
        if up:
            at = b + s
        prev = g
    raise NoClosedForm("outer Morrey scan did not reach its maximum")


def _morrey_enclosure(f: RadialFunction, params: SpaceParams) -> MorreySup:
    p, r, alpha = f.p, params.r, params.alpha
    a, b = f.kmin, f.kmax
    sf = Fraction(p - 1, p)
    par = p_power(p, alpha * r)
    bits = WORK_BITS

    def weight(k) -> Interval:
        return p_power(p, -k * alpha * r).enclose(bits)

    best = None
    at = None
    P = Interval.point(0)
    if not f.inner.is_zero():
        growth = par * PPowerSum.rational(Fraction(1, p))
        _check_growth(f.inner, r, growth, "inner")
        total = tail_power_enclosure(f.inner, r, Fraction(1, p), "inner")
        A, eta, d = tail_majorant(f.inner, r, growth, "inner", _unbounded)
        scale = p_power(p, a).enclose(bits) * sf
        # G(a - s) = p^{-(a-s) alpha r} p^a sf sum_{m>=s} inner(m)^r p^{-m}
        head = Interval.point(0)
        for s in range(1, ENCLOSURE_SCAN_LIMIT):
            rest = total - head
            rest = Interval(max(rest.lo, Fraction(0)), rest.hi)
            g = weight(a - s) * scale * rest
            best, up = _max_value(best, g)
            if up:
                at = a - s
            term = f.inner(s).enclose(bits)
            term = Interval(max(term.lo, Fraction(0)), max(term.hi, Fraction(0))).pow(r) * Fraction(1, p) ** s
            head = (head + term).rounded(bits)
            bound = majorant_tail_bound(A, eta, d, r, s)
            if bound is not None:
                bound = bound * (weight(a).hi * scale.hi)
                if bound <= best.lo:
                    break
        else:
            best = Interval(best.lo, max(best.hi, bound if bound is not None else best.hi))
        P = scale * total
    for i, c in enumerate(f.coeffs):
        k = a + i
        if not c.is_zero():
            v = c.enclose(bits)
            v = Interval(max(v.lo, Fraction(0)), max(v.hi, Fraction(0)))
            P = P + v.pow(r) * haar_measure(k, "Sphere", p).enclose(bits)
        best, up = _max_value(best, weight(k) * P)
        if up:
            at = k
    if not f.outer.is_zero():
        growth = p_power(p, 1 - alpha * r)
        _check_growth(f.outer, r, growth, "outer")
        A, eta, d = tail_majorant(f.outer, r, growth, "outer", _unbounded)
        scale = p_power(p, b).enclose(bits) * sf
        cap = None
        for s in range(1, ENCLOSURE_SCAN_LIMIT):
            v = f.outer(s).enclose(bits)
            v = Interval(max(v.lo, Fraction(0)), max(v.hi, Fraction(0)))
            P = (P + v.pow(r) * scale * Fraction(p) ** s).rounded(bits)
            g = weight(b + s) * P
            best, up = _max_value(best, g)
            if up:
                at = b + s
            bound = majorant_tail_bound(A, eta, d, r, s)
            if bound is not None:
                cap = g.hi + bound * weight(b).hi * scale.hi
                if cap <= best.lo:
                    break
        else:
            best = Interval(best.lo, max(best.hi, cap if cap is not None else best.hi))
    return MorreySup(best, at, False)


def _unbounded(side, detail=""):
    return UnboundedSup(f"{side} side: {detail}")


def _check_growth(tail, r, growth: PPowerSum, side: str):
    """Reject tails whose Morrey profile grows without bound."""
    top = tail.max_ratio()
    z = top ** r * growth
    cz = compare_certified(z, ONE).outcome
    if cz is Ordering.GREATER or (cz is Ordering.EQUAL and len(tail.comps[top]) > 1):
        raise UnboundedSup(f"{side} side: growth ratio {z} with polynomial factor")
    if cz is Ordering.EQUAL:
        raise NoClosedForm(f"{side} side: boundary growth ratio needs a pure geometric tail")


# -- blocks -----------------------------------------------------------------------


def support_top(f: RadialFunction, probe: int = 64):
    """Largest k with f(S^k) != 0, None for the zero function."""
    if not f.outer.is_zero():
        return float("inf")
    nz = f.nonzero_indices()
    if nz:
        return nz[-1]
    if f.inner.is_zero():
        return None
    for m in range(1, probe + 1):
        if not f.inner(m).is_zero():
            return f.kmin - m
    return f.kmin - probe


@dataclass(frozen=True)
class Block:
    fn: RadialFunction
    support_index: int
    params: SpaceParams
    certificate: object  # Comparison

    def to_json(self) -> dict:
        return {"support_n": self.support_index, "fn": self.fn.to_json()}


def certify_block(f: RadialFunction, n: int, params: SpaceParams) -> Block:
    top = support_top(f)
    if top is not None and top > n:
        raise NotSupported(f"function is nonzero on S^{top}, above S^{n}")
    norm = lr_norm_pow(f, params.r)
    cap = p_power(f.p, -n * params.alpha * params.r)
    cmp = compare_values(norm, cap)
    if cmp.outcome is Ordering.GREATER:
        raise NormTooLarge(f"||a||_r^r = {norm} exceeds p^(-n alpha r) = {cap}")
    return Block(f, n, params, cmp)


@dataclass
class BlockDecomposition:
    """Explicit pieces lambda_j a_j plus an exact bound on what is left."""

    pieces: list
    residual_bound: PPowerSum = ZERO
    strategy: str = "sphere"

    @property
    def mass(self) -> PPowerSum:
        acc = ZERO
        for lam, _ in self.pieces:
            acc = acc + lam
        return acc

    @property
    def total(self) -> PPowerSum:
        return self.mass + self.residual_bound

    def to_json(self) -> dict:
        return {
            "mass": self.mass.to_json(),
            "residual_bound": self.residual_bound.to_json(),
            "total": self.total.to_json(),
            "strategy": self.strategy,
            "pieces": [
                {"lambda": lam.to_json(), "support_n": blk.support_index, "fn": blk.fn.to_json()}
                for lam, blk in self.pieces
            ],
        }


def _sphere_block(p: int, k: int, params: SpaceParams, check: bool = True) -> Block:
    """The unit-mass block supported on S^k: value (1 - 1/p)^{-1/r} p^{-k beta}."""
    r = params.r
    val = sphere_factor(p) ** (-1 / r) * p_power(p, -k * params.beta)
    fn = RadialFunction.sphere_indicator(p, k, val)
    if check:
        return certify_block(fn, k, params)
    return Block(fn, k, params, None)


def _sphere_lambda(p: int, k: int, c: PPowerSum, params: SpaceParams) -> PPowerSum:
    return c * sphere_factor(p) ** (1 / params.r) * p_power(p, k * params.beta)


def _sphere_pieces(f: RadialFunction, params: SpaceParams, lo: int, hi: int) -> list:
    out = []
    for k in range(lo, hi + 1):
        c = f(k)
        if not c.is_zero():
            out.append((_sphere_lambda(f.p, k, c, params), _sphere_block(f.p, k, params)))
    return out


def _tail_lambdas(f: RadialFunction, params: SpaceParams, side: str, skip: int) -> PPowerSum:
    """Exact sum of the sphere-piece lambdas for tail offsets m > skip."""
    p, beta = f.p, params.beta
    sfr = sphere_factor(p) ** (1 / params.r)
    if side == "inner":
        tail, g, k0 = f.inner, p_power(p, -beta), f.kmin
    else:
        tail, g, k0 = f.outer, p_power(p, beta), f.kmax
    if tail.is_zero():
        return ZERO
    seq = tail.times_geometric(g)
    for rho in seq.comps:
        if not check_below_one(rho):
            raise DivergentMass(side, f"lambda ratio {rho} >= 1")
    return sfr * p_power(p, k0 * beta) * seq.shift(skip).sum_from_one()


def _sphere_decomposition(f, params, tail_pieces) -> BlockDecomposition:
    lo = f.kmin - (tail_pieces if not f.inner.is_zero() else 0)
    hi = f.kmax + (tail_pieces if not f.outer.is_zero() else 0)
    residual = _tail_lambdas(f, params, "inner", tail_pieces) + _tail_lambdas(f, params, "outer", tail_pieces)
    return BlockDecomposition(_sphere_pieces(f, params, lo, hi), residual, "sphere")


def _ball_decomposition(f, params, n0, tail_pieces) -> BlockDecomposition | None:
    p, r, alpha = f.p, params.r, params.alpha
    g = f.restrict_ball(n0)
    if g.is_zero():
        return None
    a = g.kmin
    shifted = lr_norm_pow(dilate(g, a), r)
    lam = p_power(p, Fraction(a) / r + n0 * alpha) * root_upper(shifted, r)
    ball = certify_block(g.scale(lam.inverse()), n0, params)
    pieces = [(lam, ball)]
    hi = f.kmax + (tail_pieces if not f.outer.is_zero() else 0)
    pieces += _sphere_pieces(f, params, n0 + 1, hi)
    residual = _tail_lambdas(f, params, "outer", tail_pieces)
    return BlockDecomposition(pieces, residual, f"ball:{n0}")


def block_norm_upper(f: RadialFunction, params: SpaceParams, strategy: str = "best",
                     tail_pieces: int = EXPLICIT_TAIL_PIECES) -> BlockDecomposition:
    """Constructive block decomposition of f; its total mass bounds the block norm.

    ``strategy="sphere"`` normalizes every sphere piece separately.  ``"best"``
    also tries cutting f at each ball B^n (n from kmin - 1 to kmax), taking
    the part inside as a single block, and keeps the smallest total."""
    if strategy not in ("best", "sphere"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if f.is_zero():
        return BlockDecomposition([], ZERO, "sphere")
    candidates = []
    errors = []
    try:
        candidates.append(_sphere_decomposition(f, params, tail_pieces))
    except DivergentIntegral as exc:
        errors.append(exc)
    if strategy == "best":
        for n0 in range(f.kmin - 1, f.kmax + 1):
            try:
                dec = _ball_decomposition(f, params, n0, tail_pieces)
            except DivergentIntegral as exc:
                errors.append(exc)
                continue
            if dec is not None:
                candidates.append(dec)
    if not candidates:
        side = next((e.side for e in errors if e.side == "outer"), "inner")
        raise DivergentMass(side, "; ".join(str(e) for e in errors))
    best = candidates[0]
    best_total = best.total
    for dec in candidates[1:]:
        t = dec.total
        try:
            if compare_certified(t, best_total).outcome is Ordering.LESS:
                best, best_total = dec, t
        except PrecisionExhausted:
            continue
    return best


# -- lower bounds and brackets ------------------------------------------------------


def _morrey_root_upper(g: RadialFunction, params: SpaceParams) -> PPowerSum:
    m = morrey_norm_pow(g, params)
    if Interval.coerce(m).hi <= 0:
        raise ValueError("dual witness has zero Morrey norm")
    return root_upper(m, params.r)


def block_norm_lower_dual(f: RadialFunction, g: RadialFunction, params: SpaceParams) -> PPowerSum:
    """(int f g) / ||g||_{M_{r', alpha}}, a lower bound for ||f|| in the block space."""
    if g.is_zero():
        raise ValueError("dual witness must be nonzero")
    if f.p != g.p:
        raise ValueError("f and the witness live over different primes")
    norm = _morrey_root_upper(g, params.conjugate())
    pairing = integrate(multiply(f, g))
    return pairing * norm.inverse()


def default_witnesses(p: int, params: SpaceParams) -> list:
    """Ball indicators B^m for m in [-8, 8] and the power function
    |x|^(alpha - 1/r') on B^0, whose Morrey profile in M_{r', alpha} is flat."""
    out = [RadialFunction.ball_indicator(p, m) for m in range(-8, 9)]
    out.append(RadialFunction.power_function(p, params.alpha - 1 / params.r_conj, 0))
    return out


def block_norm_lower(f: RadialFunction, params: SpaceParams, witnesses=None):
    """Best dual lower bound over a witness family: (value, witness)."""
    best, best_w = ZERO, None
    for g in witnesses if witnesses is not None else default_witnesses(f.p, params):
        try:
            v = block_norm_lower_dual(f, g, params)
        except (UnboundedSup, DivergentIntegral, NoClosedForm, ValueError):
            continue
        try:
            if best_w is None or compare_certified(v, best).outcome is Ordering.GREATER:
                best, best_w = v, g
        except PrecisionExhausted:
            continue
    return best, best_w


@dataclass
class CertifiedBound:
    lower: PPowerSum
    upper: PPowerSum
    decomposition: BlockDecomposition | None = None
    witness: RadialFunction | None = None

    def __post_init__(self):
        if compare_certified(self.lower, self.upper).outcome is Ordering.GREATER:
            raise AssertionError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def collapsed(self) -> bool:
        return compare_certified(self.lower, self.upper).outcome is Ordering.EQUAL


def block_norm_bracket(f: RadialFunction, params: SpaceParams, witnesses=None) -> CertifiedBound:
    dec = block_norm_upper(f, params)
    lower, w = block_norm_lower(f, params, witnesses)
    return CertifiedBound(lower, dec.total, dec, w)


def holder_pairing_check(f: RadialFunction, g: RadialFunction, params: SpaceParams):
    """Certify int f g <= ||f||_{M_{r,alpha}} ||g||_{B_{r',alpha}} as r-th powers,
    with the constructive upper bound standing in for the block norm of g."""
    r = params.r
    inputs = {"p": f.p, **params.to_json(), "f": f.to_json(), "g": g.to_json()}
    lhs = pow_value(integrate(multiply(f, g)), r)
    m = morrey_norm_pow(f, params)
    ub = pow_value(block_norm_upper(g, params.conjugate()).total, r)
    if isinstance(m, Interval) or isinstance(ub, Interval):
        rhs = Interval.coerce(m) * Interval.coerce(ub)
    else:
        rhs = m * ub
    return decide(lhs, rhs, TheoremId.HOLDER, inputs)


__all__ = [
    "SpaceParams",
    "Block",
    "BlockDecomposition",
    "CertifiedBound",
    "MorreySup",
    "morrey_norm_pow",
    "morrey_sup",
    "certify_block",
    "block_norm_upper",
    "block_norm_lower_dual",
    "block_norm_lower",
    "block_norm_bracket",
    "default_witnesses",
    "holder_pairing_check",
    "pow_value",
    "root_upper",
    "support_top",
]
