"""Theorem verifiers, deterministic corpora, parameter sweeps and reports."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import Inadmissible, PadicHHError, PrecisionExhausted
from .exact import ZERO, Interval, PPowerSum, as_fraction, fraction_str, pow_bounds, round_down, to_decimal
from .operators import (
    DEFAULT_TOL,
    KernelSpec,
    SampledImage,
    admissibility_window,
    admissible,
    apply_operator,
    operator_constant,
    transport_decompose,
)
from .padic import p_power
from .radial import RadialFunction, combine, dilate, lr_norm_pow
from .records import Outcome, TheoremId, VerificationRecord, decide, value_json
from .series import ExpPoly
from .spaces import (
    SpaceParams,
    block_norm_lower,
    block_norm_upper,
    certify_block,
    holder_pairing_check,
    root_upper,
    support_top,
)

OPERATOR_THEOREMS = {
    TheoremId.HILBERT: "hilbert",
    TheoremId.HARDY: "hardy",
    TheoremId.DP: "dp",
    TheoremId.HLP_REMARK: "hlp",
}
DEFAULT_KERNEL = {"hilbert": "hilbert", "hardy": "hardy", "dp": "dp:1/1", "hlp": "hlp"}


def _base_inputs(p, params: SpaceParams, kernel=None, **extra) -> dict:
    out = {"p": p, **params.to_json(), "kernel": str(kernel) if kernel is not None else "-"}
    out.update(extra)
    return out


def _min_value(a, b):
    """Smaller of two PPowerSum bounds (certified); falls back to a."""
    from .exact import Ordering, compare_certified

    try:
        return b if compare_certified(b, a).outcome is Ordering.LESS else a
    except PrecisionExhausted:
        return a


# -- verifiers -----------------------------------------------------------------------


def verify_dilation(f: RadialFunction, t: int, params: SpaceParams, inputs=None) -> VerificationRecord:
    """UB(D f) <= p^{-t beta} UB(f), with every rescaled piece re-certified."""
    p = f.p
    inputs = inputs or _base_inputs(p, params, t=t, f=f.to_json())
    dec = block_norm_upper(f, params)
    scale = p_power(p, -t * params.beta)
    for _, blk in dec.pieces:
        certify_block(dilate(blk.fn, t).scale(scale.inverse()), blk.support_index - t, params)
    lhs = block_norm_upper(dilate(f, t), params).total
    rhs = scale * dec.total
    return decide(lhs, rhs, TheoremId.DILATION, inputs, {"pieces": len(dec.pieces)})


def verify_transport(K: KernelSpec, a, tol=DEFAULT_TOL, inputs=None) -> VerificationRecord:
    """Transport mass + residual <= C, and (for closed-form kernels) equal to C/2 within tol."""
    p, params = a.fn.p, a.params
    tol = as_fraction(tol)
    inputs = inputs or _base_inputs(p, params, K, block=a.to_json())
    ok, witness = admissible(K, params, p)
    if not ok:
        return VerificationRecord(TheoremId.TRANSPORT, inputs, outcome=Outcome.INADMISSIBLE,
                                  notes={"window": admissibility_window(K), "witness": witness})
    dec = transport_decompose(K, a, tol)
    C = operator_constant(K, params, p, tol).value
    total = dec.total
    rec = decide(total, C, TheoremId.TRANSPORT, inputs, {"pieces": len(dec.pieces)})
    half = Interval.coerce(C) * Fraction(1, 2)
    t = Interval.coerce(total)
    gap = max(t.hi - half.lo, half.hi - t.lo)
    agrees = gap <= tol * half.hi + (half.width if K.kind == "hilbert" else 0)
    rec.notes["half_constant"] = value_json(C if isinstance(C, Interval) else C * Fraction(1, 2))
    rec.notes["agrees_with_half_constant"] = bool(agrees)
    if rec.outcome is Outcome.PASS and not agrees:
        rec.outcome = Outcome.FAIL
    return rec


def operator_image_bound(K: KernelSpec, a):
    """Best certified upper bound on the block norm of T a: the smaller of the
    constructive decomposition of the image and the transport decomposition."""
    trans = transport_decompose(K, a, certify=False).total
    image = apply_operator(K, a.fn)
    if isinstance(image, SampledImage):
        return trans
    try:
        ub = block_norm_upper(image, a.params).total
    except PadicHHError:
        return trans
    return _min_value(ub, trans)


def verify_operator_bound(K: KernelSpec, a, theorem_id=None, tol=DEFAULT_TOL, inputs=None) -> VerificationRecord:
    """||T a|| <= C for a block a (whose block norm is at most 1)."""
    p, params = a.fn.p, a.params
    tid = theorem_id or next(t for t, kind in OPERATOR_THEOREMS.items() if kind == K.kind)
    inputs = inputs or _base_inputs(p, params, K, block=a.to_json())
    ok, witness = admissible(K, params, p)
    if not ok:
        return VerificationRecord(tid, inputs, outcome=Outcome.INADMISSIBLE,
                                  notes={"window": admissibility_window(K), "witness": witness})
    lhs = operator_image_bound(K, a)
    C = operator_constant(K, params, p, tol).value
    return decide(lhs, C, tid, inputs)


def verify_holder(f, g, params, inputs=None) -> VerificationRecord:
    rec = holder_pairing_check(f, g, params)
    if inputs is not None:
        rec.inputs = inputs
    return rec


def verify_minkowski(fs, weights, params: SpaceParams, witnesses=None, inputs=None) -> VerificationRecord:
    """Lower bound of ||sum w_j f_j|| <= sum w_j UB(f_j)."""
    p = fs[0].p
    total = RadialFunction.zero(p)
    rhs = ZERO
    for f, w in zip(fs, weights):
        total = combine(total, f, (1, w))
        rhs = rhs + PPowerSum._lift(w) * block_norm_upper(f, params).total
    lhs, _ = block_norm_lower(total, params, witnesses)
    inputs = inputs or _base_inputs(p, params, weights=[fraction_str(as_fraction(w)) for w in weights])
    return decide(lhs, rhs, TheoremId.MINKOWSKI, inputs)


# -- corpora -----------------------------------------------------------------------------


@dataclass
class SweepGrid:
    primes: list
    r_values: list
    alpha_values: list
    kernels: list
    seed: int = 0
    corpus_size: int = 3
    window: tuple = (-6, 6)
    exp_range: tuple = (-3, 3)
    max_den: int = 4

    def __post_init__(self):
        self.r_values = [as_fraction(r) for r in self.r_values]
        self.alpha_values = [as_fraction(a) for a in self.alpha_values]
        self.kernels = [k if isinstance(k, KernelSpec) else KernelSpec.parse(k) for k in self.kernels]
        self.primes = [int(p) for p in self.primes]
        self.window = tuple(self.window)
        self.exp_range = tuple(self.exp_range)
        if not (self.primes and self.r_values and self.alpha_values and self.kernels):
            raise ValueError("every grid axis must be nonempty")

    @classmethod
    def default(cls) -> "SweepGrid":
        return cls([2, 3], ["3/2", "2/1"], ["1/8", "1/4"], ["hardy", "hlp", "dp:1/1", "hilbert"])

    @classmethod
    def from_json(cls, data: dict) -> "SweepGrid":
        known = {"primes", "r_values", "alpha_values", "kernels", "seed", "corpus_size", "window",
                 "exp_range", "max_den"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown grid fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict:
        return {
            "primes": self.primes,
            "r_values": [fraction_str(r) for r in self.r_values],
            "alpha_values": [fraction_str(a) for a in self.alpha_values],
            "kernels": [str(k) for k in self.kernels],
            "seed": self.seed,
            "corpus_size": self.corpus_size,
            "window": list(self.window),
            "exp_range": list(self.exp_range),
            "max_den": self.max_den,
        }


class Corpus:
    """Deterministic random radial functions for one grid point."""

    def __init__(self, grid: SweepGrid, p: int, params: SpaceParams, tag: str = ""):
        self.grid, self.p, self.params = grid, p, params
        key = f"{grid.seed}|{p}|{fraction_str(params.r)}|{fraction_str(params.alpha)}|{tag}"
        self.rng = random.Random(key)

    def exponent(self, lo=None, hi=None) -> Fraction:
        lo = self.grid.exp_range[0] if lo is None else lo
        hi = self.grid.exp_range[1] if hi is None else hi
        den = self.rng.randint(1, self.grid.max_den)
        return Fraction(self.rng.randint(int(lo * den), int(hi * den)), den)

    def power(self, lo=None, hi=None) -> PPowerSum:
        return p_power(self.p, self.exponent(lo, hi))

    def function(self, tails: bool = True, params: SpaceParams | None = None) -> RadialFunction:
        """Outer tails decay fast enough for a finite block norm in ``params``
        (default: this corpus's own space)."""
        lo, hi = self.grid.window
        kmin = self.rng.randint(lo, hi)
        kmax = min(hi, kmin + self.rng.randint(0, 3))
        coeffs = [ZERO if self.rng.random() < 0.2 else self.power() for _ in range(kmax - kmin + 1)]
        if coeffs[0].is_zero():
            coeffs[0] = self.power()
        inner = outer = ExpPoly()
        if tails:
            inner = self._tail(self.exponent(-3, 0), coeffs[0])
            beta = (params or self.params).beta
            outer = self._tail(-(beta + Fraction(self.rng.randint(1, 6), 4)), coeffs[-1] if not coeffs[-1].is_zero() else ZERO)
        return RadialFunction(self.p, kmin, tuple(coeffs), inner, outer)

    def _tail(self, exponent: Fraction, boundary: PPowerSum) -> ExpPoly:
        kind = self.rng.choice(["zero", "geometric", "affine_geometric"])
        if kind == "zero":
            return ExpPoly()
        ratio = p_power(self.p, exponent)
        base = boundary if not boundary.is_zero() else self.power()
        if kind == "geometric":
            return ExpPoly({ratio: (base,)})
        return ExpPoly({ratio: (base, self.power(-2, 1))})

    def block(self):
        """A certified block built by normalizing a compact random function."""
        f = self.function(tails=False)
        n = support_top(f) + self.rng.randint(0, 2)
        r, alpha = self.params.r, self.params.alpha
        # a short dyadic at or below 1/||f||_r keeps the coefficients small
        hi = Interval.coerce(lr_norm_pow(f, r)).hi
        q = round_down(1 / pow_bounds(hi, 1 / r, 64)[1], 16)
        a = f.scale(p_power(self.p, -n * alpha) * q)
        return certify_block(a, n, self.params)


# -- sweeps --------------------------------------------------------------------------------


def _kernels_for(tid: TheoremId, grid: SweepGrid) -> list:
    if tid is TheoremId.TRANSPORT:
        return list(grid.kernels)
    kind = OPERATOR_THEOREMS[tid]
    ks = [k for k in grid.kernels if k.kind == kind]
    return ks or [KernelSpec.parse(DEFAULT_KERNEL[kind])]


def _guarded(tid: TheoremId, inputs: dict, run) -> VerificationRecord:
    try:
        rec = run()
    except Inadmissible as exc:
        return VerificationRecord(tid, inputs, outcome=Outcome.INADMISSIBLE,
                                  notes={"window": exc.window, "witness": exc.witness})
    except PadicHHError as exc:
        return VerificationRecord(tid, inputs, outcome=Outcome.UNDECIDED,
                                  notes={"error": type(exc).__name__, "detail": str(exc)})
    rec.inputs = inputs
    return rec


def run_sweep(grid: SweepGrid, checks, tol=DEFAULT_TOL) -> list:
    """One record per (grid point, check, corpus item), sorted by (theorem_id, inputs)."""
    checks = [c if isinstance(c, TheoremId) else TheoremId(c) for c in checks]
    records = []
    for p in grid.primes:
        for r in grid.r_values:
            for alpha in grid.alpha_values:
                params = SpaceParams(r, alpha)
                for tid in checks:
                    records.extend(_run_check(tid, grid, p, params, tol))
    records.sort(key=lambda rec: rec.sort_key())
    return records


def _run_check(tid: TheoremId, grid: SweepGrid, p: int, params: SpaceParams, tol) -> list:
    out = []
    n = grid.corpus_size
    if tid is TheoremId.DILATION:
        corpus = Corpus(grid, p, params, tid.value)
        for i in range(n):
            f, t = corpus.function(), corpus.rng.randint(-5, 5)
            inputs = _base_inputs(p, params, item=i, t=t, f=f.to_json())
            out.append(_guarded(tid, inputs, lambda: verify_dilation(f, t, params)))
    elif tid is TheoremId.HOLDER:
        corpus = Corpus(grid, p, params, tid.value)
        for i in range(n):
            f, g = corpus.function(tails=False), corpus.function(params=params.conjugate())
            inputs = _base_inputs(p, params, item=i, f=f.to_json(), g=g.to_json())
            out.append(_guarded(tid, inputs, lambda: holder_pairing_check(f, g, params)))
    elif tid is TheoremId.MINKOWSKI:
        corpus = Corpus(grid, p, params, tid.value)
        for i in range(n):
            fs = [corpus.function() for _ in range(2)]
            ws = [Fraction(corpus.rng.randint(1, 4), corpus.rng.randint(1, 3)) for _ in fs]
            inputs = _base_inputs(p, params, item=i, weights=[fraction_str(w) for w in ws],
                                  fs=[f.to_json() for f in fs])
            out.append(_guarded(tid, inputs, lambda: verify_minkowski(fs, ws, params)))
    else:
        for K in _kernels_for(tid, grid):
            corpus = Corpus(grid, p, params, f"{tid.value}|{K}")
            ok, witness = admissible(K, params, p)
            for i in range(n):
                inputs = _base_inputs(p, params, K, item=i)
                if not ok:
                    out.append(VerificationRecord(tid, inputs, outcome=Outcome.INADMISSIBLE,
                                                  notes={"window": admissibility_window(K), "witness": witness}))
                    continue
                a = corpus.block()
                inputs["block"] = a.to_json()
                if tid is TheoremId.TRANSPORT:
                    out.append(_guarded(tid, inputs, lambda: verify_transport(K, a, tol)))
                else:
                    out.append(_guarded(tid, inputs, lambda: verify_operator_bound(K, a, tid, tol)))
    return out


# -- reports ---------------------------------------------------------------------------------

CSV_COLUMNS = ["theorem_id", "p", "r", "alpha", "kernel", "outcome", "lhs_dec", "rhs_dec", "precision_used"]


def summary_counts(records) -> dict:
    counts = {o: 0 for o in Outcome}
    for rec in records:
        counts[rec.outcome] += 1
    return counts


def _dec(x) -> str:
    return "" if x is None else to_decimal(x)


def emit_report(records, fmt: str = "json", header: dict | None = None) -> bytes:
    if fmt == "json":
        doc = {"header": header or {}, "records": [rec.to_json() for rec in records]}
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in records:
            i = rec.inputs
            w.writerow([rec.theorem_id.value, i.get("p", ""), i.get("r", ""), i.get("alpha", ""),
                        i.get("kernel", "-"), rec.outcome.value, _dec(rec.lhs), _dec(rec.rhs),
                        rec.precision_used])
        return buf.getvalue().encode()
    if fmt == "text":
        lines = []
        for rec in records:
            i = rec.inputs
            lines.append(
                f"{rec.theorem_id.value:<12} p={i.get('p', ''):<3} r={i.get('r', ''):<6} "
                f"alpha={i.get('alpha', ''):<6} kernel={i.get('kernel', '-'):<9} {rec.outcome.value:<12} "
                f"{_dec(rec.lhs):>28} <= {_dec(rec.rhs):<28}"
            )
        c = summary_counts(records)
        lines.append(f"{c[Outcome.PASS]} pass / {c[Outcome.FAIL]} fail / {c[Outcome.INADMISSIBLE]} inadmissible")
        if c[Outcome.UNDECIDED]:
            lines.append(f"{c[Outcome.UNDECIDED]} undecided")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")


__all__ = [
    "SweepGrid",
    "Corpus",
    "verify_dilation",
    "verify_transport",
    "verify_operator_bound",
    "operator_image_bound",
    "verify_holder",
    "verify_minkowski",
    "run_sweep",
    "emit_report",
    "summary_counts",
    "TheoremId",
    "Outcome",
    "VerificationRecord",
]
