"""Acceptance criteria 1-11.

Under pytest each criterion is one test, and a PASS/FAIL line per criterion
is printed in the terminal summary.  Running this file directly prints the
same lines without pytest.
"""

import random
import sys
from fractions import Fraction as F

from padic_hh.errors import Inadmissible
from padic_hh.exact import Interval, Ordering, PPowerSum, compare_certified
from padic_hh.operators import (
    KernelSpec,
    admissible,
    apply_operator,
    constant_closed_form,
    constant_series,
    kernel_value,
    transport_decompose,
)
from padic_hh.padic import Shape, haar_measure, p_power
from padic_hh.radial import RadialFunction
from padic_hh.records import Outcome, TheoremId
from padic_hh.series import ExpPoly, geometric_inverse
from padic_hh.spaces import (
    SpaceParams,
    block_norm_bracket,
    block_norm_lower_dual,
    block_norm_upper,
    holder_pairing_check,
    morrey_norm_pow,
)
from padic_hh.verify import Corpus, SweepGrid, emit_report, run_sweep, verify_dilation

ONE = PPowerSum.rational(1)
P24 = SpaceParams(F(2), F(1, 4))
CLOSED_KERNELS = [KernelSpec.parse(s) for s in ("hardy", "hlp", "dp:1", "dp:2")]
GRID = [(p, SpaceParams(r, a)) for p in (2, 3, 5) for r in (F(3, 2), F(2), F(3)) for a in (F(1, 8), F(1, 4), F(1, 2))]


def criterion(n, title):
    def wrap(fn):
        fn.criterion, fn.title = n, title
        return fn

    return wrap


def _equal(x, y):
    return compare_certified(x, y).outcome is Ordering.EQUAL


@criterion(1, "Haar measures of balls and spheres are exact")
def test_criterion_01_haar():
    for p in (2, 3, 5, 7):
        for k in range(-20, 21):
            assert _equal(haar_measure(k, Shape.BALL, p), PPowerSum.rational(F(p) ** k))
            sphere = PPowerSum.rational(F(p) ** k) * (ONE - PPowerSum.rational(F(1, p)))
            assert _equal(haar_measure(k, Shape.SPHERE, p), sphere)


@criterion(2, "closed-form and series constants agree")
def test_criterion_02_constants():
    tol = F(1, 10 ** 12)
    checked = 0
    for K in CLOSED_KERNELS:
        for p, params in GRID:
            if not admissible(K, params, p)[0]:
                continue
            exact = constant_closed_form(K, params, p).value
            enc = constant_series(K, params, p, tol).value
            assert enc.contains_interval(exact.enclose(256)), (K, p, params)
            assert enc.width <= tol * enc.lo
            checked += 1
    assert checked > 0
    spot = constant_closed_form(KernelSpec("hardy"), P24, 2).value
    truncated = sum(2 * (1 - 0.5) * 2.0 ** (-k * (0.75 - 1)) for k in range(-499, 1))
    assert abs(float(spot) - truncated) < 1e-5


@criterion(3, "admissibility boundaries are classified exactly")
def test_criterion_03_admissibility():
    for p in (2, 3, 5):
        for K in (KernelSpec("hardy"), KernelSpec("hilbert")):
            res = constant_series(K, F(1), p)
            assert not res.admissible and res.witness
            if K.kind == "hardy":
                try:
                    constant_closed_form(K, F(1), p)
                    raise AssertionError("boundary accepted")
                except Inadmissible as exc:
                    assert exc.witness
        for lam in (F(0), F(1), F(2), F(5, 2)):
            K = KernelSpec("dp", lam)
            for beta in (-lam / 2, lam / 2 + 1):
                res = constant_series(K, beta, p)
                assert not res.admissible and res.witness
                try:
                    constant_closed_form(K, beta, p)
                    raise AssertionError("boundary accepted")
                except Inadmissible as exc:
                    assert exc.witness
            for beta in (F(1, 8), lam / 2 + 1 - F(1, 16)):
                assert admissible(K, beta, p)[0]
                assert constant_series(K, beta, p).admissible
                constant_closed_form(K, beta, p)
    for p, params in GRID:
        for K in (KernelSpec("hardy"), KernelSpec("hilbert")):
            inside = 0 < params.beta < 1
            assert admissible(K, params, p)[0] is inside
            assert constant_series(K, params, p).admissible is inside


@criterion(4, "transport mass equals half the constant")
def test_criterion_04_transport():
    grid = SweepGrid.default()
    combos = [(2, P24), (3, SpaceParams(F(3, 2), F(1, 8))), (5, SpaceParams(F(3), F(1, 4)))]
    for K in CLOSED_KERNELS:
        for i in range(25):
            p, params = combos[i % len(combos)]
            a = Corpus(grid, p, params, f"acceptance|{K}|{i}").block()
            dec = transport_decompose(K, a)
            for _, blk in dec.pieces:
                assert blk.certificate.outcome in (Ordering.LESS, Ordering.EQUAL)
            C = constant_closed_form(K, params, p).value
            half = (C * F(1, 2)).enclose(256)
            total = dec.total.enclose(256)
            gap = max(abs(total.hi - half.lo), abs(half.hi - total.lo))
            assert gap <= F(1, 10 ** 10) * half.lo
            assert compare_certified(dec.mass, C).outcome is Ordering.LESS


@criterion(5, "dilation bound with exact rescaling certificates")
def test_criterion_05_dilation():
    grid = SweepGrid.default()
    for i in range(50):
        corpus = Corpus(grid, 2, P24, f"acceptance-dilation|{i}")
        f = corpus.function()
        for t in range(-5, 6):
            rec = verify_dilation(f, t, P24)
            assert rec.outcome is Outcome.PASS, (i, t, rec.notes)


def _brute_image(K, f, m):
    acc = PPowerSum.rational(0)
    for j in range(f.kmin, f.kmax + 1):
        c = f(j)
        if not c.is_zero():
            acc = acc + kernel_value(K, F(f.p) ** m, F(f.p) ** j) * haar_measure(j, Shape.SPHERE, f.p) * c
    return acc


@criterion(6, "operator images match the brute-force double sum")
def test_criterion_06_operator_oracle():
    kernels = [KernelSpec.parse(s) for s in ("hardy", "hlp", "dp:1", "hilbert")]
    rng = random.Random("acceptance-oracle")
    for _ in range(100):
        p = rng.choice([2, 3, 5])
        lo = rng.randint(-6, 6)
        hi = rng.randint(lo, 6)
        coeffs = tuple(
            p_power(p, F(rng.randint(-3, 3), rng.randint(1, 4))) if rng.random() < 0.85 else PPowerSum.rational(0)
            for _ in range(hi - lo + 1)
        )
        f = RadialFunction(p, lo, coeffs)
        for K in kernels:
            img = apply_operator(K, f)
            for m in range(-10, 11):
                got, want = img(m), _brute_image(K, f, m)
                if isinstance(got, Interval):
                    assert want.enclose(256).lo >= got.lo and want.enclose(256).hi <= got.hi
                    assert got.width <= F(1, 10 ** 10)
                else:
                    assert got == want, (K, m)


@criterion(7, "Hardy operator on the unit ball indicator")
def test_criterion_07_hardy_closed_action():
    for p in (2, 3, 5, 7):
        img = apply_operator(KernelSpec("hardy"), RadialFunction.ball_indicator(p, 0))
        expected = RadialFunction(
            p, 0, (ONE,), ExpPoly.geometric(ONE, ONE), ExpPoly.geometric(ONE, PPowerSum.rational(F(1, p)))
        )
        assert img == expected
        assert img.outer.kind == "geometric"


@criterion(8, "Morrey norm of the power function on B^0")
def test_criterion_08_power_function_morrey():
    p, params = 2, P24
    f = RadialFunction.power_function(p, (params.alpha - 1) / params.r, 0)
    expected = (ONE - PPowerSum.rational(F(1, p))) * geometric_inverse(p_power(p, -params.alpha))
    value = morrey_norm_pow(f, params)
    assert _equal(value, expected)
    r, a = float(params.r), float(params.alpha)
    acc, scan = 0.0, 0.0
    for j in range(-500, 61):
        acc += float(f(j)) ** r * p ** j * (1 - 1 / p)
        if j >= -60:
            scan = max(scan, p ** (-j * a * r) * acc)
    assert abs(scan - float(expected)) < 1e-9 * float(expected)


@criterion(9, "block-norm bracket collapses on the unit ball indicator")
def test_criterion_09_bracket():
    params = P24
    assert params.alpha < 1 / params.r_conj
    b = RadialFunction.ball_indicator(2, 0)
    upper = block_norm_upper(b, params)
    assert upper.mass == ONE and upper.residual_bound.is_zero()
    assert block_norm_lower_dual(b, b, params) == ONE
    bracket = block_norm_bracket(b, params, witnesses=[b])
    assert bracket.collapsed


@criterion(10, "Holder pairing inequality on random pairs")
def test_criterion_10_holder():
    grid = SweepGrid.default()
    combos = [(2, P24), (3, SpaceParams(F(3, 2), F(1, 8))), (2, SpaceParams(F(3), F(1, 4)))]
    for i in range(100):
        p, params = combos[i % len(combos)]
        corpus = Corpus(grid, p, params, f"acceptance-holder|{i}")
        f, g = corpus.function(tails=False), corpus.function(params=params.conjugate())
        rec = holder_pairing_check(f, g, params)
        assert rec.outcome is Outcome.PASS, (i, rec.notes)


@criterion(11, "sweeps are byte-identical across runs")
def test_criterion_11_determinism():
    grid = SweepGrid(primes=[2, 3], r_values=["2"], alpha_values=["1/4", "1/2"], kernels=["hardy", "hilbert"],
                     seed=42, corpus_size=1)
    checks = [TheoremId.DILATION, TheoremId.HARDY, TheoremId.HOLDER, TheoremId.TRANSPORT]
    first = emit_report(run_sweep(grid, checks), "json", grid.to_json())
    second = emit_report(run_sweep(SweepGrid.from_json(grid.to_json()), checks), "json", grid.to_json())
    assert first == second


def main() -> int:
    tests = sorted(
        (fn for fn in globals().values() if callable(fn) and hasattr(fn, "criterion")),
        key=lambda fn: fn.criterion,
    )
    failed = 0
    for fn in tests:
        try:
            fn()
            ok, why = True, ""
        except Exception as exc:  # report and continue
            ok, why = False, f"  ({type(exc).__name__}: {exc})"
            failed += 1
        print(f"criterion {fn.criterion:>2}: {'PASS' if ok else 'FAIL'}  {fn.title}{why}", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
