import json
import random
from fractions import Fraction as F

import pytest

from padic_hh.errors import DivergentIntegral, DivergentNorm
from padic_hh.exact import Interval, Ordering, PPowerSum, compare_certified
from padic_hh.padic import p_power
from padic_hh.radial import RadialFunction, combine, dilate, evaluate_at, integrate, lr_norm_pow
from padic_hh.series import ExpPoly

ALPHA, R = F(1, 4), F(2)


def power_fn(p=2, alpha=ALPHA, r=R):
    """|x|_p^((alpha - 1)/r) on B^0."""
    return RadialFunction.power_function(p, (alpha - 1) / r, 0)


def truncated(f, g=lambda v, k: v, lo=-200, hi=200):
    return sum(g(float(f(k)), k) for k in range(lo, hi))


def random_function(rng, p=2, tails=True):
    kmin = rng.randint(-4, 3)
    coeffs = [p_power(p, F(rng.randint(-8, 8), rng.randint(1, 4))) for _ in range(rng.randint(1, 4))]
    inner = outer = ExpPoly()
    if tails and rng.random() < 0.7:
        inner = ExpPoly({p_power(p, F(rng.randint(-6, 0), 4)): (coeffs[0],)[: 1] + ((1,) if rng.random() < 0.3 else ())})
    if tails and rng.random() < 0.7:
        outer = ExpPoly.geometric(coeffs[-1], p_power(p, F(-rng.randint(5, 12), 4)))
    return RadialFunction(p, kmin, tuple(coeffs), inner, outer)


def test_evaluate_examples():
    b = RadialFunction.ball_indicator(2, 0)
    assert evaluate_at(b, -2) == PPowerSum.rational(1)
    assert evaluate_at(b, 1).is_zero()
    assert evaluate_at(power_fn(), -2) == p_power(2, F(3, 4))


def test_integrate_examples():
    assert integrate(RadialFunction.ball_indicator(2, 0)) == PPowerSum.rational(1)
    assert integrate(RadialFunction.sphere_indicator(3, 1)) == PPowerSum.rational(2)


def test_integrate_power_function_against_truncation():
    f = power_fn()
    exact = float(integrate(f))
    brute = truncated(f, lambda v, k: v * 2.0 ** k * 0.5, lo=-400, hi=1)
    assert abs(exact - brute) < 1e-12 * exact


def test_integrate_divergence_side():
    with pytest.raises(DivergentIntegral) as exc:
        integrate(RadialFunction.power_function(2, -1, 0))
    assert exc.value.side == "inner"
    grow = RadialFunction(2, 0, (1,), ExpPoly(), ExpPoly.geometric(1, F(1, 2)))
    with pytest.raises(DivergentIntegral) as exc:
        integrate(grow)
    assert exc.value.side == "outer"


def test_lr_examples():
    for r in (F(3, 2), F(2), F(5)):
        assert lr_norm_pow(RadialFunction.ball_indicator(2, 0), r) == PPowerSum.rational(1)
    f = RadialFunction.sphere_indicator(2, 2, 2)
    assert lr_norm_pow(f, 2) == PPowerSum.rational(8)
    val = lr_norm_pow(power_fn(), R)
    assert abs(float(val) - 0.5 / (1 - 2 ** -0.25)) < 1e-12
    assert val * (PPowerSum.rational(1) - p_power(2, -ALPHA)) == PPowerSum.rational(F(1, 2))


def test_lr_affine_tail_enclosure():
    f = RadialFunction(2, 0, (1,), ExpPoly({PPowerSum.rational(F(1, 2)): (1, 1)}))
    val = lr_norm_pow(f, F(3, 2))
    assert isinstance(val, Interval)
    brute = truncated(f, lambda v, k: v ** 1.5 * 2.0 ** k * 0.5, lo=-300, hi=1)
    assert val.lo <= F(brute) * (1 + F(1, 10 ** 12)) and F(brute) * (1 - F(1, 10 ** 12)) <= val.hi
    assert val.width < F(1, 10 ** 15)


def test_lr_divergence():
    with pytest.raises(DivergentNorm):
        lr_norm_pow(RadialFunction.power_function(2, F(-1, 2), 0), 2)


def test_dilate_examples():
    b = RadialFunction.ball_indicator(3, 0)
    assert dilate(b, 0) == b
    assert dilate(b, 1) == RadialFunction.ball_indicator(3, -1)


def test_combine_examples():
    b = RadialFunction.ball_indicator(2, 0)
    assert combine(b, RadialFunction.zero(2)) == b
    step = combine(b, RadialFunction.sphere_indicator(2, 1))
    assert [step(k) for k in (-5, 0, 1, 2)] == [PPowerSum.rational(v) for v in (1, 1, 1, 0)]
    assert combine(b, b, (2, 0)) == RadialFunction.ball_indicator(2, 0, 2)


def test_json_round_trip_and_format():
    f = RadialFunction(2, -2, (1, 2, 0, 1, 1, 1), ExpPoly(), ExpPoly.geometric(1, F(1, 4)))
    data = json.loads(json.dumps(f.to_json()))
    assert data["window"] == {"kmin": -2, "kmax": 3}
    assert data["inner_tail"] == {"kind": "zero"}
    assert data["outer_tail"]["kind"] == "geometric"
    assert RadialFunction.from_json(data) == f
    # base defaults to the boundary coefficient
    del data["outer_tail"]["base"]
    assert RadialFunction.from_json(data) == f


def test_negative_coefficients_rejected():
    with pytest.raises(ValueError):
        RadialFunction(2, 0, (PPowerSum.rational(-1),))


@pytest.mark.parametrize("seed", range(20))
def test_properties(seed):
    rng = random.Random(seed)
    f, g = random_function(rng), random_function(rng)
    s, t = rng.randint(-4, 4), rng.randint(-4, 4)
    assert dilate(dilate(f, s), t) == dilate(f, s + t)
    a, b = p_power(2, F(rng.randint(-4, 4), 2)), PPowerSum.rational(rng.randint(0, 3))
    lhs = integrate(combine(f, g, (a, b)))
    assert compare_certified(lhs, a * integrate(f) + b * integrate(g)).outcome is Ordering.EQUAL
    r = rng.choice([F(3, 2), F(2), F(3)])
    scaled = lr_norm_pow(dilate(f, t), r)
    base = lr_norm_pow(f, r)
    if isinstance(base, Interval):
        target = base * p_power(2, -t).enclose(128)
        assert scaled.lo <= target.hi and target.lo <= scaled.hi
    else:
        assert scaled == p_power(2, -t) * base
    # tails agree with their closed forms well past the window
    for m in range(1, 51):
        assert f(f.kmin - m) == f.inner(m)
        assert f(f.kmax + m) == f.outer(m)
