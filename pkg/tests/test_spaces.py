import random
from fractions import Fraction as F

import pytest

from padic_hh.errors import NormTooLarge, NotSupported, UnboundedSup
from padic_hh.exact import Interval, Ordering, PPowerSum, compare_certified, compare_values
from padic_hh.padic import haar_measure, p_power, Shape
from padic_hh.radial import RadialFunction, combine, dilate, integrate, lr_norm_pow
from padic_hh.records import Outcome
from padic_hh.series import ExpPoly, geometric_inverse
from padic_hh.spaces import (
    SpaceParams,
    block_norm_bracket,
    block_norm_lower,
    block_norm_lower_dual,
    block_norm_upper,
    certify_block,
    morrey_norm_pow,
    morrey_sup,
    root_upper,
    holder_pairing_check,
)
from padic_hh.verify import verify_minkowski

P = SpaceParams(F(2), F(1, 4))
ONE = PPowerSum.rational(1)


def scan_morrey(f, params, lo=-60, hi=60):
    """Brute-force sup over k in [lo, hi] of p^{-k alpha r} int_{B^k} |f|^r."""
    p, r, a = f.p, float(params.r), float(params.alpha)
    acc, best = 0.0, 0.0
    for j in range(lo - 400, hi + 1):
        acc += float(f(j)) ** r * p ** j * (1 - 1 / p)
        if j >= lo:
            best = max(best, p ** (-j * a * r) * acc)
    return best


def random_function(rng, p=2, tails=True):
    kmin = rng.randint(-5, 3)
    coeffs = [p_power(p, F(rng.randint(-6, 6), rng.randint(1, 4))) for _ in range(rng.randint(1, 4))]
    inner = outer = ExpPoly()
    if tails and rng.random() < 0.5:
        inner = ExpPoly.geometric(coeffs[0], p_power(p, F(rng.randint(-4, 2), 8)))
    if tails and rng.random() < 0.5:
        outer = ExpPoly.geometric(coeffs[-1], p_power(p, F(-rng.randint(3, 8), 4)))
    return RadialFunction(p, kmin, tuple(coeffs), inner, outer)


def test_space_params():
    assert P.r_conj == 2 and P.beta == F(3, 4)
    assert SpaceParams(F(3), F(1, 8)).conjugate() == SpaceParams(F(3, 2), F(1, 8))
    for r, a in ((1, F(1, 4)), (F(2), 0)):
        with pytest.raises(ValueError):
            SpaceParams(F(r), a)


def test_morrey_examples():
    ms = morrey_sup(RadialFunction.ball_indicator(2, 0), P)
    assert ms.value == ONE and ms.at == 0
    assert morrey_norm_pow(RadialFunction.zero(2), P).is_zero()


def test_morrey_power_function_unbounded():
    # |x|^((alpha-1)/r) on B^0: p^{-k alpha r} int_{B^k} |f|^r grows like p^{-k alpha} as k -> -inf
    f = RadialFunction.power_function(2, (P.alpha - 1) / P.r, 0)
    with pytest.raises(UnboundedSup):
        morrey_norm_pow(f, P)


def test_morrey_flat_power_function():
    # |x|^(alpha - 1/r) has a constant profile for k <= 0
    f = RadialFunction.power_function(2, P.alpha - 1 / P.r, 0)
    val = morrey_norm_pow(f, P)
    expected = PPowerSum.rational(F(1, 2)) * geometric_inverse(p_power(2, -P.alpha * P.r))
    assert compare_certified(val, expected).outcome is Ordering.EQUAL
    assert abs(float(val) - scan_morrey(f, P)) < 1e-9


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("m", range(-5, 6))
def test_morrey_indicators(p, m):
    f = RadialFunction.ball_indicator(p, m)
    val = morrey_norm_pow(f, P)
    brute = max(p ** (-k * 0.5) * min(p ** k, p ** m) for k in range(-60, 61))
    assert val == p_power(p, F(m, 2))
    assert abs(float(val) - brute) < 1e-12 * brute


@pytest.mark.parametrize("seed", range(15))
def test_morrey_against_scan(seed):
    rng = random.Random(seed)
    f = random_function(rng)
    params = rng.choice([P, SpaceParams(F(3), F(1, 8)), SpaceParams(F(3, 2), F(1, 2))])
    try:
        val = morrey_norm_pow(f, params)
    except UnboundedSup:
        return
    brute = scan_morrey(f, params, -80, 80)
    v = Interval.coerce(val)
    assert float(v.lo) <= brute * (1 + 1e-9) and brute <= float(v.hi) * (1 + 1e-9)


def test_certify_block_examples():
    blk = certify_block(RadialFunction.ball_indicator(2, 0), 0, P)
    assert blk.certificate.outcome is Ordering.EQUAL
    with pytest.raises(NormTooLarge):
        certify_block(RadialFunction.ball_indicator(2, 0, 2), 0, P)
    with pytest.raises(NotSupported):
        certify_block(RadialFunction.ball_indicator(2, 1), 0, P)


@pytest.mark.parametrize("t", range(-4, 5))
def test_rescaled_dilated_block(t):
    a = RadialFunction.sphere_indicator(3, 2, p_power(3, -2))
    certify_block(a, 2, P)
    b = dilate(a, t).scale(p_power(3, t * P.beta))
    assert certify_block(b, 2 - t, P).certificate.outcome in (Ordering.LESS, Ordering.EQUAL)


def test_upper_self_block():
    dec = block_norm_upper(RadialFunction.ball_indicator(2, 0), P)
    assert dec.total == ONE and len(dec.pieces) == 1


def test_upper_two_spheres():
    f = combine(RadialFunction.sphere_indicator(2, 0), RadialFunction.sphere_indicator(2, 1))
    dec = block_norm_upper(f, P, strategy="sphere")
    expected = PPowerSum.rational(0)
    for k in (0, 1):
        expected = expected + haar_measure(k, Shape.SPHERE, 2) ** F(1, 2) * p_power(2, F(k, 4))
    assert dec.total == expected and len(dec.pieces) == 2
    for lam, blk in dec.pieces:
        assert blk.certificate.outcome is Ordering.EQUAL
    best = block_norm_upper(f, P)
    assert compare_certified(best.total, dec.total).outcome is not Ordering.GREATER


def test_upper_power_function_closed_form():
    f = RadialFunction.power_function(2, (P.alpha - 1) / P.r, 0)
    dec = block_norm_upper(f, P, strategy="sphere")
    assert isinstance(dec.total, PPowerSum)
    # piece on S^k has lambda = (f(S^k)^r |S^k|)^{1/r} p^{k alpha}
    brute = sum(
        (float(f(k)) ** 2 * 2.0 ** k * 0.5) ** 0.5 * 2.0 ** (k / 4) for k in range(-200, 1)
    )
    assert abs(float(dec.total) - brute) < 1e-12 * brute
    best = block_norm_upper(f, P)
    assert float(best.total) <= float(dec.total)


def test_upper_pieces_reassemble():
    f = RadialFunction(2, -1, (1, p_power(2, F(1, 2)), PPowerSum.rational(F(1, 3))))
    dec = block_norm_upper(f, P)
    assert dec.residual_bound.is_zero()
    acc = RadialFunction.zero(2)
    for lam, blk in dec.pieces:
        acc = combine(acc, blk.fn, (ONE, lam))
    for k in range(-6, 5):
        assert acc(k) == f(k)


def test_lower_dual_examples():
    b = RadialFunction.ball_indicator(2, 0)
    assert block_norm_lower_dual(b, b, P) == ONE
    with pytest.raises(ValueError):
        block_norm_lower_dual(b, RadialFunction.zero(2), P)


def test_bracket_collapses_for_ball():
    br = block_norm_bracket(RadialFunction.ball_indicator(2, 0), P)
    assert br.collapsed and br.upper == ONE


@pytest.mark.parametrize("seed", range(10))
def test_bracket_consistency(seed):
    rng = random.Random(100 + seed)
    f = random_function(rng, tails=False)
    br = block_norm_bracket(f, P)
    assert compare_certified(br.lower, br.upper).outcome is not Ordering.GREATER
    n = f.kmax
    if lr_norm_pow(f, P.r) == PPowerSum.rational(0):
        return
    scale = root_upper(lr_norm_pow(f, P.r), P.r).inverse() * p_power(2, -n * P.alpha)
    blk = certify_block(f.scale(scale), n, P)
    lower, _ = block_norm_lower(blk.fn, P)
    assert compare_certified(lower, ONE).outcome is not Ordering.GREATER


def test_holder_examples():
    b = RadialFunction.ball_indicator(2, 0)
    rec = holder_pairing_check(b, b, P)
    assert rec.outcome is Outcome.PASS
    assert compare_certified(rec.lhs, rec.rhs).outcome is Ordering.EQUAL
    assert holder_pairing_check(RadialFunction.zero(2), b, P).outcome is Outcome.PASS


def test_minkowski():
    rng = random.Random(7)
    fs = [random_function(rng, tails=False) for _ in range(3)]
    rec = verify_minkowski(fs, [1, 2, F(1, 2)], P)
    assert rec.outcome is Outcome.PASS
