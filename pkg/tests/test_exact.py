from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_hh.errors import MultiTermPower
from padic_hh.exact import (
    ONE,
    ZERO,
    Interval,
    Ordering,
    PPowerSum,
    arith,
    canonicalize,
    compare_certified,
    pow_rational,
    to_decimal,
)


def pw(base, e, coef=1):
    return PPowerSum.power(base, F(e), coef)


# canonical form


def test_integer_folding():
    two = ONE + ONE
    assert two == PPowerSum.rational(2)
    assert two.is_single_term()
    assert two.exponent_map() == (1, {2: F(1)})


def test_exponent_vectors_merge():
    assert canonicalize(pw(2, "1/2") * pw(3, "1/2")) == pw(6, "1/2")


def test_cancellation_gives_zero():
    x = PPowerSum.rational(5)
    assert (x - x).is_zero()
    assert (x - x).terms == ()


def test_canonicalize_is_idempotent():
    x = pw(2, "1/3") + pw(12, "1/2") + PPowerSum.rational(F(7, 9))
    assert canonicalize(canonicalize(x)) == canonicalize(x)


# arithmetic


def test_exponents_add():
    assert arith(pw(3, "1/2"), pw(3, "1/2"), "mul") == PPowerSum.rational(3)


def test_distribution():
    p, k = 5, 3
    lhs = arith(PPowerSum.rational(1 - F(1, p)), pw(p, k), "mul")
    assert lhs == pw(p, k) - pw(p, k - 1)


def test_term_merge():
    x = pw(2, "1/4") + pw(2, "1/4")
    assert x == pw(2, "5/4")


def test_sub_op():
    assert arith(pw(2, "1/2"), pw(2, "1/2"), "sub").is_zero()


# powers


def test_pow_rational_examples():
    assert pow_rational(pw(2, 3), F(-1, 4)) == pw(2, "-3/4")
    assert pow_rational(pw(2, -3), 2) == pw(2, -6)


def test_pow_of_sum_rejected():
    x = pw(2, 3) * PPowerSum.rational(F(1, 2))  # single term, fine
    pow_rational(x, F(1, 2))
    two_terms = pw(2, 0) + pw(2, "1/2")
    with pytest.raises(MultiTermPower):
        pow_rational(two_terms, F(1, 2))


# comparison


def test_compare_examples():
    assert compare_certified(ONE + ONE, PPowerSum.rational(2)).outcome is Ordering.EQUAL
    assert compare_certified(pw(2, "1/2"), PPowerSum.rational(F(3, 2))).outcome is Ordering.LESS
    assert compare_certified(pw(2, "-1/4"), ZERO).outcome is Ordering.GREATER


def test_compare_needs_refinement():
    # 2^(1/2) + 3^(1/2) vs 3.146..., a sum compared against a close rational
    x = pw(2, "1/2") + pw(3, "1/2")
    c = compare_certified(x, PPowerSum.rational(F(3146264, 1000000)))
    assert c.outcome is Ordering.GREATER
    assert c.precision_used >= 64


# decimals


def test_to_decimal_examples():
    assert to_decimal(pw(2, "-1/4"), 6) == "0.840896 ± 1e-6"
    assert to_decimal(ZERO, 6) == "0.000000 ± 0"
    assert to_decimal(ONE - PPowerSum.rational(F(1, 2)), 6) == "0.500000 ± 0"


def test_json_round_trip():
    x = pw(2, "1/4", F(3, 7)) + pw(3, "-2/3")
    data = x.to_json()
    assert all(set(t) == {"coef", "exps"} for t in data)
    assert PPowerSum.from_json(data) == x


# properties

exps = st.fractions(min_value=-3, max_value=3, max_denominator=4)
primes = st.sampled_from([2, 3, 5, 7])
coefs = st.fractions(min_value=F(-5), max_value=F(5), max_denominator=6).filter(lambda q: q != 0)


@st.composite
def sums(draw):
    n = draw(st.integers(0, 3))
    acc = ZERO
    for _ in range(n):
        acc = acc + PPowerSum.power(draw(primes), draw(exps), draw(coefs))
    return acc


@settings(max_examples=60, deadline=None)
@given(sums(), sums(), sums())
def test_ring_laws(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@settings(max_examples=60, deadline=None)
@given(sums())
def test_canonical_form_preserves_value(x):
    a = canonicalize(x).enclose(128)
    b = x.enclose(128)
    assert a.lo <= b.hi and b.lo <= a.hi
    assert compare_certified(x, x).outcome is Ordering.EQUAL


@settings(max_examples=60, deadline=None)
@given(primes, exps, st.fractions(min_value=-2, max_value=2, max_denominator=3),
       st.fractions(min_value=-2, max_value=2, max_denominator=3))
def test_power_composition(p, e, a, b):
    x = PPowerSum.power(p, e)
    assert pow_rational(pow_rational(x, a), b) == pow_rational(x, a * b)


def test_interval_pow_brackets_root():
    iv = Interval.point(2).pow(F(1, 2), 96)
    assert iv.lo ** 2 <= 2 <= iv.hi ** 2
    assert iv.width < F(1, 2 ** 80)
