from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ultrametric_gas.exactnum import (
    RF,
    PoleError,
    UPoly,
    format_rational,
    parse_beta,
    parse_rational,
    rf_eval,
    rf_eval_float,
    rf_substitute_power,
    rf_taylor,
    u_from_beta,
)

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=6)
polys = st.lists(small_q, min_size=1, max_size=4).map(UPoly)


@st.composite
def rfs(draw):
    num = draw(polys)
    den = draw(polys)
    assume(not den.is_zero())
    return RF(num, den)


def _value(f, x):
    try:
        return rf_eval(f, x)
    except PoleError:
        return None


@settings(max_examples=60, deadline=None)
@given(rfs(), rfs(), small_q)
def test_evaluation_is_a_ring_homomorphism(f, g, x):
    fx, gx = _value(f, x), _value(g, x)
    assume(fx is not None and gx is not None)
    assert _value(f + g, x) == fx + gx
    assert _value(f - g, x) == fx - gx
    assert _value(f * g, x) == fx * gx
    if gx != 0 and not g.is_zero():
        h = _value(f / g, x)
        if h is not None:
            assert h == fx / gx


@settings(max_examples=60, deadline=None)
@given(rfs(), rfs(), rfs())
def test_field_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    if not a.is_zero():
        assert a * a.inverse() == 1


@settings(max_examples=40, deadline=None)
@given(rfs(), st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(lambda c: c != 0))
def test_canonical_form_is_unique(f, c):
    scaled = RF(f.num * UPoly([c]), f.den * UPoly([c]))
    assert scaled == f
    assert scaled.to_json() == f.to_json()
    assert hash(scaled) == hash(f)


def test_canonical_denominator_is_primitive_with_positive_lead():
    f = RF([1], [Fraction(-2, 3), Fraction(-4, 3)])
    den = f.den.coeffs
    assert den[-1] > 0
    assert all(c.denominator == 1 for c in den)
    assert den == (Fraction(1), Fraction(2))
    assert f.num.coeffs == (Fraction(-3, 2),)


def test_zero_is_zero_over_one():
    z = RF([0], [3, 1])
    assert z.is_zero() and z.den.coeffs == (Fraction(1),)


@settings(max_examples=40, deadline=None)
@given(rfs())
def test_json_roundtrip(f):
    assert RF.from_json(f.to_json()) == f


@pytest.mark.parametrize("x", [Fraction(1, 3), Fraction(-7, 2), Fraction(0), Fraction(10**30 + 1, 3)])
def test_rational_string_roundtrip(x):
    s = format_rational(x)
    assert "/" in s
    assert parse_rational(s) == x


def test_taylor_of_geometric_series():
    f = RF([1], [1, -1])
    assert rf_taylor(f, 5) == [1] * 6
    g = RF([0, 1], [1, -3])
    assert rf_taylor(g, 4) == [0, 1, 3, 9, 27]


def test_taylor_rejects_pole_at_zero():
    with pytest.raises(PoleError):
        rf_taylor(RF([1], [0, 1]), 3)


def test_eval_at_pole_raises():
    with pytest.raises(PoleError):
        rf_eval(RF([1], [1, -2]), Fraction(1, 2))


def test_float_evaluation_matches_exact():
    f = RF([1, 2, 3], [5, -1])
    assert rf_eval_float(f, 0.25) == pytest.approx(float(rf_eval(f, Fraction(1, 4))), rel=1e-15)


def test_negative_powers():
    u = RF.u()
    assert u**-2 * u**2 == 1
    assert RF.u_power(-3, 2) == 2 / u**3


@pytest.mark.parametrize(
    "q,beta,expected",
    [
        (3, Fraction(1), Fraction(1, 3)),
        (4, Fraction(1, 2), Fraction(1, 2)),
        (9, Fraction(-3, 2), Fraction(27)),
        (5, Fraction(0), Fraction(1)),
        (8, Fraction(2, 3), Fraction(1, 4)),
    ],
)
def test_u_from_beta_exact(q, beta, expected):
    assert u_from_beta(q, beta) == expected


def test_u_from_beta_irrational_is_float():
    u = u_from_beta(2, Fraction(1, 2))
    assert isinstance(u, float)
    assert u == pytest.approx(2**-0.5, rel=1e-15)


@pytest.mark.parametrize("text,value", [("1/2", Fraction(1, 2)), ("2", Fraction(2)), ("0.25", Fraction(1, 4)), ("-3/4", Fraction(-3, 4))])
def test_parse_beta(text, value):
    assert parse_beta(text) == value


@pytest.mark.parametrize("text", ["abc", "1/0", ""])
def test_parse_beta_rejects(text):
    with pytest.raises(ValueError):
        parse_beta(text)


@settings(max_examples=40, deadline=None)
@given(rfs(), st.integers(min_value=1, max_value=4), small_q)
def test_substitute_power(f, k, x):
    fx = _value(f, x**k)
    assume(fx is not None)
    assert rf_eval(rf_substitute_power(f, k), x) == fx
