"""Expression grammar, derived bounds, and rejection cases."""

from fractions import Fraction

import mpmath
import pytest

from certcap.errors import ParseError
from certcap.parse import parse_expression
from conftest import assert_within, mpf_of_fraction, random_dyadic


def test_lipschitz_and_modulus_examples():
    f = parse_expression("2 + sin(pi*f)")
    assert f.lip > 3 and f.lip < Fraction(315, 100)  # essentially pi
    assert f.modulus(8) == 10  # n + 2
    g = parse_expression("1 + f")
    assert g.lip == 1
    assert g.modulus(8) == 8


def test_parse_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_expression("2 +")
    assert exc.value.position == 3
    with pytest.raises(ParseError) as exc:
        parse_expression("sin f")
    assert exc.value.position == 4
    with pytest.raises(ParseError) as exc:
        parse_expression("1 + $")
    assert exc.value.position == 4
    with pytest.raises(ParseError) as exc:
        parse_expression("(1 + f")
    assert exc.value.position == 6
    with pytest.raises(ParseError) as exc:
        parse_expression("1 2")
    assert exc.value.position == 2


def test_number_forms():
    assert parse_expression("2.5").const_value == Fraction(5, 2)
    assert parse_expression("1/4").const_value == Fraction(1, 4)
    assert parse_expression("3").const_value == 3
    assert parse_expression("-1/2 + 1").const_value == Fraction(1, 2)
    with pytest.raises(ParseError):
        parse_expression("1/0")


def test_constant_folding_keeps_exactness():
    f = parse_expression("sin(4*f)/2 + 1")
    assert f.lip == 2  # lip(sin(4f)) = 4, halved exactly
    assert f.pos_witness == Fraction(1, 2)


def test_unknown_name():
    with pytest.raises(ParseError) as exc:
        parse_expression("2 + tan(f)")
    assert exc.value.position == 4


def test_positivity_rejections():
    for bad in ("ln(f)", "sqrt(f - 1)", "1/(f - 1)", "1/sin(pi*f)"):
        with pytest.raises(ParseError):
            parse_expression(bad)


def test_negative_denominator_normalizes():
    f = parse_expression("(1 + f)/(-2 - f)")
    x = f.eval(__import__("certcap").Dyadic(1, -1), 20)
    assert abs(x.to_fraction() + Fraction(3, 5)) <= Fraction(1, 1 << 20)


def test_pi_is_certified():
    f = parse_expression("pi")
    assert_within(f.eval(__import__("certcap").Dyadic(1, -2), 40), mpmath.pi,
                  40, "pi node")


def test_deep_expression_oracle(rng):
    expr = "sqrt(2 + cos(pi*f)) + exp(-f*f)/(2 + f) + ln(3/2 + f)"
    f = parse_expression(expr)
    assert f.pos_witness is not None and f.pos_witness > 0
    assert f.d2_bound is not None
    for _ in range(15):
        x = random_dyadic(rng, Fraction(0), Fraction(1))
        n = rng.randint(4, 30)
        xv = mpf_of_fraction(x.to_fraction())
        ref = (mpmath.sqrt(2 + mpmath.cos(mpmath.pi * xv))
               + mpmath.exp(-xv * xv) / (2 + xv)
               + mpmath.log(mpmath.mpf(3) / 2 + xv))
        assert_within(f.eval(x, n), ref, n, "deep expr")


def test_domain_scaling():
    f = parse_expression("1 + f", (0, 4))
    assert f.domain_hi == 4
    assert f.upper_bound == 5
    got = f.eval(__import__("certcap").Dyadic(3), 20)
    assert abs(got.to_fraction() - 4) <= Fraction(1, 1 << 20)
    with pytest.raises(ValueError):
        parse_expression("1 + f", (1, 1))
