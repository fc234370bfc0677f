"""Shared oracle helpers.

The reference oracle is mpmath at 300 bits of working precision (well past
the 200-bit mark the comparisons need).  Comparisons convert the mpmath
value to an exact Fraction, so assertions are exact rational statements:
|computed - reference| <= tolerance + oracle slack.
"""

import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import settings

mpmath.mp.prec = 300

ORACLE_SLACK = Fraction(1, 1 << 240)

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def mpf_of_fraction(fr: Fraction):
    return mpmath.mpf(fr.numerator) / fr.denominator


def fraction_of_mpf(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    base = Fraction(man) * Fraction(2) ** exp
    return -base if sign else base


def assert_within(value, reference_mpf, bits: int, label: str = ""):
    """|value - reference| <= 2**-bits, exactly in rationals."""
    got = value.to_fraction() if hasattr(value, "to_fraction") else Fraction(value)
    ref = fraction_of_mpf(reference_mpf)
    err = abs(got - ref)
    tol = Fraction(1, 1 << bits) + ORACLE_SLACK
    assert err <= tol, (
        f"{label}: |{float(got)} - {float(ref)}| = {float(err):.3e} "
        f"> 2^-{bits} = {float(tol):.3e}")


@pytest.fixture
def rng():
    return random.Random(20240817)


def random_dyadic(rnd, lo: Fraction, hi: Fraction, bits: int = 16):
    """A random dyadic strictly inside [lo, hi] on the 2**-bits grid."""
    from certcap.dyadic import Dyadic

    lo_i = -((-lo.numerator << bits) // lo.denominator)
    hi_i = (hi.numerator << bits) // hi.denominator
    return Dyadic(rnd.randint(lo_i, hi_i), -bits)
