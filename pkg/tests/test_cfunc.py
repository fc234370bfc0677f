"""Certified functions: evaluation, combinators, certification, catalog."""

from fractions import Fraction

import mpmath
import pytest

from certcap.cfunc import (CATALOG, CertifyStatus, ModulusFn, add, add_rational,
                           affine_arg, catalog_noise, certify_bounds, constant,
                           ln_compose, mul, pos_part_of_level_minus,
                           scale_by_rational)
from certcap.dyadic import Dyadic
from certcap.errors import ContractError, PositivityError
from certcap.parse import parse_expression
from conftest import assert_within, fraction_of_mpf, mpf_of_fraction, random_dyadic

CATALOG_REFS = {
    "flat1": lambda x: mpmath.mpf(1),
    "flat2": lambda x: mpmath.mpf(2),
    "affine": lambda x: 1 + x,
    "affine2": lambda x: 1 + 2 * x,
    "poly2": lambda x: 1 + x * x,
    "trig": lambda x: 2 + mpmath.sin(2 * mpmath.pi * x),
    "halftrig": lambda x: 2 + mpmath.sin(mpmath.pi * x),
    "expdec": lambda x: mpmath.mpf(1) / 4 + mpmath.exp(-x),
    "stress2": lambda x: 1 + mpmath.sin(4 * x) / 2,
    "stress4": lambda x: 1 + mpmath.sin(16 * x) / 2,
}


def test_eval_examples():
    two = constant(2)
    assert two.eval(Dyadic(5, -3), 30) == Dyadic(2)
    aff = parse_expression("1 + f")
    got = aff.eval(Dyadic(1, -1), 20)
    assert abs(got.to_fraction() - Fraction(3, 2)) <= Fraction(1, 1 << 20)
    trig = parse_expression("2 + sin(2*pi*f)")
    assert_within(trig.eval(Dyadic(1, -2), 16), mpmath.mpf(3), 16, "2+sin at 1/4")


def test_eval_rejects_out_of_domain():
    f = parse_expression("1 + f")
    with pytest.raises(ContractError):
        f.eval(Dyadic(3), 10)


def test_scale_by_rational():
    half = scale_by_rational(constant(2), Fraction(1, 2))
    assert half.const_value == 1
    assert half.pos_witness == 1
    assert half.eval(Dyadic(1, -2), 20) == Dyadic(1)
    neg = scale_by_rational(parse_expression("1 + f"), -2)
    assert neg.pos_witness is None
    assert neg.upper_bound == -2
    got = neg.eval(Dyadic(1, -1), 20)
    assert abs(got.to_fraction() + 3) <= Fraction(1, 1 << 20)


def test_add_rational_shifts_witnesses():
    f = add_rational(parse_expression("f"), Fraction(1, 4))
    assert f.pos_witness == Fraction(1, 4)
    assert f.modulus is parse_expression("f").modulus or f.modulus(8) == 8
    got = f.eval(Dyadic(1, -1), 24)
    assert abs(got.to_fraction() - Fraction(3, 4)) <= Fraction(1, 1 << 24)


def test_add_and_mul_against_oracle(rng):
    f = parse_expression("1 + f")
    g = parse_expression("2 + sin(2*pi*f)")
    s = add(f, g)
    p = mul(f, g)
    for _ in range(25):
        x = random_dyadic(rng, Fraction(0), Fraction(1))
        n = rng.randint(4, 30)
        xv = mpf_of_fraction(x.to_fraction())
        ref_s = (1 + xv) + (2 + mpmath.sin(2 * mpmath.pi * xv))
        ref_p = (1 + xv) * (2 + mpmath.sin(2 * mpmath.pi * xv))
        assert_within(s.eval(x, n), ref_s, n, "add")
        assert_within(p.eval(x, n), ref_p, n, "mul")
    assert s.pos_witness is not None and s.pos_witness >= 2
    assert p.pos_witness is not None and p.pos_witness >= 1


def test_affine_arg_reindexes_domain(rng):
    # g(x) = f(x/2) on [0, 2] for f on [0, 1]
    f = parse_expression("1 + f*f")
    g = affine_arg(f, Fraction(1, 2), 0, (0, 2))
    for _ in range(20):
        x = random_dyadic(rng, Fraction(0), Fraction(2))
        n = rng.randint(4, 30)
        xv = mpf_of_fraction(x.to_fraction())
        assert_within(g.eval(x, n), 1 + (xv / 2) ** 2, n, "affine_arg")
    assert g.lip == f.lip / 2


def test_pos_part_examples():
    base = parse_expression("1 + f")
    clipped = pos_part_of_level_minus(Dyadic(3, -1), base)
    assert clipped.eval(Dyadic(1), 20) == Dyadic(0)
    got = clipped.eval(Dyadic(0), 20)
    assert abs(got.to_fraction() - Fraction(1, 2)) <= Fraction(1, 1 << 20)
    # 1-Lipschitz clip leaves the modulus untouched (structurally shared)
    assert clipped.modulus is base.modulus
    assert clipped.d2_bound is None
    assert clipped.lower_bound == 0


def test_ln_compose_constant():
    lnf = ln_compose(constant(2))
    assert_within(lnf.eval(Dyadic(1, -1), 16), mpmath.log(2), 16, "ln 2")


def test_ln_compose_oracle(rng):
    base = parse_expression("1 + f")
    lnf = ln_compose(base)
    assert lnf.lip == 1  # lip(N)/pos = 1/1
    for _ in range(20):
        x = random_dyadic(rng, Fraction(0), Fraction(1))
        n = rng.randint(4, 24)
        assert_within(lnf.eval(x, n),
                      mpmath.log(1 + mpf_of_fraction(x.to_fraction())), n, "lnN")


def test_ln_compose_requires_witnesses():
    with pytest.raises(PositivityError):
        ln_compose(parse_expression("f - 1"))
    bare = constant(2)
    bare.pos_witness = Fraction(2)
    bare.upper_bound = None
    with pytest.raises(ContractError):
        ln_compose(bare)


def test_modulus_soundness_catalog(rng):
    for name in CATALOG:
        f = catalog_noise(name)
        ref = CATALOG_REFS[name]
        for _ in range(12):
            n = rng.randint(3, 16)
            mbits = f.modulus(n)
            x = random_dyadic(rng, Fraction(0), Fraction(1), bits=mbits + 4)
            step = Fraction(1, 1 << mbits)
            yv = min(x.to_fraction() + step, Fraction(1))
            y = Dyadic.from_fraction(
                Fraction((yv.numerator << (mbits + 4)) // yv.denominator,
                         1 << (mbits + 4)))
            a = f.eval(x, n + 2).to_fraction()
            b = f.eval(y, n + 2).to_fraction()
            # modulus step bound plus the two evaluation errors
            assert abs(a - b) <= Fraction(1, 1 << n) + Fraction(1, 1 << (n + 1))


def test_catalog_positivity_and_bounds():
    assert len(CATALOG) == 10
    for name in CATALOG:
        f = catalog_noise(name)
        assert f.pos_witness is not None and f.pos_witness > 0, name
        assert f.upper_bound is not None, name
        assert f.d2_bound is not None, name
    stress8 = catalog_noise("stress8")
    assert stress8.lip >= 128


def test_certify_examples():
    trig = parse_expression("2 + sin(2*pi*f)")
    assert certify_bounds(trig, "min_above", Fraction(1, 2), 8).status \
        is CertifyStatus.CERTIFIED
    ramp = parse_expression("f")
    res = certify_bounds(ramp, "min_above", Fraction(1, 100), 12)
    assert res.status is CertifyStatus.REFUTED
    assert res.witness_point is not None
    flat = constant(1)
    assert certify_bounds(flat, "min_above", 1, 8).status \
        is CertifyStatus.UNRESOLVED


def test_certify_max_below():
    trig = parse_expression("2 + sin(2*pi*f)")
    assert certify_bounds(trig, "max_below", 4, 8).status \
        is CertifyStatus.CERTIFIED
    assert certify_bounds(trig, "max_below", Fraction(5, 2), 8).status \
        is CertifyStatus.REFUTED
    with pytest.raises(ValueError):
        certify_bounds(trig, "between", 1, 8)


def test_certify_soundness_random(rng):
    # CERTIFIED and REFUTED statements must be true against the oracle min
    f = catalog_noise("trig")
    true_min = fraction_of_mpf(mpmath.mpf(1))
    for _ in range(12):
        t = Fraction(rng.randint(1, 48), 16)
        res = certify_bounds(f, "min_above", t, 10)
        if res.status is CertifyStatus.CERTIFIED:
            assert true_min >= t
        elif res.status is CertifyStatus.REFUTED:
            assert true_min < t


def test_modulus_from_lipschitz():
    m = ModulusFn.from_lipschitz(Fraction(314159, 100000))
    assert m(8) == 10  # ceil(log2 pi) = 2
    assert ModulusFn.from_lipschitz(1)(8) == 8
    assert ModulusFn.from_lipschitz(0)(50) == 0
    assert ModulusFn.from_lipschitz(Fraction(1, 2))(8) == 7
