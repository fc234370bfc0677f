"""Validated quadrature: enclosure soundness, work counts, fast paths."""

from fractions import Fraction

import mpmath
import pytest

from certcap.cfunc import constant, ln_compose
from certcap.errors import BudgetExceededError, ContractError
from certcap.parse import parse_expression
from certcap.rigorint import (cell_ceiling, integrate, integrate_modulus,
                              integrate_smooth, plan_modulus, plan_smooth,
                              set_cell_ceiling)
from certcap.work import WorkCounter
from conftest import assert_within

CLOSED_FORMS = [
    ("f", lambda: mpmath.mpf(1) / 2),
    ("1 + f", lambda: mpmath.mpf(3) / 2),
    ("ln(1 + f)", lambda: 2 * mpmath.log(2) - 1),
    ("2 + sin(2*pi*f)", lambda: mpmath.mpf(2)),
    ("exp(-f)", lambda: 1 - mpmath.exp(-1)),
    ("1 + f*f", lambda: mpmath.mpf(4) / 3),
]


def test_modulus_route_examples():
    fx = parse_expression("f")
    assert_within(integrate_modulus(fx, 0, 1, 10), mpmath.mpf(1) / 2, 10, "int x")
    f2 = parse_expression("ln(1 + f)")
    assert_within(integrate_modulus(f2, 0, 1, 12), 2 * mpmath.log(2) - 1, 12,
                  "int ln(1+x)")


def test_constant_fast_path():
    c = constant(Fraction(7, 3), (0, 2))
    counter = WorkCounter()
    got = integrate_modulus(c, Fraction(1, 2), 2, 30, counter)
    assert abs(got.to_fraction() - Fraction(7, 2)) <= Fraction(1, 1 << 30)
    assert counter.quadrature_cells == 0


def test_smooth_route_examples():
    aff = parse_expression("1 + f")
    counter = WorkCounter()
    got = integrate_smooth(aff, 0, 1, 40, counter)
    assert abs(got.to_fraction() - Fraction(3, 2)) <= Fraction(1, 1 << 40)
    assert counter.quadrature_cells == 1  # zero curvature: single cell
    trig = parse_expression("2 + sin(2*pi*f)")
    assert_within(integrate_smooth(trig, 0, 1, 20), mpmath.mpf(2), 20, "trig")
    lnf = parse_expression("ln(1 + f)")
    assert_within(integrate_smooth(lnf, 0, 1, 24), 2 * mpmath.log(2) - 1, 24,
                  "smooth ln")


@pytest.mark.parametrize("n", [8, 12, 16])
def test_enclosure_soundness_modulus(n):
    for expr, ref in CLOSED_FORMS:
        f = parse_expression(expr)
        assert_within(integrate_modulus(f, 0, 1, n), ref(), n, f"mod {expr}@{n}")


def test_enclosure_soundness_modulus_n20():
    # n=20 means millions of cells; restrict to integrands with exact
    # per-cell arithmetic so the suite stays fast on the pure backend too
    for expr, ref in CLOSED_FORMS:
        if any(fn in expr for fn in ("ln", "sin", "exp")):
            continue
        f = parse_expression(expr)
        assert_within(integrate_modulus(f, 0, 1, 20), ref(), 20, f"mod {expr}@20")


@pytest.mark.parametrize("n", [20, 30, 40])
def test_enclosure_soundness_smooth(n):
    for expr, ref in CLOSED_FORMS:
        f = parse_expression(expr)
        assert_within(integrate_smooth(f, 0, 1, n), ref(), n, f"smooth {expr}@{n}")


def test_partial_interval_and_shifted_bounds():
    f = parse_expression("1 + f", (0, 4))
    got = integrate_modulus(f, Fraction(1, 3), Fraction(7, 3), 12)
    # integral of 1+x over [1/3, 7/3]: 2 + (49/9 - 1/9)/2 = 2 + 8/3
    assert abs(got.to_fraction() - (2 + Fraction(8, 3))) <= Fraction(1, 1 << 12)


def test_work_counter_matches_plan_and_lipschitz_bound():
    for expr, lip in [("f", 1), ("1 + 2*f", 2), ("2 + sin(2*pi*f)", 7)]:
        f = parse_expression(expr)
        for n in (6, 9, 12):
            plan = plan_modulus(f, 0, 1, n)
            counter = WorkCounter()
            integrate_modulus(f, 0, 1, n, counter)
            assert counter.quadrature_cells == plan.cells
            assert plan.cells <= 4 * lip * (1 << (n + 2))


def test_linearity_within_bounds():
    f = parse_expression("1 + f")
    g = parse_expression("ln(1 + f)")
    n = 12
    both = parse_expression("1 + f + ln(1 + f)")
    total = integrate_modulus(both, 0, 1, n).to_fraction()
    parts = (integrate_modulus(f, 0, 1, n).to_fraction()
             + integrate_modulus(g, 0, 1, n).to_fraction())
    assert abs(total - parts) <= 3 * Fraction(1, 1 << n)


def test_ln_compose_integrand():
    lnf = ln_compose(parse_expression("1 + f"))
    assert_within(integrate_modulus(lnf, 0, 1, 12), 2 * mpmath.log(2) - 1, 12,
                  "window ln")
    assert_within(integrate_smooth(lnf, 0, 1, 24), 2 * mpmath.log(2) - 1, 24,
                  "window ln smooth")


def test_interval_validation():
    f = parse_expression("1 + f")
    with pytest.raises(ValueError):
        integrate_modulus(f, 1, 0, 8)
    with pytest.raises(ContractError):
        integrate_modulus(f, 0, 2, 8)
    with pytest.raises(ContractError):
        integrate_smooth(constant_no_d2(), 0, 1, 8)


def constant_no_d2():
    f = parse_expression("1 + f")
    f.d2_bound = None
    f.const_value = None
    return f


def test_cell_ceiling_guard():
    f = parse_expression("1 + f")
    set_cell_ceiling(1000)
    try:
        assert cell_ceiling() == 1000
        with pytest.raises(BudgetExceededError):
            integrate_modulus(f, 0, 1, 20)
    finally:
        set_cell_ceiling(None)


def test_cell_ceiling_env(monkeypatch):
    monkeypatch.setenv("CERTCAP_CELL_CEILING", "12345")
    assert cell_ceiling() == 12345


def test_mode_router():
    f = parse_expression("1 + f")
    counter = WorkCounter()
    integrate(f, 0, 1, 20, counter, "auto")  # picks smooth: tiny cell count
    assert counter.quadrature_cells <= 2
    with pytest.raises(ValueError):
        integrate(f, 0, 1, 8, None, "magic")


def test_plan_smooth_cells_scale_with_half_precision():
    f = parse_expression("ln(1 + f)")
    k20 = plan_smooth(f, 0, 1, 20).cells
    k30 = plan_smooth(f, 0, 1, 30).cells
    ratio = k30 / k20
    assert 20 < ratio < 50  # ~2^5 = 32 for +10 bits
