"""Validated integration with a certified total error bound.

Both routes use the composite midpoint rule on a uniform grid and differ
only in how the cell count is chosen:

* `integrate_modulus` resolves the oscillation through the modulus of
  continuity: cell width below 2**-m(n+2) forces each cell's deviation
  under 2**-(n+2), at the price of exponentially many cells in n;
* `integrate_smooth` uses a second-derivative witness, for which the
  midpoint rule is second order, so the cell count grows like 2**(n/2).

The error budget is split the same way in both: half oscillation (or
curvature), half evaluation, plus a final-rounding crumb, totalling under
2**-n.  Grids are uniform and cell counts deterministic; no adaptivity, so
work counters are machine-independent.
"""

from __future__ import annotations

import os as _os
from dataclasses import dataclass
from fractions import Fraction

from . import _kernels as kern
from .cfunc import CFunc
from .dyadic import Dyadic, ceil_log2_frac
from .errors import BudgetExceededError, ContractError
from .work import WorkCounter

DEFAULT_CELL_CEILING = 1 << 26

_ceiling_override: int | None = None


def cell_ceiling() -> int:
    """Current quadrature cell ceiling (resource guard)."""
    if _ceiling_override is not None:
        return _ceiling_override
    env = _os.environ.get("CERTCAP_CELL_CEILING")
    if env:
        return int(env)
    return DEFAULT_CELL_CEILING


def set_cell_ceiling(value: int | None):
    """Override the cell ceiling in-process (None restores env/default)."""
    global _ceiling_override
    _ceiling_override = value


@dataclass(frozen=True)
class GridPlan:
    """A concrete uniform midpoint grid and its evaluation budget."""

    cells: int
    sample_bits: int      # per-sample evaluation precision
    grid_scale: int       # fractional bits of the rounded midpoints
    h: Fraction           # exact cell width
    base_num: int         # midpoints: round((base + step*i) / den) at grid_scale
    step_num: int
    den: int
    mlo: int
    mhi: int

    def points(self):
        return kern.midpoint_grid(self.cells, self.base_num, self.step_num,
                                  self.den, self.mlo, self.mhi)


def _check_interval(f: CFunc, a: Fraction, b: Fraction):
    if not a < b:
        raise ValueError(f"empty or inverted interval [{a}, {b}]")
    if not (f.domain_lo <= a and b <= f.domain_hi):
        raise ContractError(
            f"interval [{a}, {b}] not inside domain "
            f"[{f.domain_lo}, {f.domain_hi}]")


def _make_plan(f: CFunc, a: Fraction, b: Fraction, n: int, cells: int,
               grid_bits: int) -> GridPlan:
    if cells > cell_ceiling():
        raise BudgetExceededError(
            f"{cells} quadrature cells exceed the ceiling {cell_ceiling()}; "
            f"raise CERTCAP_CELL_CEILING or lower the precision")
    width = b - a
    s_shift = ceil_log2_frac(width)
    q = n + 2 + max(0, s_shift)
    h = width / cells
    gs = grid_bits
    # mid_i = a + h*(2i+1)/2 rounded to gs fractional bits, clamped into [a, b]
    base_num = (2 * a.numerator * h.denominator
                + h.numerator * a.denominator) << gs
    step_num = (2 * h.numerator * a.denominator) << gs
    den = 2 * a.denominator * h.denominator
    mlo = -((-a.numerator << gs) // a.denominator)
    mhi = (b.numerator << gs) // b.denominator
    return GridPlan(cells, q, gs, h, base_num, step_num, den, mlo, mhi)


def plan_modulus(f: CFunc, a, b, n: int) -> GridPlan:
    """The modulus-route grid for integrating f over [a, b] to 2**-n."""
    a, b = Fraction(a), Fraction(b)
    _check_interval(f, a, b)
    s_shift = ceil_log2_frac(b - a)
    mbits = f.modulus(max(0, n + 2 + s_shift))
    width = b - a
    cells = -((-width.numerator << mbits) // width.denominator)  # ceil
    return _make_plan(f, a, b, n, max(1, cells), mbits + 4)


def plan_smooth(f: CFunc, a, b, n: int) -> GridPlan:
    """The curvature-route grid: (b-a) h^2 d2/24 <= 2**-(n+2)."""
    a, b = Fraction(a), Fraction(b)
    _check_interval(f, a, b)
    if f.d2_bound is None:
        raise ContractError(
            f"smooth integration needs a second-derivative witness on "
            f"{f.label or 'the integrand'}")
    width = b - a
    target = width**3 * f.d2_bound * (1 << (n + 2)) / 24
    cells = max(1, _ceil_sqrt_frac(target))
    s_shift = ceil_log2_frac(width)
    gbits = f.modulus(max(0, n + 3 + max(0, s_shift))) + 2
    return _make_plan(f, a, b, n, cells, gbits)


def _ceil_sqrt_frac(x: Fraction) -> int:
    import math

    if x <= 0:
        return 0
    k = math.isqrt(x.numerator // x.denominator)
    while k * k < x:
        k += 1
    return k


def finish_quadrature(total: int, oscale: int, h: Fraction, n: int) -> Dyadic:
    """h * (total * 2**-oscale) rounded once to n+3 fractional bits."""
    res = Fraction(total * h.numerator, h.denominator << oscale)
    return Dyadic.from_rational(res.numerator, res.denominator, n + 3)


def _run(f: CFunc, plan: GridPlan, n: int, counter: WorkCounter | None) -> Dyadic:
    xs = plan.points()
    vals, oscale = f.eval_batch(xs, plan.grid_scale, plan.sample_bits)
    if counter is not None:
        counter.quadrature_cells += plan.cells
        counter.psd_evals += plan.cells
        counter.note_precision(plan.sample_bits)
    return finish_quadrature(sum(vals), oscale, plan.h, n)


def integrate_modulus(f: CFunc, a, b, n: int,
                      counter: WorkCounter | None = None) -> Dyadic:
    """Certified integral via the modulus of continuity: error <= 2**-n."""
    a, b = Fraction(a), Fraction(b)
    if f.const_value is not None:
        _check_interval(f, a, b)
        res = f.const_value * (b - a)
        return Dyadic.from_rational(res.numerator, res.denominator, n + 1)
    plan = plan_modulus(f, a, b, n)
    return _run(f, plan, n, counter)


def integrate_smooth(f: CFunc, a, b, n: int,
                     counter: WorkCounter | None = None) -> Dyadic:
    """Certified integral via a second-derivative witness: error <= 2**-n."""
    a, b = Fraction(a), Fraction(b)
    if f.const_value is not None:
        _check_interval(f, a, b)
        res = f.const_value * (b - a)
        return Dyadic.from_rational(res.numerator, res.denominator, n + 1)
    plan = plan_smooth(f, a, b, n)
    return _run(f, plan, n, counter)


def integrate(f: CFunc, a, b, n: int, counter: WorkCounter | None = None,
              mode: str = "auto") -> Dyadic:
    """Route to the smooth path when a witness allows it, else the modulus path."""
    if mode == "modulus":
        return integrate_modulus(f, a, b, n, counter)
    if mode == "smooth":
        return integrate_smooth(f, a, b, n, counter)
    if mode != "auto":
        raise ValueError(f"unknown integration mode {mode!r}")
    if f.d2_bound is not None:
        return integrate_smooth(f, a, b, n, counter)
    return integrate_modulus(f, a, b, n, counter)
