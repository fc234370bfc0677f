"""Certified elementary functions on dyadic arguments.

Each evaluator returns a dyadic within 2**-n of the true value, with the
error budget spelled out where the working scale is chosen.  Trigonometric
and exponential evaluation follow the same scheme: scale the argument down
by a power of two until it has magnitude at most one, sum the Taylor series
(exact rational coefficients, one rounding per term), then undo the scaling
with double-angle or squaring steps, one rounding per step.  The constant
pi comes from the two-term arctangent identity
pi = 16*atan(1/5) - 4*atan(1/239), whose terms are exact rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import _kernels as kern
from .dyadic import Dyadic, ceil_log2_frac, div_round_away

_pi_cache: dict[int, int] = {}


def _atan_inv_scaled(x: int, w: int) -> int:
    """atan(1/x) scaled by 2**w for an integer x >= 2; alternating series.

    Terms 1/((2k+1) x**(2k+1)) are rounded once each; the loop stops when a
    term rounds to zero, at which point the alternating tail is below one
    unit.  Total error is under (terms/2 + 2) units.
    """
    x2 = x * x
    xp = x
    s = 0
    k = 0
    while True:
        t = div_round_away(1 << w, (2 * k + 1) * xp)
        if t == 0:
            break
        s += -t if k & 1 else t
        k += 1
        xp *= x2
    return s


def pi_scaled(w: int) -> int:
    """pi as an integer scaled by 2**-w, within 2 units of the last place."""
    got = _pi_cache.get(w)
    if got is None:
        guard = max(10, (24 * (w + 40)).bit_length())
        wi = w + guard
        s = 16 * _atan_inv_scaled(5, wi) - 4 * _atan_inv_scaled(239, wi)
        got = div_round_away(s, 1 << guard)
        _pi_cache[w] = got
    return got


def pi_dyadic(n: int) -> Dyadic:
    """pi within 2**-n."""
    w = n + 4
    return Dyadic(pi_scaled(w), -w).round_to(n + 2)


def sqrt_dyadic(x: Dyadic, n: int) -> Dyadic:
    """Square root of x >= 0 within 2**-n.

    isqrt of the floor of x*4**(n+1) is within 1.5 grid steps of the true
    root at scale 2**-(n+1), which is inside 2**-n.
    """
    if x.sign < 0:
        raise ValueError("square root of a negative dyadic")
    if x.sign == 0:
        return Dyadic(0)
    shift = x.exp + 2 * (n + 1)
    v = x.man << shift if shift >= 0 else x.man >> -shift
    return Dyadic(math.isqrt(v), -(n + 1))


def _factorial_terms(bits: int) -> int:
    """Smallest K with K! >= 2**bits (series length for unit arguments)."""
    k, fact = 1, 1
    while fact < 1 << bits:
        k += 1
        fact *= k
    return k


def trig_plan(max_abs: Fraction, prec: int):
    """(scale, halvings, terms) for sin/cos at precision 2**-prec.

    halvings scale the argument under 1 in magnitude; each doubling step on
    the way back up multiplies the accumulated error by at most 4, hence the
    2*halvings extra bits.
    """
    halvings = max(0, ceil_log2_frac(max_abs)) if max_abs > 0 else 0
    terms = _factorial_terms(prec + 2 * halvings + 8)
    w = prec + 8 + 2 * halvings + terms.bit_length()
    return w, halvings, terms


def sin_dyadic(x: Dyadic, n: int, max_abs=None) -> Dyadic:
    m = abs(x.to_fraction())
    w, j, terms = trig_plan(Fraction(max_abs) if max_abs is not None else m, n)
    s, _ = kern.sin_cos(x.scaled(w), w, j, terms)
    return Dyadic(s, -w).round_to(n + 2)


def cos_dyadic(x: Dyadic, n: int, max_abs=None) -> Dyadic:
    m = abs(x.to_fraction())
    w, j, terms = trig_plan(Fraction(max_abs) if max_abs is not None else m, n)
    _, c = kern.sin_cos(x.scaled(w), w, j, terms)
    return Dyadic(c, -w).round_to(n + 2)


def exp_plan(max_abs: Fraction, upper: Fraction, prec: int):
    """(scale, halvings, terms) for exp at precision 2**-prec.

    `upper` bounds the argument from above and fixes how many extra bits the
    value's magnitude costs (exp(x) <= 2**(1.45*x + 1)); each squaring step
    on the way up doubles the relative error.
    """
    halvings = max(0, ceil_log2_frac(max_abs)) if max_abs > 0 else 0
    mag_bits = 0
    if upper > 0:
        mag_bits = int(upper.numerator * 29 // (upper.denominator * 20)) + 2
    terms = _factorial_terms(prec + halvings + mag_bits + 8)
    w = prec + 8 + halvings + mag_bits + terms.bit_length()
    return w, halvings, terms


def exp_dyadic(x: Dyadic, n: int, max_abs=None) -> Dyadic:
    xf = x.to_fraction()
    bound = Fraction(max_abs) if max_abs is not None else abs(xf)
    w, j, terms = exp_plan(bound, max(xf, Fraction(0)), n)
    e = kern.exp_series(x.scaled(w), w, j, terms)
    return Dyadic(e, -w).round_to(n + 2)
