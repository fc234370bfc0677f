"""Error-bounded Taylor logarithm on a fixed positive bracket.

The central object is `LogWindow`, a bracket [lower, upper] of positive
rationals together with exactly computed constants that control a centered
Taylor expansion of the natural logarithm:

* ``contraction``: max over the bracket of |x/center - 1|, strictly < 1;
* ``tail_factor``: contraction/(1 - contraction), so truncating the series
  after m*m terms leaves a tail below tail_factor * 2**-m once
  contraction**m < 1/2 (index ``m_half``);
* ``slope_bound``: 1/lower, a Lipschitz bound for every truncation of the
  series on the bracket.

`taylor_log_poly` evaluates the degree-m**2 truncation at a dyadic point to
any requested accuracy; `log_compose` turns a certified evaluator for a
function g with range inside the bracket into a certified evaluator for
ln(g) by padding the precision enough to absorb both the series tail and
the Lipschitz-propagated input error.

All series arithmetic runs through the kernel backend on scaled integers;
logs of rational constants use the faster odd series
ln(y) = 2*(t + t^3/3 + ...) with t = (y-1)/(y+1) after scaling y into
[3/4, 3/2) by a power of two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import _kernels as kern
from .dyadic import Dyadic, ceil_log2_frac, div_round_away, floor_log2_frac
from .errors import ContractError

_ln2_cache: dict[int, int] = {}


def ln2_scaled(w: int) -> int:
    """ln 2 as an integer scaled by 2**-w, within 2 units of the last place.

    Uses ln 2 = 2*atanh(1/3); the series runs at 10 guard bits so the
    per-term roundings (about 9/8 units each) stay below one output unit.
    """
    got = _ln2_cache.get(w)
    if got is None:
        guard = max(10, (3 * (w + 32)).bit_length())  # > log2 of total unit cost
        wi = w + guard
        nterms = (wi + 6) // 3 + 2  # (2K+1)*log2(3) >= wi+4 tail margin
        v = div_round_away(1 << wi, 3)
        a = kern.atanh_series(v, wi, nterms)
        got = div_round_away(a, 1 << (guard - 1))  # 2*a / 2**guard
        _ln2_cache[w] = got
    return got


def ln_rational_scaled(p: int, q: int, prec: int) -> tuple[int, int]:
    """(m, w) with |m*2**-w - ln(p/q)| <= 2**-(prec+1), for p, q > 0.

    Scales p/q into [3/4, 3/2) by a power of two, then sums the odd atanh
    series whose ratio t = (y-1)/(y+1) satisfies |t| <= 1/5.
    """
    if p <= 0 or q <= 0:
        raise ValueError("logarithm requires a positive rational")
    if p == q:
        return 0, prec
    e = floor_log2_frac(Fraction(p, q))
    # y = (p/q) / 2**e is in [1, 2); shift once more if y >= 3/2.
    if e >= 0:
        if 2 * p >= 3 * (q << e):
            e += 1
    else:
        if 2 * (p << -e) >= 3 * q:
            e += 1
    if e >= 0:
        vnum, vden = p - (q << e), p + (q << e)
    else:
        vnum, vden = (p << -e) - q, (p << -e) + q
    nterms = (prec + 8) // 4 + 2  # |t| <= 1/5 decays > 4.6 bits per term
    w = prec + 8 + max(0, ceil_log2_frac(4 * nterms + 2 * abs(e) + 16))
    v = div_round_away(vnum << w, vden)
    a = kern.atanh_series(v, w, nterms)
    m = 2 * a + (e * ln2_scaled(w) if e else 0)
    return m, w


def ln_rational(p: int, q: int, prec: int) -> Dyadic:
    """Natural log of p/q > 0 within 2**-prec, as a dyadic."""
    m, w = ln_rational_scaled(p, q, prec + 1)
    return Dyadic(m, -w).round_to(prec + 2)


@dataclass(frozen=True)
class LogWindow:
    """A positive bracket with precomputed log-series control constants."""

    lower: Fraction
    upper: Fraction
    center: Fraction
    contraction: Fraction
    tail_factor: Fraction
    slope_bound: Fraction
    m_half: int      # least m >= 1 with contraction**m < 1/2
    tail_pad: int    # least k >= 0 with tail_factor < 2**k
    slope_pad: int   # least k >= 0 with slope_bound < 2**k
    extra_pad: int   # 0 or 1; guarantees the compose error sum closes
    _center_ln: dict = field(default_factory=dict, compare=False, repr=False)

    def compose_padding(self, out_bits: int) -> int:
        """Evaluation precision demanded of the inner function for ln-composition.

        The padded precision absorbs the series tail (tail_pad), the
        Lipschitz-propagated evaluation error (slope_pad), one halving bit,
        and possibly one more bit when both pads are zero; it is also kept
        at least m_half so the m**2-term tail bound applies.
        """
        return max(out_bits + self.tail_pad + self.slope_pad + 1 + self.extra_pad,
                   self.m_half)

    def series_scale(self, budget: int, nterms: int) -> int:
        """Working scale for summing `nterms` centered-series terms to 2**-(budget+2).

        Every term costs at most 1/(1-contraction) + 1 units of rounding and
        the scaled ratio adds one propagated unit, so
        (nterms+2) * (inv + 1) * 2**-w <= 2**-(budget+2) suffices.
        """
        inv = (self.upper + self.lower) / (2 * self.lower)  # 1/(1-contraction)
        return budget + 6 + ceil_log2_frac(nterms + 4) + max(0, ceil_log2_frac(inv))

    def center_ln_scaled(self, w: int) -> int:
        """ln(center) at scale w, within 2 units; cached per scale."""
        got = self._center_ln.get(w)
        if got is None:
            m, mw = ln_rational_scaled(self.center.numerator, self.center.denominator, w + 3)
            got = div_round_away(m, 1 << (mw - w)) if mw > w else m << (w - mw)
            self._center_ln[w] = got
        return got


def make_log_window(lower, upper) -> LogWindow:
    """Build a `LogWindow` for 0 < lower < upper, all constants exact."""
    lower = Fraction(lower)
    upper = Fraction(upper)
    if not 0 < lower < upper:
        raise ValueError(f"need 0 < lower < upper, got [{lower}, {upper}]")
    center = (lower + upper) / 2
    contraction = (upper - lower) / (upper + lower)
    tail_factor = (upper - lower) / (2 * lower)
    slope_bound = 1 / lower

    bn, bd = contraction.numerator, contraction.denominator
    m_half, num, den = 1, bn, bd
    while 2 * num >= den:
        m_half += 1
        num *= bn
        den *= bd

    tail_pad = _strict_pow2_pad(tail_factor)
    slope_pad = _strict_pow2_pad(slope_bound)
    # Compose error closes iff tail + slope + poly rounding fit in one 2**-M:
    # (tail_factor + slope_bound + 1/4) <= 2**(tail_pad + slope_pad + 1 + extra).
    extra = 0
    if tail_factor + slope_bound + Fraction(1, 4) > 2 ** (tail_pad + slope_pad + 1):
        extra = 1
    return LogWindow(lower, upper, center, contraction, tail_factor,
                     slope_bound, m_half, tail_pad, slope_pad, extra)


def _strict_pow2_pad(x: Fraction) -> int:
    """Least k >= 0 with x < 2**k."""
    k = max(0, ceil_log2_frac(x))
    if x == 2**k:
        k += 1
    return k


def taylor_log_poly(window: LogWindow, m: int, x: Dyadic, budget: int) -> Dyadic:
    """Degree-m**2 centered log series at x, within 2**-budget of its exact value.

    For m >= window.m_half the returned value is additionally within
    tail_factor * 2**-m + 2**-budget of ln(x).
    """
    if m < 1:
        raise ValueError("series index m must be >= 1")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    xf = x.to_fraction()
    if not window.lower <= xf <= window.upper:
        raise ContractError(
            f"point {x} outside the log bracket [{window.lower}, {window.upper}]")
    nterms = m * m
    w = window.series_scale(budget, nterms)
    u = xf / window.center - 1
    u_scaled = div_round_away(u.numerator << w, u.denominator)
    s = kern.ln1p_series(u_scaled, w, nterms)
    lnc = window.center_ln_scaled(w)  # within 2 units of ln(center)
    return Dyadic(s + lnc, -w).round_to(budget + 3)


def log_compose(g_eval, window: LogWindow, point, out_bits: int) -> Dyadic:
    """Certified ln(g(point)) within 2**-out_bits.

    `g_eval(point, n)` must return a dyadic within 2**-n of g(point), and the
    true g(point) must sit inside the bracket with 2**-padding slack.  The
    inner function is queried once at the padded precision; the series
    truncation index equals that padding, so the tail and the propagated
    evaluation error each stay below half the output tolerance.
    """
    padded = window.compose_padding(out_bits)
    approx = g_eval(point, padded)
    af = approx.to_fraction()
    if not window.lower <= af <= window.upper:
        raise ContractError(
            f"inner evaluation {approx} left the log bracket "
            f"[{window.lower}, {window.upper}]; the range witness is violated")
    return taylor_log_poly(window, padded, approx, padded + 2)


def log_window_batch(window: LogWindow, cs, cshift: int, out_bits: int):
    """Batch form of the composed log for pre-evaluated inner samples.

    `cs` are inner-function values scaled by 2**-cshift, each within
    2**-padded of the true values (padded = window.compose_padding(out_bits));
    returns (values, w) with per-sample |values[i]*2**-w - ln(g_i)| <= 2**-out_bits.
    """
    padded = window.compose_padding(out_bits)
    nterms = padded * padded
    w = window.series_scale(padded + 2, nterms)
    lnx = window.center_ln_scaled(w)
    lo, hi = window.lower, window.upper
    cmin = -((-lo.numerator << cshift) // lo.denominator)   # ceil
    cmax = (hi.numerator << cshift) // hi.denominator       # floor
    bad, values = kern.ln_window_batch(
        cs, cshift, window.center.numerator, window.center.denominator,
        w, nterms, lnx, cmin, cmax)
    if bad >= 0:
        raise ContractError(
            f"inner sample {bad} left the log bracket [{lo}, {hi}]; "
            f"the range witness is violated")
    return values, w
