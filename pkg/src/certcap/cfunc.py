"""Computable continuous functions on a compact interval.

A `CFunc` bundles a certified evaluator with the metadata that makes
rigorous downstream computation possible:

* a modulus of continuity (precision-in to precision-out map), here always
  derived from a rational Lipschitz bound;
* optional range witnesses: a strict positive lower bound, an upper bound,
  and a bound on the second derivative (the fast-quadrature witness).

Evaluation is batch-first: the engine hands a whole grid of dyadic points to
the function as scaled integers and receives scaled integers back, which
keeps the per-cell cost inside the kernel backend.  `CFunc.eval` is the
one-point convenience wrapper over the same path.

The combinators propagate evaluators, moduli and witnesses together, so a
pipeline like "clip a composed log against a level" stays certified end to
end without per-call reasoning.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

from . import _kernels as kern
from .dyadic import Dyadic, ceil_log2_frac
from .errors import ContractError, PositivityError
from .rigorlog import LogWindow, ln_rational, log_window_batch, make_log_window


class ModulusFn:
    """Monotone precision map m with |x-y| <= 2**-m(n) => |f(x)-f(y)| <= 2**-n."""

    __slots__ = ("_map", "shift")

    def __init__(self, map_bits: Callable[[int], int], shift: Optional[int] = None):
        self._map = map_bits
        self.shift = shift  # set when m(n) = max(0, n + shift)

    def __call__(self, n: int) -> int:
        return self._map(n)

    @classmethod
    def from_lipschitz(cls, lip) -> "ModulusFn":
        """Modulus for a Lipschitz function: m(n) = n + ceil(log2 lip)."""
        lip = Fraction(lip)
        if lip < 0:
            raise ValueError("Lipschitz bound must be >= 0")
        if lip == 0:
            return cls(lambda n: 0, shift=None)
        s = ceil_log2_frac(lip)
        return cls(lambda n: max(0, n + s), shift=s)

    @classmethod
    def shifted(cls, inner: "ModulusFn", extra: int) -> "ModulusFn":
        return cls(lambda n: inner(n + extra))


@dataclass
class CFunc:
    """A certified function on [domain_lo, domain_hi]."""

    domain_lo: Fraction
    domain_hi: Fraction
    batch: Callable  # (xs: seq[int], xscale: int, prec: int) -> (seq[int], oscale)
    modulus: ModulusFn
    lip: Optional[Fraction] = None
    pos_witness: Optional[Fraction] = None
    upper_bound: Optional[Fraction] = None
    lower_bound: Optional[Fraction] = None
    d2_bound: Optional[Fraction] = None
    const_value: Optional[Fraction] = None
    label: str = ""

    def eval(self, x: Dyadic, n: int) -> Dyadic:
        """Certified one-point evaluation: |f(x) - result| <= 2**-n."""
        xf = x.to_fraction()
        if not self.domain_lo <= xf <= self.domain_hi:
            raise ContractError(
                f"point {x} outside domain [{self.domain_lo}, {self.domain_hi}]")
        scale = x.prec
        values, oscale = self.batch([x.scaled(scale)], scale, n)
        return Dyadic(values[0], -oscale)

    def eval_batch(self, xs, xscale: int, prec: int):
        """Certified batch evaluation at dyadic points xs[i]*2**-xscale."""
        return self.batch(xs, xscale, prec)

    def magnitude(self) -> Fraction:
        """An upper bound on |f|, from the range witnesses."""
        if self.upper_bound is None or self.lower_bound is None:
            raise ContractError(
                f"range witnesses missing on {self.label or 'function'}")
        return max(abs(self.upper_bound), abs(self.lower_bound))


def constant(value, domain=(0, 1), label="") -> CFunc:
    """The constant function, exact at every precision."""
    value = Fraction(value)

    def batch(xs, xscale, prec):
        oscale = prec + 1
        v = kern.div_round_away(value.numerator << oscale, value.denominator)
        return [v] * len(xs), oscale

    return CFunc(
        Fraction(domain[0]), Fraction(domain[1]), batch,
        ModulusFn.from_lipschitz(0), lip=Fraction(0),
        pos_witness=value if value > 0 else None,
        upper_bound=value, lower_bound=value,
        d2_bound=Fraction(0), const_value=value,
        label=label or str(value))


# -- combinators -----------------------------------------------------------


def scale_by_rational(f: CFunc, q) -> CFunc:
    """q * f for a nonzero rational q; witnesses follow the sign of q."""
    q = Fraction(q)
    if q == 0:
        return constant(0, (f.domain_lo, f.domain_hi))
    shift = max(0, ceil_log2_frac(abs(q)))

    def batch(xs, xscale, prec):
        vals, os = f.batch(xs, xscale, prec + 1 + shift)
        oscale = prec + 2
        num = q.numerator << (oscale if oscale >= 0 else 0)
        vals = kern.scale_round_batch(vals, num, q.denominator << os)
        return vals, oscale

    pos = upper = lower = None
    if q > 0:
        pos = None if f.pos_witness is None else q * f.pos_witness
        upper = None if f.upper_bound is None else q * f.upper_bound
        lower = None if f.lower_bound is None else q * f.lower_bound
    else:
        upper = None if f.lower_bound is None else q * f.lower_bound
        lower = None if f.upper_bound is None else q * f.upper_bound
        if lower is not None and lower > 0:
            pos = lower
    return CFunc(
        f.domain_lo, f.domain_hi, batch,
        ModulusFn.shifted(f.modulus, shift) if f.lip is None
        else ModulusFn.from_lipschitz(abs(q) * f.lip),
        lip=None if f.lip is None else abs(q) * f.lip,
        pos_witness=pos, upper_bound=upper, lower_bound=lower,
        d2_bound=None if f.d2_bound is None else abs(q) * f.d2_bound,
        const_value=None if f.const_value is None else q * f.const_value,
        label=f"{q}*({f.label})")


def add_rational(f: CFunc, r) -> CFunc:
    """f + r; the modulus is untouched by a constant shift."""
    r = Fraction(r)

    def batch(xs, xscale, prec):
        vals, os = f.batch(xs, xscale, prec + 1)
        os2 = os + 2
        radd = kern.div_round_away(r.numerator << os2, r.denominator)
        return [(v << 2) + radd for v in vals], os2

    pos = None
    lower = None if f.lower_bound is None else f.lower_bound + r
    if lower is not None and lower > 0:
        pos = lower
    elif f.pos_witness is not None and f.pos_witness + r > 0:
        pos = f.pos_witness + r
    return CFunc(
        f.domain_lo, f.domain_hi, batch, f.modulus, lip=f.lip,
        pos_witness=pos,
        upper_bound=None if f.upper_bound is None else f.upper_bound + r,
        lower_bound=lower,
        d2_bound=f.d2_bound,
        const_value=None if f.const_value is None else f.const_value + r,
        label=f"({f.label})+{r}")


def add(f: CFunc, g: CFunc) -> CFunc:
    """f + g on the common domain."""
    if (f.domain_lo, f.domain_hi) != (g.domain_lo, g.domain_hi):
        raise ContractError("addition needs matching domains")

    def batch(xs, xscale, prec):
        fv, fo = f.batch(xs, xscale, prec + 1)
        gv, go = g.batch(xs, xscale, prec + 1)
        os = max(fo, go)
        if fo < os:
            fv = [v << (os - fo) for v in fv]
        if go < os:
            gv = [v << (os - go) for v in gv]
        return kern.add_arrays(fv, gv), os

    lip = None if f.lip is None or g.lip is None else f.lip + g.lip
    pos = None
    if f.lower_bound is not None and g.lower_bound is not None:
        low = f.lower_bound + g.lower_bound
        pos = low if low > 0 else None
    return CFunc(
        f.domain_lo, f.domain_hi, batch,
        ModulusFn.from_lipschitz(lip) if lip is not None
        else ModulusFn(lambda n: max(f.modulus(n + 1), g.modulus(n + 1))),
        lip=lip,
        pos_witness=pos,
        upper_bound=None if f.upper_bound is None or g.upper_bound is None
        else f.upper_bound + g.upper_bound,
        lower_bound=None if f.lower_bound is None or g.lower_bound is None
        else f.lower_bound + g.lower_bound,
        d2_bound=None if f.d2_bound is None or g.d2_bound is None
        else f.d2_bound + g.d2_bound,
        const_value=None if f.const_value is None or g.const_value is None
        else f.const_value + g.const_value,
        label=f"({f.label})+({g.label})")


def mul(f: CFunc, g: CFunc) -> CFunc:
    """f * g; both factors need range witnesses to budget the evaluation."""
    mf, mg = f.magnitude(), g.magnitude()

    def batch(xs, xscale, prec):
        pf = prec + 2 + max(0, ceil_log2_frac(1 + mg))
        pg = prec + 2 + max(0, ceil_log2_frac(1 + mf))
        fv, fo = f.batch(xs, xscale, pf)
        gv, go = g.batch(xs, xscale, pg)
        oscale = prec + 3
        prods = [a * b for a, b in zip(fv, gv)]
        shift = fo + go - oscale
        if shift > 0:
            prods = kern.scale_round_batch(prods, 1, 1 << shift)
        elif shift < 0:
            prods = [p << -shift for p in prods]
        return prods, oscale

    lip = None
    if f.lip is not None and g.lip is not None:
        lip = f.lip * mg + g.lip * mf
    lo = hi = None
    if None not in (f.lower_bound, f.upper_bound, g.lower_bound, g.upper_bound):
        corners = [a * b for a in (f.lower_bound, f.upper_bound)
                   for b in (g.lower_bound, g.upper_bound)]
        lo, hi = min(corners), max(corners)
    d2 = None
    if None not in (f.d2_bound, g.d2_bound, f.lip, g.lip):
        d2 = f.d2_bound * mg + 2 * f.lip * g.lip + g.d2_bound * mf
    return CFunc(
        f.domain_lo, f.domain_hi, batch,
        ModulusFn.from_lipschitz(lip) if lip is not None else ModulusFn(
            lambda n: max(f.modulus(n + 2 + ceil_log2_frac(1 + mg)),
                          g.modulus(n + 2 + ceil_log2_frac(1 + mf)))),
        lip=lip,
        pos_witness=lo if lo is not None and lo > 0 else None,
        upper_bound=hi, lower_bound=lo, d2_bound=d2,
        const_value=None if f.const_value is None or g.const_value is None
        else f.const_value * g.const_value,
        label=f"({f.label})*({g.label})")


def affine_arg(f: CFunc, scale, offset, domain) -> CFunc:
    """x -> f(scale*x + offset) on `domain`, which must map into f's domain."""
    scale = Fraction(scale)
    offset = Fraction(offset)
    lo, hi = Fraction(domain[0]), Fraction(domain[1])
    images = sorted((scale * lo + offset, scale * hi + offset))
    if not (f.domain_lo <= images[0] and images[1] <= f.domain_hi):
        raise ContractError("affine argument map leaves the inner domain")
    abs_s = abs(scale)
    shift = ceil_log2_frac(abs_s) if abs_s > 0 else None

    def batch(xs, xscale, prec):
        # map points exactly in rational arithmetic, re-round onto a fine grid
        inner_bits = f.modulus(prec + 1)
        gs = inner_bits + 3
        num = scale.numerator
        den = scale.denominator
        offs = offset.numerator * den
        oden = offset.denominator
        big_den = den * oden << xscale
        mlo = -((-f.domain_lo.numerator << gs) // f.domain_lo.denominator)
        mhi = (f.domain_hi.numerator << gs) // f.domain_hi.denominator
        mapped = []
        for x in xs:
            val = (x * num * oden + (offs << xscale)) << gs
            v = kern.div_round_away(val, big_den)
            mapped.append(mlo if v < mlo else mhi if v > mhi else v)
        # rounding the mapped point moves f by at most 2**-(prec+1)
        vals, os = f.batch(mapped, gs, prec + 2)
        return vals, os

    lip = None if f.lip is None else f.lip * abs_s
    return CFunc(
        lo, hi, batch,
        ModulusFn.from_lipschitz(lip) if lip is not None
        else ModulusFn(lambda n: f.modulus(n + 1) + (shift or 0)),
        lip=lip,
        pos_witness=f.pos_witness, upper_bound=f.upper_bound,
        lower_bound=f.lower_bound,
        d2_bound=None if f.d2_bound is None else f.d2_bound * abs_s * abs_s,
        const_value=f.const_value,
        label=f"({f.label})@({scale}f+{offset})")


def pos_part_of_level_minus(level: Dyadic, f: CFunc) -> CFunc:
    """x -> max(0, level - f(x)): the clipped allocation above a profile.

    Clipping is 1-Lipschitz, so the modulus passes through unchanged.  The
    kink removes the second-derivative witness.
    """
    if not isinstance(level, Dyadic):
        raise ContractError("clip level must be an exact dyadic")

    def batch(xs, xscale, prec):
        vals, os = f.batch(xs, xscale, prec + 1)
        lvl = level.scaled(os)  # exact once os >= level.prec, else <= half unit
        return [lvl - v if v < lvl else 0 for v in vals], os

    lf = level.to_fraction()
    upper = None
    if f.lower_bound is not None:
        upper = max(Fraction(0), lf - f.lower_bound)
    return CFunc(
        f.domain_lo, f.domain_hi, batch, f.modulus, lip=f.lip,
        pos_witness=None,
        upper_bound=upper, lower_bound=Fraction(0),
        d2_bound=None,
        const_value=None if f.const_value is None
        else max(Fraction(0), lf - f.const_value),
        label=f"[{level}-({f.label})]+")


def ln_compose(f: CFunc, window: Optional[LogWindow] = None) -> CFunc:
    """ln(f) for f with a strict positivity witness and an upper bound.

    The log bracket is placed from the witnesses (below half the lower
    witness, above the upper bound plus one) unless supplied explicitly.
    The modulus comes from the composed Lipschitz bound lip(f)/pos_witness
    when available, else from the window's padding.
    """
    if f.pos_witness is None or f.pos_witness <= 0:
        raise PositivityError(
            f"ln needs a strict positivity witness on {f.label or 'function'}")
    if window is None:
        if f.upper_bound is None:
            raise ContractError(
                f"ln needs an upper bound witness on {f.label or 'function'}")
        window = window_for_range(f.pos_witness, f.upper_bound)

    def batch(xs, xscale, prec):
        padded = window.compose_padding(prec)
        vals, os = f.batch(xs, xscale, padded)
        return log_window_batch(window, vals, os, prec)

    lip = None
    if f.lip is not None:
        lip = f.lip / f.pos_witness
    lo = hi = None
    if f.pos_witness is not None:
        lo = _ln_lower(f.pos_witness)
    if f.upper_bound is not None:
        hi = _ln_upper(f.upper_bound)
    d2 = None
    if f.d2_bound is not None and f.lip is not None:
        c = f.pos_witness
        d2 = f.d2_bound / c + (f.lip / c) ** 2
    return CFunc(
        f.domain_lo, f.domain_hi, batch,
        ModulusFn.from_lipschitz(lip) if lip is not None
        else ModulusFn.shifted(f.modulus, window.slope_pad),
        lip=lip,
        pos_witness=lo if lo is not None and lo > 0 else None,
        upper_bound=hi, lower_bound=lo, d2_bound=d2,
        const_value=None,
        label=f"ln({f.label})")


def window_for_range(lower: Fraction, upper: Fraction) -> LogWindow:
    """Log bracket enclosing [lower, upper] with slack on both sides."""
    return make_log_window(Fraction(15, 32) * lower, upper + Fraction(17, 16))


def _ln_lower(x: Fraction) -> Fraction:
    d = ln_rational(x.numerator, x.denominator, 10)
    return d.to_fraction() - Fraction(1, 1 << 10)


def _ln_upper(x: Fraction) -> Fraction:
    d = ln_rational(x.numerator, x.denominator, 10)
    return d.to_fraction() + Fraction(1, 1 << 10)


# -- bound certification ------------------------------------------------------


class CertifyStatus(Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class CertifyResult:
    status: CertifyStatus
    witness_point: Optional[Dyadic] = None

    def __bool__(self):
        return self.status is CertifyStatus.CERTIFIED


def certify_bounds(f: CFunc, mode: str, threshold, n: int,
                   counter=None) -> CertifyResult:
    """Grid-certify `min f >= threshold` (min_above) or `max f <= threshold`.

    The grid step 2**-m(n) plus evaluation at precision n make every true
    value provably within 2*2**-n of some sample, so a uniform margin of
    2*2**-n certifies, a sample beyond 2**-n on the wrong side refutes, and
    anything tighter is UNRESOLVED at this precision.
    """
    if mode not in ("min_above", "max_below"):
        raise ValueError(f"unknown certify mode {mode!r}")
    if n < 1:
        raise ValueError("certification precision must be >= 1")
    threshold = Fraction(threshold)
    gbits = f.modulus(n)
    lo, hi = f.domain_lo, f.domain_hi
    j0 = -((-lo.numerator << gbits) // lo.denominator)       # ceil(lo * 2^g)
    j1 = (hi.numerator << gbits) // hi.denominator           # floor(hi * 2^g)
    if j0 > j1:  # domain narrower than one grid step: refine until it isn't
        while j0 > j1:
            gbits += 1
            j0 = -((-lo.numerator << gbits) // lo.denominator)
            j1 = (hi.numerator << gbits) // hi.denominator
    xs = list(range(j0, j1 + 1))
    vals, os = f.eval_batch(xs, gbits, n)
    if counter is not None:
        counter.psd_evals += len(xs)
        counter.note_precision(n)
    eps = Fraction(1, 1 << n)
    sign = 1 if mode == "min_above" else -1
    # certified margin: sample >= t + 2eps (min_above) resp. <= t - 2eps
    cert_edge = threshold + sign * 2 * eps
    refute_edge = threshold - sign * eps
    all_certified = True
    for j, v in zip(xs, vals):
        vf = Fraction(v, 1 << os)
        if sign * (vf - cert_edge) < 0:
            all_certified = False
        if sign * (vf - refute_edge) < 0:
            return CertifyResult(CertifyStatus.REFUTED, Dyadic(j, -gbits))
    if all_certified:
        return CertifyResult(CertifyStatus.CERTIFIED)
    return CertifyResult(CertifyStatus.UNRESOLVED)


# -- catalog ----------------------------------------------------------------

CATALOG = {
    "flat1": "1",
    "flat2": "2",
    "affine": "1 + f",
    "affine2": "1 + 2*f",
    "poly2": "1 + f*f",
    "trig": "2 + sin(2*pi*f)",
    "halftrig": "2 + sin(pi*f)",
    "expdec": "1/4 + exp(-f)",
    "stress2": "1 + sin(4*f)/2",
    "stress4": "1 + sin(16*f)/2",
}


def stress_expression(k: int) -> str:
    """Oscillatory family sin(2**k f)/2 + 1: modulus cost grows with k."""
    return f"1 + sin({1 << k}*f)/2"


def catalog_noise(name: str, bandwidth=1) -> CFunc:
    """Build a catalog noise profile on [0, bandwidth]."""
    from .parse import parse_expression

    if name.startswith("stress") and name not in CATALOG:
        k = int(name[len("stress"):])
        expr = stress_expression(k)
    else:
        expr = CATALOG[name]
    fn = parse_expression(expr, (0, bandwidth))
    fn.label = f"catalog:{name}"
    return fn
