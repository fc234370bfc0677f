"""Water-filling power allocation and certified channel capacity.

The channel is described by a bandwidth B, a total power budget P, and a
strictly positive noise profile N on [0, B] (a `CFunc` with a positivity
witness).  The optimal transmit density fills power above the noise up to a
level L chosen so the allocation integrates to P:

* When the level provably clears the noise peak (regime NO_CLIP_CERTIFIED),
  L has the closed form P/B plus the average noise, and the capacity is
  B*ln(L) minus the integral of ln(N).
* Otherwise the level solves integral([L - N]+) = P by certified bisection:
  the power curve Phi(L) is continuous and non-decreasing, so an enclosure
  of Phi at the midpoint either moves a bracket side soundly or certifies
  that the midpoint already meets the power-mismatch tolerance.

For the clipped capacity the returned level enters only through the pair
(L_hat, Phi(L_hat)): the integral of [ln L_hat - ln N]+ is exactly the
capacity of the *achieved* power Phi(L_hat), and capacity moves by at most
|P - Phi(L_hat)| / min N as the power budget shifts (its derivative in P is
1/L), so the certified power mismatch converts directly into a capacity
error bound without needing to know how close L_hat is to the true level.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import accumulate
from typing import Optional

from .cfunc import CFunc, CertifyStatus, certify_bounds, ln_compose, pos_part_of_level_minus
from .creal import CReal, PositiveWitness, cr_ln
from .dyadic import Dyadic, ceil_log2_frac, div_round_away
from .errors import ContractError, PositivityError
from .rigorint import finish_quadrature, integrate, integrate_modulus, plan_modulus
from .rigorlog import ln_rational
from .work import WorkCounter, WorkReport


class Regime(Enum):
    NO_CLIP_CERTIFIED = "no_clip_certified"
    CLIPPED = "clipped"
    UNRESOLVED = "unresolved"


@dataclass
class ChannelSpec:
    """Band-limited channel: bandwidth, power budget, noise density on [0, B]."""

    bandwidth: Fraction
    power: Fraction
    noise: CFunc
    label: str = ""

    def __post_init__(self):
        self.bandwidth = Fraction(self.bandwidth)
        self.power = Fraction(self.power)
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.power <= 0:
            raise ValueError("power must be positive")
        if self.noise.pos_witness is None or self.noise.pos_witness <= 0:
            raise PositivityError(
                "noise needs a strict positivity witness; a noise floor "
                "touching zero puts the capacity out of certified reach")
        if (self.noise.domain_lo, self.noise.domain_hi) != (0, self.bandwidth):
            raise ContractError(
                f"noise domain [{self.noise.domain_lo}, {self.noise.domain_hi}]"
                f" must equal [0, {self.bandwidth}]")
        if not self.label:
            self.label = (f"psd={self.noise.label};B={self.bandwidth};"
                          f"P={self.power}")


@dataclass
class WaterLevel:
    level: CReal
    regime: Regime
    avg_noise: CReal
    method: str
    level_hat: Optional[Dyadic] = None      # bisection output
    phi_gap: Optional[Fraction] = None      # certified |Phi(level_hat) - P|
    bracket: Optional[tuple] = None         # true-level bracket (lo, hi)
    width_bound: Optional[Fraction] = None  # certified |level_hat - true level|


def average_noise(spec: ChannelSpec, counter: WorkCounter | None = None,
                  mode: str = "auto") -> CReal:
    """(1/B) * integral of N as a computable real."""
    noise, B = spec.noise, spec.bandwidth
    inv_shift = max(0, ceil_log2_frac(1 / B))
    if noise.const_value is not None:
        return CReal.from_rational(noise.const_value)

    def process(n):
        total = integrate(noise, 0, B, n + 1 + inv_shift, counter, mode)
        val = total.to_fraction() / B
        return Dyadic.from_rational(val.numerator, val.denominator, n + 1)

    hint = None if noise.upper_bound is None else abs(noise.upper_bound) + 1
    return CReal(process, magnitude_hint=hint)


def water_level_closed(spec: ChannelSpec, counter: WorkCounter | None = None,
                       mode: str = "auto", certify_bits: int = 12) -> WaterLevel:
    """Closed-form level P/B + avg(N), valid as the water level only when
    the no-clip regime is certified."""
    avg = average_noise(spec, counter, mode)
    level = avg.add_rational(spec.power / spec.bandwidth)
    regime = _certify_regime(spec, level, certify_bits, counter)
    return WaterLevel(level, regime, avg, method="closed")


def _certify_regime(spec: ChannelSpec, level: CReal, n: int,
                    counter: WorkCounter | None) -> Regime:
    # A coarse level enclosure suffices: near-boundary cases fall into
    # UNRESOLVED and take the always-sound general route.
    lo, hi = level.enclosure(min(8, n))
    below = certify_bounds(spec.noise, "max_below", lo, n, counter)
    if below.status is CertifyStatus.CERTIFIED:
        return Regime.NO_CLIP_CERTIFIED
    above = certify_bounds(spec.noise, "max_below", hi, n, counter)
    if above.status is CertifyStatus.REFUTED:
        return Regime.CLIPPED
    return Regime.UNRESOLVED


class _PowerCurve:
    """Phi(L) = integral of [L - N]+ over [0, B], with per-precision caches.

    Evaluation reproduces, integer for integer, what `integrate_modulus`
    computes on the clipped integrand: the noise samples on the modulus grid
    are cached sorted with prefix sums, so each level costs a binary search
    instead of a fresh pass over the grid.
    """

    def __init__(self, spec: ChannelSpec, counter: WorkCounter | None):
        self.spec = spec
        self.counter = counter
        self._grids: dict[int, tuple] = {}

    def _grid(self, p: int):
        got = self._grids.get(p)
        if got is None:
            noise, B = self.spec.noise, self.spec.bandwidth
            plan = plan_modulus(noise, 0, B, p)
            xs = plan.points()
            vals, oscale = noise.eval_batch(xs, plan.grid_scale,
                                            plan.sample_bits + 1)
            svals = sorted(vals)
            prefix = [0] + list(accumulate(svals))
            got = (plan, svals, prefix, oscale)
            self._grids[p] = got
        return got

    def at(self, level: Dyadic, p: int) -> Dyadic:
        """Phi(level) within 2**-p."""
        plan, svals, prefix, oscale = self._grid(p)
        if self.counter is not None:
            self.counter.quadrature_cells += plan.cells
            self.counter.psd_evals += plan.cells
            self.counter.note_precision(plan.sample_bits)
        lvl = level.scaled(oscale)
        idx = bisect_left(svals, lvl)
        total = lvl * idx - prefix[idx]
        return finish_quadrature(total, oscale, plan.h, p)


@dataclass
class _GeneralLevel:
    """Lazy certified refinement of the bisection level."""

    spec: ChannelSpec
    curve: _PowerCurve
    lo: Fraction
    hi: Fraction
    counter: Optional[WorkCounter]

    def refine_width(self, m: int) -> Dyadic:
        """Shrink the true-level bracket below 2**-m; may raise on flat curves.

        A probe too close to the root cannot be ordered against P at finite
        precision, so besides the midpoint the two quarter points are tried:
        at least one of the three sits a quarter-width away from the root
        and decides once the enclosure is fine enough.  Three undecidable
        probes certify the curve is flat across the bracket at precision
        m+8, and the refinement refuses honestly.
        """
        P = self.spec.power
        target = Fraction(1, 1 << m)
        while self.hi - self.lo > target:
            moved = False
            for quarters in (2, 1, 3):
                probe = Dyadic.from_fraction(
                    self.lo + (self.hi - self.lo) * Fraction(quarters, 4))
                p = m + 4
                while p <= m + 8:
                    phi = self.curve.at(probe, p).to_fraction()
                    eps = Fraction(1, 1 << p)
                    if self.counter is not None:
                        self.counter.bisection_iters += 1
                    if phi - eps > P:
                        self.hi = probe.to_fraction()
                        moved = True
                        break
                    if phi + eps < P:
                        self.lo = probe.to_fraction()
                        moved = True
                        break
                    p += 4
                if moved:
                    break
            if not moved:
                raise ContractError(
                    "water level not separable at this precision: the power "
                    "curve is flat across the bracket")
        return _midpoint(self.lo, self.hi)


def _midpoint(lo: Fraction, hi: Fraction) -> Dyadic:
    # brackets start dyadic and halving keeps them dyadic
    return Dyadic.from_fraction((lo + hi) / 2)


def water_level_general(spec: ChannelSpec, n: int,
                        counter: WorkCounter | None = None) -> WaterLevel:
    """Bisection water level: returns L_hat with |Phi(L_hat) - P| <= 2**-n.

    The bracket starts at [positivity witness, closed-form level] (the power
    curve is 0 at the left end and at least P at the right) and every move
    is certified, so it always contains the true level.  The loop exits as
    soon as the midpoint's certified power enclosure is inside the
    tolerance, which continuity guarantees to happen.
    """
    noise, B, P = spec.noise, spec.bandwidth, spec.power
    avg = average_noise(spec, counter)
    closed = avg.add_rational(P / B)
    regime = _certify_regime(spec, closed, 12, counter)

    lo = Fraction(
        (noise.pos_witness.numerator << 6) // noise.pos_witness.denominator,
        1 << 6)  # floor of the witness on a coarse dyadic grid
    hi_d = closed.query(3) + Dyadic(1, -3)
    hi = hi_d.to_fraction()
    if hi <= lo:  # safety net; the closed level always clears the noise floor
        hi = lo + 1

    curve = _PowerCurve(spec, counter)
    p = n + 2
    eps = Fraction(1, 1 << p)
    width_target = Fraction(1, 1 << (n + 2)) / max(Fraction(1), B)
    # Certified moves keep Phi(lo) <= P <= Phi(hi).  The loop ends either at
    # a midpoint whose power enclosure is already inside the tolerance, or
    # with a bracket so narrow that Phi(hi) - Phi(lo) <= B*(hi-lo) squeezes
    # any midpoint inside it; each move halves the width, so it terminates.
    while True:
        mid = _midpoint(lo, hi)
        if hi - lo <= width_target:
            level_hat = mid
            phi_gap = B * (hi - lo)
            break
        phi = curve.at(mid, p).to_fraction()
        if counter is not None:
            counter.bisection_iters += 1
        if abs(phi - P) <= 2 * eps:
            level_hat = mid
            phi_gap = 3 * eps  # |Phi - P| <= |phi - P| + eps <= 2**-n * 3/4
            break
        if phi > P:
            hi = mid.to_fraction()
        else:
            lo = mid.to_fraction()

    general = _GeneralLevel(spec, curve, lo, hi, counter)

    def process(m):
        return general.refine_width(m + 1)

    level = CReal(process)
    wl = WaterLevel(level, regime, avg, method="bisection",
                    level_hat=level_hat, phi_gap=phi_gap,
                    bracket=(lo, hi), width_bound=hi - lo)
    return wl


@dataclass(frozen=True)
class PsdValue:
    """A certified point of the optimal transmit density."""

    value: Dyadic
    error_bound: Fraction
    level_error: Fraction


def psd_at(spec: ChannelSpec, wl: WaterLevel, freq: Dyadic, n: int,
           counter: WorkCounter | None = None) -> PsdValue:
    """[L - N(freq)]+ within 2**-n plus the reported level uncertainty.

    For a bisection level the uncertainty is the certified bracket width;
    for a closed-form level it is the query precision.  Clipping is
    1-Lipschitz in the level, so the two error sources simply add.
    """
    ff = freq.to_fraction()
    if not 0 <= ff <= spec.bandwidth:
        raise ContractError(f"frequency {freq} outside [0, {spec.bandwidth}]")
    if wl.level_hat is not None:
        lvl = wl.level_hat
        level_error = wl.width_bound
    else:
        lvl = wl.level.query(n + 2)
        level_error = Fraction(1, 1 << (n + 2))
    nv = spec.noise.eval(freq, n + 1)
    if counter is not None:
        counter.psd_evals += 1
        counter.note_precision(n + 1)
    raw = lvl - nv
    value = raw if raw.sign > 0 else Dyadic(0)
    return PsdValue(value, Fraction(1, 1 << (n + 1)) + level_error, level_error)


@dataclass(frozen=True)
class CapacityResult:
    value: Dyadic
    precision_bits: int
    regime: Regime
    work: WorkReport

    @property
    def error_bound(self) -> Fraction:
        return Fraction(1, 1 << self.precision_bits)


def capacity(spec: ChannelSpec, out_bits: int, mode: str = "auto") -> CapacityResult:
    """Channel capacity in nats within 2**-out_bits."""
    counter = WorkCounter()
    t0 = time.perf_counter()
    value, regime = _capacity_value(spec, out_bits, mode, counter)
    wall = time.perf_counter() - t0
    report = WorkReport.from_counter(
        spec.label, "capacity", out_bits, counter, wall, value,
        Fraction(1, 1 << out_bits))
    return CapacityResult(value, out_bits, regime, report)


def _capacity_value(spec: ChannelSpec, M: int, mode: str,
                    counter: WorkCounter) -> tuple[Dyadic, Regime]:
    noise, B, P = spec.noise, spec.bandwidth, spec.power
    c_lo = noise.pos_witness
    b_bits = max(0, ceil_log2_frac(B))

    if noise.const_value is not None:
        # Flat noise: L = P/B + c exactly, C = B * ln(L / c), no quadrature.
        c = noise.const_value
        ratio = (P / B + c) / c
        lnr = ln_rational(ratio.numerator, ratio.denominator,
                          M + 2 + b_bits)
        counter.note_precision(M + 2 + b_bits)
        val = lnr.to_fraction() * B
        return (Dyadic.from_rational(val.numerator, val.denominator, M + 2),
                Regime.NO_CLIP_CERTIFIED)

    wl = water_level_closed(spec, counter, mode)
    if wl.regime is Regime.NO_CLIP_CERTIFIED:
        # L = P/B + (1/B) int N, so B*ln(L) needs int N once at a precision
        # set by ln's slope at L: |ln L_hat - ln L| <= |I - int N| / (B * L_min).
        level_min = P / B + c_lo
        n_int = M + 3 + max(0, ceil_log2_frac(1 / level_min))
        i_noise = integrate(noise, 0, B, n_int, counter, mode)
        level_hat = P / B + i_noise.to_fraction() / B
        q2 = M + 3 + b_bits
        ln_level = ln_rational(level_hat.numerator, level_hat.denominator, q2)
        counter.note_precision(q2)
        ln_noise = ln_compose(noise)
        integral = integrate(ln_noise, 0, B, M + 2, counter, mode)
        val = B * ln_level.to_fraction() - integral.to_fraction()
        return (Dyadic.from_rational(val.numerator, val.denominator, M + 2),
                wl.regime)

    # Clipped or unresolved: certified bisection level, then the clipped
    # log-gap integral.  |Phi(L_hat) - P| <= 2**-n_wl converts to capacity
    # error through dC/dP = 1/L <= 1/min N.
    n_wl = M + 2 + max(0, ceil_log2_frac(1 / c_lo))
    gwl = water_level_general(spec, n_wl, counter)
    level_hat = gwl.level_hat
    q1 = M + 3 + b_bits
    ln_level = cr_ln(CReal.from_dyadic(level_hat),
                     PositiveWitness(c_lo)).query(q1)
    counter.note_precision(q1)
    gap_fn = pos_part_of_level_minus(ln_level, ln_compose(noise))
    integral = integrate_modulus(gap_fn, 0, B, M + 2, counter)
    val = integral.to_fraction()
    return (Dyadic.from_rational(val.numerator, val.denominator, M + 2),
            gwl.regime)


# -- discretized approximation ---------------------------------------------


@dataclass(frozen=True)
class DiscretizationResult:
    n_sub: int
    delta_f: Fraction
    c_n: Dyadic
    level: Fraction
    sub_allocations: list  # (midpoint frequency, allocation) pairs, exact
    power_check: Fraction  # sum(delta_f * allocation), exactly P by construction


def discretized_capacity(spec: ChannelSpec, n_sub: int, n: int,
                         counter: WorkCounter | None = None) -> DiscretizationResult:
    """Sub-channel water-filling on n_sub equal bands, certified to 2**-n.

    Noise is sampled at the band midpoints finely enough that the exact
    discrete water-filling value on the sampled profile stays within
    2**-(n+2) of the one on the true samples (the discrete value moves by
    at most 2*delta_f/min N per sample perturbation), and the per-band logs
    are budgeted to another 2**-(n+2).
    """
    if n_sub < 1:
        raise ValueError("need at least one sub-channel")
    noise, B, P = spec.noise, spec.bandwidth, spec.power
    c_lo = noise.pos_witness
    delta = B / n_sub
    n_samp = n + 2 + max(0, ceil_log2_frac(2 * B / c_lo))

    gbits = noise.modulus(n_samp + 1) + 2
    mids = []
    for i in range(n_sub):
        fm = delta * Fraction(2 * i + 1, 2)
        mids.append((fm, _round_frac_scaled(fm, gbits)))
    xs = [m for (_, m) in mids]
    vals, oscale = noise.eval_batch(xs, gbits, n_samp + 1)
    if counter is not None:
        counter.psd_evals += n_sub
        counter.note_precision(n_samp + 1)
    samples = [Fraction(v, 1 << oscale) for v in vals]

    order = sorted(range(n_sub), key=lambda i: samples[i])
    sorted_vals = [samples[i] for i in order]
    prefix = [Fraction(0)] + list(accumulate(sorted_vals))
    level = None
    for k in range(n_sub, 0, -1):
        cand = (P + delta * prefix[k]) / (k * delta)
        if cand > sorted_vals[k - 1] and (k == n_sub or cand <= sorted_vals[k]):
            level = cand
            break
    if level is None:  # numerically impossible; guards a logic error
        raise ContractError("discrete water-filling found no consistent level")

    allocations = [max(Fraction(0), level - s) for s in samples]
    power_check = delta * sum(allocations)

    q_log = n + 2 + max(0, ceil_log2_frac(B))
    total = Fraction(0)
    for s, alloc in zip(samples, allocations):
        if alloc > 0:
            r = level / s
            lnr = ln_rational(r.numerator, r.denominator, q_log)
            total += delta * lnr.to_fraction()
    if counter is not None:
        counter.note_precision(q_log)
    c_n = Dyadic.from_rational(total.numerator, total.denominator, n + 2)
    return DiscretizationResult(
        n_sub, delta, c_n, level,
        [(fm, alloc) for (fm, _), alloc in zip(mids, allocations)],
        power_check)


def _round_frac_scaled(x: Fraction, bits: int) -> int:
    return div_round_away(x.numerator << bits, x.denominator)


@dataclass(frozen=True)
class ConvergenceRow:
    n_sub: int
    c_n: Dyadic
    error: Fraction


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: list
    reference: Dyadic
    fitted_order: float


def convergence_study(spec: ChannelSpec, n_sub_list, out_bits: int,
                      mode: str = "auto") -> ConvergenceStudy:
    """Discretization error against a finer-certified capacity reference.

    Reports |c_n - C| per sub-channel count and the least-squares slope of
    log2(error) against log2(n_sub) (the empirical convergence order).
    """
    ref = capacity(spec, out_bits + 4, mode)
    rows = []
    for n_sub in n_sub_list:
        d = discretized_capacity(spec, n_sub, out_bits + 2)
        err = abs(d.c_n.to_fraction() - ref.value.to_fraction())
        rows.append(ConvergenceRow(n_sub, d.c_n, err))
    pts = [(math.log2(r.n_sub), math.log2(float(r.error)))
           for r in rows if r.error > 0]
    order = float("nan")
    if len(pts) >= 2:
        mx = sum(p[0] for p in pts) / len(pts)
        my = sum(p[1] for p in pts) / len(pts)
        denom = sum((p[0] - mx) ** 2 for p in pts)
        if denom > 0:
            order = -sum((p[0] - mx) * (p[1] - my) for p in pts) / denom
    return ConvergenceStudy(rows, ref.value, order)
