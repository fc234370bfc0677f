"""Pure-Python reference kernels.

Every routine here works on *scaled integers*: a real value v is carried as
an integer m with v = m * 2**-w for an agreed scale w.  One rounding
(nearest, ties away from zero) happens per arithmetic step, so callers can
budget errors by counting steps.  The compiled backend implements the same
algorithms step for step; outputs are required to be bit-identical, which
the test suite checks.

These loops are the hot paths of the whole package (per-cell series
evaluation inside validated quadrature), so the code style here favours
tight loops with inlined rounding over abstraction.
"""

from __future__ import annotations

BACKEND = "pure"


def div_round_away(num: int, den: int) -> int:
    """Nearest integer to num/den with ties away from zero; den > 0."""
    if num >= 0:
        q, r = divmod(num, den)
        return q + 1 if 2 * r >= den else q
    q, r = divmod(-num, den)
    return -(q + 1) if 2 * r >= den else -q


def ln1p_series(u: int, w: int, nterms: int) -> int:
    """Alternating series sum_{l=1..nterms} (-1)**(l-1) * p_l / l, scaled.

    p_1 = u and p_l = round(p_{l-1} * u / 2**w); every rounding is nearest,
    ties away.  Once a power rounds to zero all later terms are zero, so the
    loop may exit early without changing the result.  Input and output are
    scaled by 2**-w; requires |u| < 2**w.
    """
    pw = 1 << w
    p = u
    s = 0
    l = 1
    while l <= nterms and p != 0:
        if p >= 0:
            q, r = divmod(p, l)
            t = q + 1 if 2 * r >= l else q
        else:
            q, r = divmod(-p, l)
            t = -(q + 1) if 2 * r >= l else -q
        s += t if l & 1 else -t
        l += 1
        if l > nterms:
            break
        m = p * u
        if m >= 0:
            q, r = divmod(m, pw)
            p = q + 1 if 2 * r >= pw else q
        else:
            q, r = divmod(-m, pw)
            p = -(q + 1) if 2 * r >= pw else -q
    return s


def ln_window_batch(
    cs,
    cshift: int,
    xnum: int,
    xden: int,
    w: int,
    nterms: int,
    lnx: int,
    cmin: int,
    cmax: int,
):
    """Centered-log values for a batch of samples.

    Each sample c (scaled by 2**-cshift) is mapped to u = c*xden/xnum - 1
    (scaled by 2**-w), run through `ln1p_series`, and lnx (the scaled log of
    the series center xnum/xden) is added.  Returns (bad_index, values):
    bad_index is -1 on success, else the index of the first sample outside
    [cmin, cmax] (and values is undefined).
    """
    if w >= cshift:
        unum_factor = xden << (w - cshift)
        uden = xnum
    else:
        unum_factor = xden
        uden = xnum << (cshift - w)
    pw = 1 << w
    out = []
    append = out.append
    for i, c in enumerate(cs):
        if c < cmin or c > cmax:
            return i, []
        u = div_round_away(c * unum_factor, uden) - pw
        append(lnx + ln1p_series(u, w, nterms))
    return -1, out


def atanh_series(v: int, w: int, nterms: int) -> int:
    """Odd series sum_{k=0..nterms-1} q_k/(2k+1) with q_0 = v, scaled.

    q_k = round(q_{k-1} * v2 / 2**w) where v2 = round(v*v / 2**w); all
    roundings nearest-ties-away.  Used for logs of rationals via
    ln((1+t)/(1-t)) = 2*atanh(t).
    """
    pw = 1 << w
    v2 = div_round_away(v * v, pw)
    q = v
    s = 0
    k = 0
    while k < nterms and q != 0:
        s += div_round_away(q, 2 * k + 1)
        k += 1
        if k >= nterms:
            break
        q = div_round_away(q * v2, pw)
    return s


def sin_cos(x: int, w: int, halvings: int, nterms: int):
    """Scaled (sin, cos) of x*2**-w via Taylor series plus angle doubling.

    The argument is divided by 2**halvings (one rounding), the series for
    the reduced angle are summed to nterms terms each, and `halvings`
    double-angle steps rebuild the full angle, one rounding per product.
    Caller guarantees |x*2**-w| <= 2**halvings * 1.5 so the reduced angle
    stays in the fast-convergence zone.
    """
    pw = 1 << w
    if halvings:
        x = div_round_away(x, 1 << halvings)
    x2 = div_round_away(x * x, pw)
    # sin: t_1 = x, t_{k+1} = -t_k * x^2 / (2k * (2k+1))
    s = 0
    t = x
    k = 0
    while k < nterms and t != 0:
        s += t
        k += 1
        t = -div_round_away(t * x2, (2 * k * (2 * k + 1)) << w)
    # cos: t_0 = 1, t_{k+1} = -t_k * x^2 / ((2k+1) * (2k+2))
    c = 0
    t = pw
    k = 0
    while k < nterms and t != 0:
        c += t
        k += 1
        t = -div_round_away(t * x2, ((2 * k - 1) * 2 * k) << w)
    for _ in range(halvings):
        s, c = div_round_away(2 * s * c, pw), pw - div_round_away(2 * s * s, pw)
    return s, c


def sin_cos_batch(xs, w: int, halvings: int, nterms: int, want_cos: int):
    """Apply `sin_cos` to every sample; returns a list of sin or cos values."""
    if want_cos:
        return [sin_cos(x, w, halvings, nterms)[1] for x in xs]
    return [sin_cos(x, w, halvings, nterms)[0] for x in xs]


def exp_series(x: int, w: int, halvings: int, nterms: int) -> int:
    """Scaled exp of x*2**-w: Taylor on x/2**halvings, then squarings.

    Caller guarantees |x*2**-w| <= 2**halvings so the reduced argument has
    magnitude at most 1.
    """
    pw = 1 << w
    if halvings:
        x = div_round_away(x, 1 << halvings)
    e = pw
    t = pw
    k = 1
    while k <= nterms and t != 0:
        t = div_round_away(t * x, k << w)
        e += t
        k += 1
    for _ in range(halvings):
        e = div_round_away(e * e, pw)
    return e


def exp_batch(xs, w: int, halvings: int, nterms: int):
    return [exp_series(x, w, halvings, nterms) for x in xs]


def clip_sum(samples, level: int) -> int:
    """Exact sum of max(0, level - s) over integer samples."""
    total = 0
    for s in samples:
        if s < level:
            total += level - s
    return total


def scale_round_batch(xs, num: int, den: int):
    """Per-sample round(x * num / den), nearest ties away; den > 0."""
    out = []
    append = out.append
    for x in xs:
        m = x * num
        if m >= 0:
            q, r = divmod(m, den)
            append(q + 1 if 2 * r >= den else q)
        else:
            q, r = divmod(-m, den)
            append(-(q + 1) if 2 * r >= den else -q)
    return out


def add_arrays(a, b):
    """Exact elementwise sum of two equal-length integer sequences."""
    return [x + y for x, y in zip(a, b)]


def midpoint_grid(
    count: int,
    base_num: int,
    step_num: int,
    den: int,
    mlo: int,
    mhi: int,
):
    """Scaled midpoints round((base_num + step_num*i)/den) clamped to [mlo, mhi].

    Callers encode mid_i = a + h*(i + 1/2) at a target scale as an exact
    integer progression; the per-index rounding avoids cumulative drift.
    """
    out = []
    append = out.append
    for i in range(count):
        m = base_num + step_num * i
        if m >= 0:
            q, r = divmod(m, den)
            v = q + 1 if 2 * r >= den else q
        else:
            q, r = divmod(-m, den)
            v = -(q + 1) if 2 * r >= den else -q
        if v < mlo:
            v = mlo
        elif v > mhi:
            v = mhi
        append(v)
    return out
