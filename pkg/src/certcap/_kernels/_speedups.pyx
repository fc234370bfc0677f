# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: same algorithms as `pure`, bit-for-bit.

Each routine picks a C fast path (int64 operands, __int128 intermediates)
when the operands provably fit, and otherwise falls back to arbitrary
precision Python integers inside the same function.  Rounding is nearest
with ties away from zero everywhere, matching `pure.div_round_away`.
"""

BACKEND = "compiled"

cdef extern from *:
    ctypedef long long int128 "__int128"

ctypedef long long i64

cdef inline i64 _dra128(int128 num, int128 den) noexcept:
    # nearest with ties away from zero; den > 0
    cdef int128 a = num if num >= 0 else -num
    cdef int128 q = a / den
    cdef int128 r = a - q * den
    if 2 * r >= den:
        q += 1
    return <i64>(q if num >= 0 else -q)


def div_round_away(num, den):
    """Nearest integer to num/den with ties away from zero; den > 0."""
    if num >= 0:
        q, r = divmod(num, den)
        return q + 1 if 2 * r >= den else q
    q, r = divmod(-num, den)
    return -(q + 1) if 2 * r >= den else -q


cdef i64 _ln1p_c(i64 u, int w, long nterms) noexcept:
    cdef int128 pw = <int128>1 << w
    cdef i64 p = u
    cdef i64 s = 0
    cdef i64 t
    cdef long l = 1
    cdef int128 m
    while l <= nterms and p != 0:
        t = _dra128(p, l)
        s += t if (l & 1) else -t
        l += 1
        if l > nterms:
            break
        m = <int128>p * u
        p = _dra128(m, pw)
    return s


def ln1p_series(u, w, nterms):
    """Alternating series sum_{l} (-1)**(l-1) p_l / l at scale 2**-w."""
    cdef long nt = nterms
    if w <= 60 and -(1 << w) < u < (1 << w):
        return _ln1p_c(u, w, nt)
    pw = 1 << w
    p = u
    s = 0
    l = 1
    while l <= nt and p != 0:
        if p >= 0:
            q, r = divmod(p, l)
            t = q + 1 if 2 * r >= l else q
        else:
            q, r = divmod(-p, l)
            t = -(q + 1) if 2 * r >= l else -q
        s += t if l & 1 else -t
        l += 1
        if l > nt:
            break
        m = p * u
        if m >= 0:
            q, r = divmod(m, pw)
            p = q + 1 if 2 * r >= pw else q
        else:
            q, r = divmod(-m, pw)
            p = -(q + 1) if 2 * r >= pw else -q
    return s


def ln_window_batch(cs, cshift, xnum, xden, w, nterms, lnx, cmin, cmax):
    """Centered-log values for sample batch; see the pure backend docstring."""
    cdef long i, n
    cdef i64 c64, u64, lim
    cdef int128 uf128
    cdef long long[::1] view
    if w >= cshift:
        unum_factor = xden << (w - cshift)
        uden = xnum
    else:
        unum_factor = xden
        uden = xnum << (cshift - w)
    pw = 1 << w
    cdef i64 cmin64, cmax64, uf64, ud64, pw64
    cdef long nt = nterms
    fast = (
        w <= 60 and nterms < 1 << 30
        and 0 < uden < 1 << 40 and 0 < unum_factor < 1 << 40
        and -(1 << 60) < cmin <= cmax < (1 << 60)
        # the mapped ratio must fit in 62 bits before the shift to u
        and abs(cmax) * unum_factor < uden << 61
        and abs(cmin) * unum_factor < uden << 61
    )
    out = []
    append = out.append
    if fast:
        cmin64 = cmin
        cmax64 = cmax
        uf64 = unum_factor
        ud64 = uden
        pw64 = <i64>1 << w
        lnx_obj = lnx
        try:
            view = cs
        except (TypeError, ValueError):
            view = None
        if view is not None:
            n = view.shape[0]
            for i in range(n):
                c64 = view[i]
                if c64 < cmin64 or c64 > cmax64:
                    return i, []
                u64 = _dra128(<int128>c64 * uf64, ud64) - pw64
                if -pw64 < u64 < pw64:
                    append(lnx_obj + _ln1p_c(u64, w, nt))
                else:  # sample outside the contraction zone: object series
                    append(lnx_obj + ln1p_series(int(u64), w, nt))
            return -1, out
        for i, c in enumerate(cs):
            if c < cmin or c > cmax:
                return i, []
            c64 = c
            u64 = _dra128(<int128>c64 * uf64, ud64) - pw64
            if -pw64 < u64 < pw64:
                append(lnx_obj + _ln1p_c(u64, w, nt))
            else:
                append(lnx_obj + ln1p_series(int(u64), w, nt))
        return -1, out
    for i, c in enumerate(cs):
        if c < cmin or c > cmax:
            return i, []
        u = div_round_away(c * unum_factor, uden) - pw
        append(lnx + ln1p_series(u, w, nterms))
    return -1, out


def atanh_series(v, w, nterms):
    """Odd series sum q_k/(2k+1), q_0 = v, ratio v*v; scale 2**-w."""
    cdef i64 v64, v2_64, q64, s64
    cdef long k, nt = nterms
    if w <= 60 and -(1 << w) < v < (1 << w):
        v64 = v
        v2_64 = _dra128(<int128>v64 * v64, <int128>1 << w)
        q64 = v64
        s64 = 0
        k = 0
        while k < nt and q64 != 0:
            s64 += _dra128(q64, 2 * k + 1)
            k += 1
            if k >= nt:
                break
            q64 = _dra128(<int128>q64 * v2_64, <int128>1 << w)
        return s64
    pw = 1 << w
    v2 = div_round_away(v * v, pw)
    q = v
    s = 0
    k = 0
    while k < nt and q != 0:
        s += div_round_away(q, 2 * k + 1)
        k += 1
        if k >= nt:
            break
        q = div_round_away(q * v2, pw)
    return s


def sin_cos(x, w, halvings, nterms):
    """Scaled (sin, cos) via Taylor plus double-angle steps."""
    cdef i64 x64, x2_64, s64, c64, t64
    cdef long k, nt = nterms, j = halvings
    cdef int128 pw128
    if halvings:  # reduce up front (same rounding as the pure backend)
        x = div_round_away(x, 1 << halvings)
        halvings = 0
    # the reduced argument must stay within 2*2**w so x2 fits in 62 bits
    if w <= 60 and -(1 << (w + 1)) <= x <= (1 << (w + 1)):
        x64 = x
        pw128 = <int128>1 << w
        x2_64 = _dra128(<int128>x64 * x64, pw128)
        s64 = 0
        t64 = x64
        k = 0
        while k < nt and t64 != 0:
            s64 += t64
            k += 1
            t64 = -_dra128(<int128>t64 * x2_64,
                           (<int128>(2 * k) * (2 * k + 1)) << w)
        c64 = 0
        t64 = <i64>1 << w
        k = 0
        while k < nt and t64 != 0:
            c64 += t64
            k += 1
            t64 = -_dra128(<int128>t64 * x2_64,
                           (<int128>(2 * k - 1) * (2 * k)) << w)
        for k in range(j):
            if not (-(<i64>1 << (w + 2)) < s64 < (<i64>1 << (w + 2))
                    and -(<i64>1 << (w + 2)) < c64 < (<i64>1 << (w + 2))):
                # out-of-contract magnitudes: finish in object arithmetic
                s_obj, c_obj = int(s64), int(c64)
                pw = 1 << w
                for _ in range(j - k):
                    s_obj, c_obj = (div_round_away(2 * s_obj * c_obj, pw),
                                    pw - div_round_away(2 * s_obj * s_obj, pw))
                return s_obj, c_obj
            s64, c64 = (_dra128(<int128>2 * s64 * c64, pw128),
                        (<i64>1 << w) - _dra128(<int128>2 * s64 * s64, pw128))
        return s64, c64
    pw = 1 << w
    x2 = div_round_away(x * x, pw)
    s = 0
    t = x
    k = 0
    while k < nt and t != 0:
        s += t
        k += 1
        t = -div_round_away(t * x2, (2 * k * (2 * k + 1)) << w)
    c = 0
    t = pw
    k = 0
    while k < nt and t != 0:
        c += t
        k += 1
        t = -div_round_away(t * x2, ((2 * k - 1) * 2 * k) << w)
    for _ in range(j):
        s, c = div_round_away(2 * s * c, pw), pw - div_round_away(2 * s * s, pw)
    return s, c


def sin_cos_batch(xs, w, halvings, nterms, want_cos):
    cdef long idx = 1 if want_cos else 0
    return [sin_cos(x, w, halvings, nterms)[idx] for x in xs]


def exp_series(x, w, halvings, nterms):
    """Scaled exp via Taylor on the halved argument, then squarings."""
    cdef i64 x64, e64, t64
    cdef long k, nt = nterms, j = halvings
    cdef int128 pw128
    # C path only when the final magnitude provably fits: after the Taylor
    # stage |e| <= 3*2**w, and each squaring at most squares the value/2**w.
    if w <= 58 and halvings == 0 and -(1 << w) < x <= (1 << w):
        x64 = x
        pw128 = <int128>1 << w
        e64 = <i64>1 << w
        t64 = e64
        k = 1
        while k <= nt and t64 != 0:
            t64 = _dra128(<int128>t64 * x64, <int128>k << w)
            e64 += t64
            k += 1
        return e64
    pw = 1 << w
    if halvings:
        x = div_round_away(x, 1 << halvings)
    e = pw
    t = pw
    k = 1
    while k <= nt and t != 0:
        t = div_round_away(t * x, k << w)
        e += t
        k += 1
    for _ in range(halvings):
        e = div_round_away(e * e, pw)
    return e


def exp_batch(xs, w, halvings, nterms):
    return [exp_series(x, w, halvings, nterms) for x in xs]


def clip_sum(samples, level):
    """Exact sum of max(0, level - s) over integer samples."""
    cdef long long[::1] view
    cdef int128 total128 = 0
    cdef i64 lvl64, hi
    cdef unsigned long long lo
    cdef long i, n
    if -(1 << 62) < level < (1 << 62):
        try:
            view = samples
        except (TypeError, ValueError):
            view = None
        if view is not None:
            lvl64 = level
            n = view.shape[0]
            for i in range(n):
                if view[i] < lvl64:
                    total128 += lvl64 - view[i]
            hi = <i64>(total128 >> 64)          # total is nonnegative
            lo = <unsigned long long>(total128 & <int128>0xFFFFFFFFFFFFFFFF)
            return (int(hi) << 64) + int(lo)
    total = 0
    for s in samples:
        if s < level:
            total += level - s
    return total


def scale_round_batch(xs, num, den):
    """Per-sample round(x * num / den), ties away; den > 0."""
    cdef long long[::1] view
    cdef long i, n
    cdef i64 num64, den64
    out = []
    append = out.append
    if (-(1 << 60) < num < (1 << 60)) and 0 < den < (1 << 62):
        try:
            view = xs
        except (TypeError, ValueError):
            view = None
        if view is not None:
            num64 = num
            den64 = den
            n = view.shape[0]
            for i in range(n):
                append(_dra128(<int128>view[i] * num64, den64))
            return out
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
    return [x + y for x, y in zip(a, b)]


def midpoint_grid(count, base_num, step_num, den, mlo, mhi):
    """Scaled midpoints round((base + step*i)/den) clamped to [mlo, mhi]."""
    cdef long i, n = count
    cdef i64 b64, s64, lo64, hi64, v
    cdef int128 den128, m
    out = []
    append = out.append
    fast = (
        0 < den < (1 << 62)
        and -(1 << 61) < mlo <= mhi < (1 << 61)
        and -(1 << 61) < base_num < (1 << 61)
        and -(1 << 55) < step_num < (1 << 55)
        and count < (1 << 30)
    )
    if fast:
        b64 = base_num
        s64 = step_num
        lo64 = mlo
        hi64 = mhi
        den128 = <int128><long long>den
        for i in range(n):
            m = <int128>b64 + <int128>s64 * i
            v = _dra128(m, den128)
            if v < lo64:
                v = lo64
            elif v > hi64:
                v = hi64
            append(v)
        return out
    for i in range(n):
        m_obj = base_num + step_num * i
        if m_obj >= 0:
            q, r = divmod(m_obj, den)
            v_obj = q + 1 if 2 * r >= den else q
        else:
            q, r = divmod(-m_obj, den)
            v_obj = -(q + 1) if 2 * r >= den else -q
        if v_obj < mlo:
            v_obj = mlo
        elif v_obj > mhi:
            v_obj = mhi
        append(v_obj)
    return out
