"""Computable reals as binary-converging approximation processes.

A `CReal` wraps a process ``n -> Dyadic`` promising |x - process(n)| <= 2**-n
for every n >= 0.  Queries are memoized at the best precision seen so far
(a finer answer is always a valid coarser answer), and the memo is guarded
by a lock so concurrent queries behave as if serialized.

Equality of computable reals is undecidable, so none is offered; use
`compare_with_gap`, which either orders two reals or certifies they are
within a caller-chosen gap.  The natural log of a positive real needs a
strict positivity witness for the same reason: positivity alone is only
semi-decidable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .dyadic import Dyadic, ceil_log2_frac, floor_log2_frac
from .errors import ContractError
from .rigorlog import LogWindow, ln_rational, log_compose, make_log_window


@dataclass(frozen=True)
class PositiveWitness:
    """A rational lower bound certifying a value stays strictly above zero."""

    lower: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lower", Fraction(self.lower))
        if self.lower <= 0:
            raise ValueError("a positivity witness must be strictly positive")


class Comparison(Enum):
    LESS = "less"
    GREATER = "greater"
    WITHIN_GAP = "within_gap"


class CReal:
    """A real number given by a certified approximation process."""

    __slots__ = ("_process", "exact", "magnitude_hint", "_lock", "_best_n", "_best")

    def __init__(self, process, exact=None, magnitude_hint=None):
        self._process = process
        self.exact = exact
        self.magnitude_hint = magnitude_hint
        self._lock = threading.Lock()
        self._best_n = -1
        self._best = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_rational(cls, value) -> "CReal":
        fr = Fraction(value)
        den = fr.denominator
        if den & (den - 1) == 0:
            d = Dyadic(fr.numerator, -(den.bit_length() - 1))
            return cls(lambda n: d, exact=fr, magnitude_hint=abs(fr))

        def process(n):
            return Dyadic.from_rational(fr.numerator, fr.denominator, n)

        return cls(process, exact=fr, magnitude_hint=abs(fr))

    @classmethod
    def from_dyadic(cls, d: Dyadic) -> "CReal":
        return cls(lambda n: d, exact=d.to_fraction(), magnitude_hint=abs(d.to_fraction()))

    @classmethod
    def from_process(cls, process, magnitude_hint=None) -> "CReal":
        """Wrap an explicit process; the caller owns the convergence contract."""
        return cls(process, magnitude_hint=magnitude_hint)

    # -- querying -------------------------------------------------------------

    def query(self, n: int) -> Dyadic:
        """A dyadic within 2**-n of the represented real (n >= 0)."""
        if n < 0:
            raise ValueError("precision must be >= 0")
        with self._lock:
            if self._best_n >= n:
                return self._best
            val = self._process(n)
            self._best_n = n
            self._best = val
            return val

    def enclosure(self, n: int) -> tuple[Fraction, Fraction]:
        """A rational interval of width 2**(1-n) containing the real."""
        d = self.query(n).to_fraction()
        eps = Fraction(1, 1 << n)
        return d - eps, d + eps

    # -- arithmetic lifts -------------------------------------------------------

    def __add__(self, other: "CReal") -> "CReal":
        if not isinstance(other, CReal):
            return NotImplemented
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact + other.exact
        hint = None
        if self.magnitude_hint is not None and other.magnitude_hint is not None:
            hint = self.magnitude_hint + other.magnitude_hint
        return CReal(lambda n: self.query(n + 1) + other.query(n + 1),
                     exact=exact, magnitude_hint=hint)

    def __sub__(self, other: "CReal") -> "CReal":
        if not isinstance(other, CReal):
            return NotImplemented
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact - other.exact
        hint = None
        if self.magnitude_hint is not None and other.magnitude_hint is not None:
            hint = self.magnitude_hint + other.magnitude_hint
        return CReal(lambda n: self.query(n + 1) - other.query(n + 1),
                     exact=exact, magnitude_hint=hint)

    def __mul__(self, other: "CReal") -> "CReal":
        if not isinstance(other, CReal):
            return NotImplemented
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact * other.exact
        bounds = []

        def process(n):
            if not bounds:
                # One-time coarse magnitude bounds; frozen so later queries
                # at other precisions reproduce the same operand schedule.
                a = self.magnitude_hint
                b = other.magnitude_hint
                if a is None:
                    a = abs(self.query(4).to_fraction()) + Fraction(1, 16)
                if b is None:
                    b = abs(other.query(4).to_fraction()) + Fraction(1, 16)
                bounds.append((a, b))
            a, b = bounds[0]
            na = n + 2 + max(0, ceil_log2_frac(1 + b))
            nb = n + 2 + max(0, ceil_log2_frac(1 + a))
            return self.query(na) * other.query(nb)

        hint = None
        if self.magnitude_hint is not None and other.magnitude_hint is not None:
            hint = self.magnitude_hint * other.magnitude_hint
        return CReal(process, exact=exact, magnitude_hint=hint)

    def add_rational(self, r) -> "CReal":
        r = Fraction(r)
        exact = None if self.exact is None else self.exact + r

        def process(n):
            return self.query(n + 1) + Dyadic.from_rational(r.numerator, r.denominator, n + 2)

        hint = None if self.magnitude_hint is None else self.magnitude_hint + abs(r)
        return CReal(process, exact=exact, magnitude_hint=hint)

    def mul_rational(self, r) -> "CReal":
        r = Fraction(r)
        if r == 0:
            return CReal.from_rational(0)
        shift = max(0, ceil_log2_frac(abs(r)))
        exact = None if self.exact is None else self.exact * r

        def process(n):
            prod = self.query(n + 1 + shift).to_fraction() * r
            return Dyadic.from_rational(prod.numerator, prod.denominator, n + 1)

        hint = None if self.magnitude_hint is None else self.magnitude_hint * abs(r)
        return CReal(process, exact=exact, magnitude_hint=hint)

    def div_rational(self, r) -> "CReal":
        r = Fraction(r)
        if r == 0:
            raise ZeroDivisionError("division of a computable real by zero")
        return self.mul_rational(1 / r)


_LN_WINDOW: LogWindow | None = None


def _ln_window() -> LogWindow:
    global _LN_WINDOW
    if _LN_WINDOW is None:
        _LN_WINDOW = make_log_window(Fraction(5, 8), Fraction(9, 4))
    return _LN_WINDOW


def cr_ln(x: CReal, witness: PositiveWitness) -> CReal:
    """Natural log of a computable real certified positive by `witness`.

    The argument is scaled by a power of two into [3/4, 2), read off a coarse
    enclosure fine enough (relative width <= 1/4) for the exponent to be
    unambiguous; the scaled value is fed through the fixed log bracket
    [5/8, 9/4] and the exponent contributes an exact multiple of ln 2.
    A queried enclosure that falls below the witness raises `ContractError`.
    """
    if x.exact is not None:
        fr = x.exact
        if fr < witness.lower:
            raise ContractError(
                f"positivity witness {witness.lower} violated: value is {fr}")

        def exact_process(n):
            return ln_rational(fr.numerator, fr.denominator, n)

        return CReal(exact_process)

    window = _ln_window()
    state = []

    def process(n):
        if not state:
            k = max(4, ceil_log2_frac(16 / witness.lower))
            lo, hi = x.enclosure(k)
            if hi < witness.lower or lo <= 0:
                raise ContractError(
                    f"positivity witness {witness.lower} violated: enclosure "
                    f"[{lo}, {hi}] is not above it")
            state.append(floor_log2_frac(hi))
        e = state[0]

        def scaled_eval(_point, m):
            return x.query(max(0, m - e)).scale2(-e)

        body = log_compose(scaled_eval, window, None, n + 1)
        if e:
            bits = n + 2 + abs(e).bit_length()
            body = body + Dyadic(e) * ln_rational(2, 1, bits)
        return body

    return CReal(process)


def compare_with_gap(a: CReal, b: CReal, gap) -> Comparison:
    """Order two computable reals or certify |a - b| <= gap.

    LESS and GREATER are exact strict statements; WITHIN_GAP certifies the
    values differ by at most `gap`.  At most ceil(log2(1/gap)) + 2 query
    refinements are made on each argument.
    """
    gap = Fraction(gap)
    if gap <= 0:
        raise ValueError("gap must be positive")
    n_final = max(0, ceil_log2_frac(1 / gap)) + 2
    for n in range(1, n_final + 1):
        d = (b.query(n) - a.query(n)).to_fraction()
        tol = Fraction(1, 1 << (n - 1))  # 2 * 2**-n
        if d > tol:
            return Comparison.LESS
        if -d > tol:
            return Comparison.GREATER
    return Comparison.WITHIN_GAP
