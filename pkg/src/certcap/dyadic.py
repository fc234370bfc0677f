"""Exact arithmetic on dyadic rationals.

A dyadic rational is a number ``sign * mantissa * 2**exponent`` with an odd
mantissa (canonical form).  They are closed under addition, subtraction and
multiplication, and every operation here is exact: no bit of the true result
is ever dropped.  Rounding happens only through the explicit `Dyadic.round_to`
/ `from_rational` entry points, which round to nearest with ties away from
zero so the error is at most half a grid step.

This is the only number type that crosses module boundaries in this package;
everything certified is ultimately a dyadic plus an error bound.
"""

from __future__ import annotations

from fractions import Fraction


def div_round_away(num: int, den: int) -> int:
    """Nearest integer to num/den, ties away from zero.  den must be > 0."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    a = -num if num < 0 else num
    q, r = divmod(a, den)
    if 2 * r >= den:
        q += 1
    return -q if num < 0 else q


def floor_log2_frac(x) -> int:
    """Largest k with 2**k <= x, for a positive int/Fraction/Dyadic."""
    if isinstance(x, Dyadic):
        x = x.to_fraction()
    elif not isinstance(x, Fraction):
        x = Fraction(x)
    if x <= 0:
        raise ValueError("floor_log2_frac needs a positive argument")
    p, q = x.numerator, x.denominator
    k = p.bit_length() - q.bit_length()
    # p/q >= 2**k  <=>  p >= q * 2**k ; adjust the bit-length estimate.
    while not _ge_pow2(p, q, k):
        k -= 1
    while _ge_pow2(p, q, k + 1):
        k += 1
    return k


def ceil_log2_frac(x) -> int:
    """Smallest k with x <= 2**k, for a positive int/Fraction/Dyadic."""
    if isinstance(x, Dyadic):
        x = x.to_fraction()
    elif not isinstance(x, Fraction):
        x = Fraction(x)
    k = floor_log2_frac(x)
    p, q = x.numerator, x.denominator
    exact = p == q << k if k >= 0 else p << -k == q
    return k if exact else k + 1


def _ge_pow2(p: int, q: int, k: int) -> bool:
    """True iff p/q >= 2**k (p, q > 0)."""
    if k >= 0:
        return p >= q << k
    return p << -k >= q


class Dyadic:
    """Immutable dyadic rational in canonical form.

    ``Dyadic(m, e)`` represents ``m * 2**e`` for a signed integer mantissa m.
    Internally the sign is split off and trailing zero bits of the mantissa
    are folded into the exponent, so equal values are structurally equal.
    """

    __slots__ = ("sign", "man", "exp")

    def __init__(self, man: int, exp: int = 0):
        if man == 0:
            object.__setattr__(self, "sign", 0)
            object.__setattr__(self, "man", 0)
            object.__setattr__(self, "exp", 0)
            return
        sign = 1
        if man < 0:
            sign = -1
            man = -man
        shift = (man & -man).bit_length() - 1
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "man", man >> shift)
        object.__setattr__(self, "exp", exp + shift)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Dyadic values are immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_fraction(cls, fr) -> "Dyadic":
        """Exact conversion of a fraction whose denominator is a power of 2."""
        fr = Fraction(fr)
        den = fr.denominator
        if den & (den - 1):
            raise ValueError(f"{fr} is not a dyadic rational")
        return cls(fr.numerator, -(den.bit_length() - 1))

    @classmethod
    def from_rational(cls, p: int, q: int, m: int) -> "Dyadic":
        """Round p/q to the grid 2**-m (nearest, ties away from zero).

        The result is within 2**-(m+1) of p/q and has at most m fractional
        bits.  q must be nonzero.
        """
        if q == 0:
            raise ZeroDivisionError("rational with zero denominator")
        if q < 0:
            p, q = -p, -q
        if m >= 0:
            t = div_round_away(p << m, q)
        else:
            t = div_round_away(p, q << -m)
        return cls(t, -m)

    # -- basic properties --------------------------------------------------

    @property
    def prec(self) -> int:
        """Number of bits right of the binary point (0 for integers)."""
        return max(0, -self.exp)

    def is_zero(self) -> bool:
        return self.sign == 0

    def to_fraction(self) -> Fraction:
        n = self.sign * self.man
        if self.exp >= 0:
            return Fraction(n << self.exp, 1)
        return Fraction(n, 1 << -self.exp)

    def __float__(self) -> float:
        return float(self.to_fraction())

    # -- exact arithmetic ---------------------------------------------------

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.sign * self.man, self.exp)

    def __abs__(self) -> "Dyadic":
        return Dyadic(self.man, self.exp)

    def __add__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        e = min(self.exp, other.exp)
        m = (self.sign * self.man << (self.exp - e)) + (
            other.sign * other.man << (other.exp - e)
        )
        return Dyadic(m, e)

    __radd__ = __add__

    def __sub__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Dyadic(self.sign * other.sign * self.man * other.man, self.exp + other.exp)

    __rmul__ = __mul__

    def scale2(self, k: int) -> "Dyadic":
        """Exact multiplication by 2**k."""
        if self.sign == 0:
            return self
        return Dyadic(self.sign * self.man, self.exp + k)

    # -- rounding ------------------------------------------------------------

    def round_to(self, m: int) -> "Dyadic":
        """Round to the grid 2**-m, nearest with ties away from zero.

        |result - self| <= 2**-(m+1), and the result has at most m
        fractional bits.
        """
        if self.sign == 0 or self.exp >= -m:
            return self
        s = -m - self.exp
        q = div_round_away(self.man, 1 << s)
        return Dyadic(self.sign * q, -m)

    def scaled(self, w: int) -> int:
        """round(value * 2**w) with ties away: the kernel-facing fixed-point view."""
        if self.sign == 0:
            return 0
        e = self.exp + w
        if e >= 0:
            return self.sign * self.man << e
        q = div_round_away(self.man, 1 << -e)
        return self.sign * q

    # -- comparisons -----------------------------------------------------------

    def _cmp(self, other) -> int:
        if self.sign != other.sign:
            return -1 if self.sign < other.sign else 1
        if self.sign == 0:
            return 0
        e = min(self.exp, other.exp)
        a = self.man << (self.exp - e)
        b = other.man << (other.exp - e)
        if a == b:
            return 0
        return self.sign if a > b else -self.sign

    def __eq__(self, other):
        other = _coerce_cmp(other)
        if other is NotImplemented:
            return NotImplemented
        if isinstance(other, Dyadic):
            return self.sign == other.sign and self.man == other.man and self.exp == other.exp
        return self.to_fraction() == other

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other):
        return self._rich(other, lambda c: c < 0)

    def __le__(self, other):
        return self._rich(other, lambda c: c <= 0)

    def __gt__(self, other):
        return self._rich(other, lambda c: c > 0)

    def __ge__(self, other):
        return self._rich(other, lambda c: c >= 0)

    def _rich(self, other, test):
        d = _coerce(other)
        if d is NotImplemented:
            if isinstance(other, Fraction):
                return test(_cmp_frac(self.to_fraction(), other))
            return NotImplemented
        return test(self._cmp(d))

    # -- rendering -----------------------------------------------------------

    def binary_string(self) -> str:
        """Signed binary rendering with an explicit binary point."""
        if self.sign == 0:
            return "0"
        sign = "-" if self.sign < 0 else "+"
        if self.exp >= 0:
            return sign + bin(self.man << self.exp)[2:]
        frac_bits = -self.exp
        bits = bin(self.man)[2:].rjust(frac_bits + 1, "0")
        return f"{sign}{bits[:-frac_bits]}.{bits[-frac_bits:]}"

    def decimal_string(self) -> str:
        """Exact decimal rendering (dyadics have finite decimal expansions)."""
        if self.sign == 0:
            return "0"
        sign = "-" if self.sign < 0 else ""
        if self.exp >= 0:
            return sign + str(self.man << self.exp)
        k = -self.exp
        scaled = self.man * 5**k  # man/2^k == man*5^k / 10^k
        digits = str(scaled).rjust(k + 1, "0")
        frac = digits[-k:].rstrip("0") or "0"
        return f"{sign}{digits[:-k]}.{frac}"

    def decimal_string_rounded(self, digits: int) -> str:
        """Decimal rendering rounded to `digits` places (ties away)."""
        if digits < 0:
            raise ValueError("digits must be >= 0")
        fr = self.to_fraction()
        scaled = div_round_away(fr.numerator * 10**digits, fr.denominator)
        sign = "-" if scaled < 0 else ""
        s = str(abs(scaled)).rjust(digits + 1, "0")
        if digits == 0:
            return sign + s
        return f"{sign}{s[:-digits]}.{s[-digits:]}"

    def __repr__(self):
        return f"Dyadic({self.sign * self.man}, {self.exp})"

    def __str__(self):
        return self.decimal_string()


ZERO = Dyadic(0)
ONE = Dyadic(1)


def _coerce(value):
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, int):
        return Dyadic(value)
    if isinstance(value, Fraction):
        den = value.denominator
        if den & (den - 1) == 0:
            return Dyadic(value.numerator, -(den.bit_length() - 1))
    return NotImplemented


def _coerce_cmp(value):
    if isinstance(value, (Dyadic, int, Fraction)):
        return value if isinstance(value, Dyadic) else Fraction(value)
    return NotImplemented


def _cmp_frac(a: Fraction, b: Fraction) -> int:
    if a == b:
        return 0
    return -1 if a < b else 1
