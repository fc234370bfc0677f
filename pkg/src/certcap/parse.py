"""Expression parser producing certified functions.

Grammar (whitespace-insensitive)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := number | "f" | "pi" | func "(" expr ")" | "(" expr ")" | "-" factor
    func   := "sin" | "cos" | "exp" | "sqrt" | "ln"
    number := integer or decimal literal; fractions p/q fold through "/"

Every AST node carries exact rational range bounds plus Lipschitz and
second-derivative bounds derived structurally, so the resulting `CFunc`
always has a modulus of continuity and a fast-quadrature witness.  Division,
sqrt and ln require the subtree to certify the needed sign, otherwise the
expression is rejected at parse time (an unbounded slope on the domain has
no usable modulus).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from . import _kernels as kern
from .cfunc import CFunc, ModulusFn
from .dyadic import Dyadic, ceil_log2_frac, div_round_away
from .elementary import exp_dyadic, exp_plan, pi_scaled, trig_plan
from .errors import ParseError
from .rigorlog import ln_rational, ln_rational_scaled


def _rescale(vals, from_scale: int, to_scale: int):
    """Move scaled integers between scales; exact upward, rounded downward."""
    if to_scale >= from_scale:
        sh = to_scale - from_scale
        return [v << sh for v in vals] if sh else vals
    return kern.scale_round_batch(vals, 1, 1 << (from_scale - to_scale))


class _Node:
    """Base: rlo/rhi bound the range, lip and d2 bound |f'| and |f''|."""

    rlo: Fraction
    rhi: Fraction
    lip: Fraction
    d2: Fraction

    def mag(self) -> Fraction:
        return max(abs(self.rlo), abs(self.rhi))


class _Const(_Node):
    def __init__(self, value: Fraction):
        self.value = Fraction(value)
        self.rlo = self.rhi = self.value
        self.lip = self.d2 = Fraction(0)

    def batch(self, xs, xscale, prec):
        os = prec + 1
        v = div_round_away(self.value.numerator << os, self.value.denominator)
        return [v] * len(xs), os


class _Pi(_Node):
    def __init__(self):
        s = pi_scaled(24)
        self.rlo = Fraction(s - 2, 1 << 24)
        self.rhi = Fraction(s + 2, 1 << 24)
        self.lip = self.d2 = Fraction(0)

    def batch(self, xs, xscale, prec):
        os = prec + 2
        return [pi_scaled(os)] * len(xs), os  # within 2 units = 2**-(prec+1)


class _Var(_Node):
    def __init__(self, domain):
        self.rlo, self.rhi = domain
        self.lip = Fraction(1)
        self.d2 = Fraction(0)

    def batch(self, xs, xscale, prec):
        os = prec + 2
        return _rescale(xs, xscale, os), os


class _Neg(_Node):
    def __init__(self, g: _Node):
        self.g = g
        self.rlo, self.rhi = -g.rhi, -g.rlo
        self.lip, self.d2 = g.lip, g.d2

    def batch(self, xs, xscale, prec):
        vals, os = self.g.batch(xs, xscale, prec)
        return [-v for v in vals], os


class _Add(_Node):
    def __init__(self, g: _Node, h: _Node, sign: int):
        self.g, self.h, self.sign = g, h, sign
        if sign > 0:
            self.rlo, self.rhi = g.rlo + h.rlo, g.rhi + h.rhi
        else:
            self.rlo, self.rhi = g.rlo - h.rhi, g.rhi - h.rlo
        self.lip = g.lip + h.lip
        self.d2 = g.d2 + h.d2

    def batch(self, xs, xscale, prec):
        gv, go = self.g.batch(xs, xscale, prec + 1)
        hv, ho = self.h.batch(xs, xscale, prec + 1)
        os = max(go, ho)
        gv = _rescale(gv, go, os)
        hv = _rescale(hv, ho, os)
        if self.sign > 0:
            return kern.add_arrays(gv, hv), os
        return [a - b for a, b in zip(gv, hv)], os


class _Mul(_Node):
    def __init__(self, g: _Node, h: _Node):
        self.g, self.h = g, h
        corners = [a * b for a in (g.rlo, g.rhi) for b in (h.rlo, h.rhi)]
        self.rlo, self.rhi = min(corners), max(corners)
        self.lip = g.lip * h.mag() + h.lip * g.mag()
        self.d2 = g.d2 * h.mag() + 2 * g.lip * h.lip + h.d2 * g.mag()

    def batch(self, xs, xscale, prec):
        pg = prec + 2 + max(0, ceil_log2_frac(1 + self.h.mag()))
        ph = prec + 2 + max(0, ceil_log2_frac(1 + self.g.mag()))
        gv, go = self.g.batch(xs, xscale, pg)
        hv, ho = self.h.batch(xs, xscale, ph)
        os = prec + 3
        prods = [a * b for a, b in zip(gv, hv)]
        return _rescale(prods, go + ho, os), os


class _Div(_Node):
    """g / h with h certified strictly positive on the domain."""

    def __init__(self, g: _Node, h: _Node):
        self.g, self.h = g, h
        hlo, hhi = h.rlo, h.rhi
        quotients = [a / b for a in (g.rlo, g.rhi) for b in (hlo, hhi)]
        self.rlo, self.rhi = min(quotients), max(quotients)
        mg = g.mag()
        self.lip = g.lip / hlo + mg * h.lip / hlo**2
        self.d2 = (g.d2 / hlo + 2 * g.lip * h.lip / hlo**2
                   + mg * h.d2 / hlo**2 + 2 * mg * h.lip**2 / hlo**3)

    def batch(self, xs, xscale, prec):
        hlo = self.h.rlo
        mg = self.g.mag()
        pg = prec + 2 + max(0, ceil_log2_frac(2 / hlo))
        ph = prec + 2 + max(0, ceil_log2_frac(2 * (mg + 1) / hlo**2))
        ph = max(ph, 1 + ceil_log2_frac(2 / hlo))  # keep rounded h above hlo/2
        gv, go = self.g.batch(xs, xscale, pg)
        hv, ho = self.h.batch(xs, xscale, ph)
        os = prec + 3
        sh = ho - go + os
        out = []
        for a, b in zip(gv, hv):
            if b <= 0:
                raise ParseError("denominator left its certified range", 0)
            if sh >= 0:
                out.append(div_round_away(a << sh, b))
            else:
                out.append(div_round_away(a, b << -sh))
        return out, os


class _Sin(_Node):
    want_cos = 0

    def __init__(self, g: _Node):
        self.g = g
        self.rlo, self.rhi = Fraction(-1), Fraction(1)
        self.lip = g.lip
        self.d2 = g.d2 + g.lip**2

    def batch(self, xs, xscale, prec):
        w, j, terms = trig_plan(self.g.mag(), prec + 2)
        gv, go = self.g.batch(xs, xscale, prec + 1)
        args = _rescale(gv, go, w)
        return kern.sin_cos_batch(args, w, j, terms, self.want_cos), w


class _Cos(_Sin):
    want_cos = 1


class _Exp(_Node):
    def __init__(self, g: _Node):
        self.g = g
        self.rhi = _exp_upper(g.rhi)
        self.rlo = 1 / _exp_upper(-g.rlo)
        self.lip = self.rhi * g.lip
        self.d2 = self.rhi * (g.d2 + g.lip**2)

    def batch(self, xs, xscale, prec):
        shift = max(0, ceil_log2_frac(self.rhi))
        gv, go = self.g.batch(xs, xscale, prec + 1 + shift)
        w, j, terms = exp_plan(self.g.mag(), max(self.g.rhi, Fraction(0)), prec + 2)
        args = _rescale(gv, go, w)
        return kern.exp_batch(args, w, j, terms), w


class _Sqrt(_Node):
    def __init__(self, g: _Node, pos: int):
        if g.rlo <= 0:
            raise ParseError("sqrt needs a strictly positive subexpression", pos)
        self.g = g
        root_lo = math.isqrt((g.rlo.numerator << 40) // g.rlo.denominator)
        if root_lo == 0:
            raise ParseError("sqrt slope unbounded on this domain", pos)
        self.rlo = Fraction(root_lo, 1 << 20)
        num = -((-g.rhi.numerator << 40) // g.rhi.denominator)
        self.rhi = Fraction(math.isqrt(num) + 1, 1 << 20)
        self.lip = g.lip / (2 * self.rlo)
        self.d2 = g.d2 / (2 * self.rlo) + g.lip**2 / (4 * self.rlo**3)

    def batch(self, xs, xscale, prec):
        p_in = prec + 2 + max(0, ceil_log2_frac(1 / (2 * self.rlo)))
        gv, go = self.g.batch(xs, xscale, p_in)
        os = prec + 3
        out = []
        for v in gv:
            if v <= 0:
                raise ParseError("sqrt argument left its certified range", 0)
            sh = 2 * os - go
            out.append(math.isqrt(v << sh) if sh >= 0 else math.isqrt(v >> -sh))
        return out, os


class _Ln(_Node):
    def __init__(self, g: _Node, pos: int):
        if g.rlo <= 0:
            raise ParseError(
                "ln needs a positivity witness derivable from the tree", pos)
        self.g = g
        self.rlo = ln_rational(g.rlo.numerator, g.rlo.denominator, 10).to_fraction() - Fraction(1, 1 << 10)
        self.rhi = ln_rational(g.rhi.numerator, g.rhi.denominator, 10).to_fraction() + Fraction(1, 1 << 10)
        self.lip = g.lip / g.rlo
        self.d2 = g.d2 / g.rlo + (g.lip / g.rlo) ** 2

    def batch(self, xs, xscale, prec):
        p_in = prec + 2 + max(0, ceil_log2_frac(1 / self.g.rlo))
        gv, go = self.g.batch(xs, xscale, p_in)
        os = prec + 4
        den = 1 << go
        out = []
        for v in gv:
            if v <= 0:
                raise ParseError("ln argument left its certified range", 0)
            m, w = ln_rational_scaled(v, den, prec + 3)
            out.append(div_round_away(m, 1 << (w - os)) if w > os else m << (os - w))
        return out, os


def _exp_upper(x: Fraction) -> Fraction:
    """A rational upper bound on exp(x)."""
    if x <= 0:
        return Fraction(1)
    arg = Dyadic.from_rational(x.numerator, x.denominator, 20)
    d = exp_dyadic(arg, 10, max_abs=x + 1)
    # exp(x) <= exp(arg + 2^-20) <= (d + 2^-10) * (1 + 2^-19)
    up = (d.to_fraction() + Fraction(1, 1 << 10)) * (1 + Fraction(1, 1 << 19))
    return up


_TOKEN = re.compile(r"(\d+\.\d+|\d+)|([A-Za-z_]+)|([-+*/()])")

_FUNCS = ("sin", "cos", "exp", "sqrt", "ln")


class _Parser:
    def __init__(self, text: str, domain):
        self.text = text
        self.domain = domain
        self.tokens = []
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            if m.group(1):
                lit = m.group(1)
                if "." in lit:
                    whole, frac = lit.split(".")
                    val = Fraction(int(whole + frac), 10 ** len(frac))
                else:
                    val = Fraction(int(lit))
                self.tokens.append(("num", val, pos))
            elif m.group(2):
                self.tokens.append(("name", m.group(2), pos))
            else:
                self.tokens.append(("op", m.group(3), pos))
            pos = m.end()
        self.tokens.append(("end", None, len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> _Node:
        node = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("trailing input after expression", pos)
        return node

    def expr(self) -> _Node:
        node = self.term()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                node = self._fold_add(node, rhs, 1 if val == "+" else -1)
            else:
                return node

    def term(self) -> _Node:
        node = self.factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.factor()
                if val == "*":
                    node = self._fold_mul(node, rhs)
                else:
                    node = self._fold_div(node, rhs, pos)
            else:
                return node

    def factor(self) -> _Node:
        kind, val, pos = self.advance()
        if kind == "num":
            return _Const(val)
        if kind == "name":
            if val == "f":
                return _Var(self.domain)
            if val == "pi":
                return _Pi()
            if val in _FUNCS:
                k2, v2, p2 = self.advance()
                if (k2, v2) != ("op", "("):
                    raise ParseError(f"expected '(' after {val}", p2)
                inner = self.expr()
                k3, v3, p3 = self.advance()
                if (k3, v3) != ("op", ")"):
                    raise ParseError("expected ')'", p3)
                return self._apply(val, inner, pos)
            raise ParseError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            inner = self.expr()
            k2, v2, p2 = self.advance()
            if (k2, v2) != ("op", ")"):
                raise ParseError("expected ')'", p2)
            return inner
        if kind == "op" and val == "-":
            inner = self.factor()
            if isinstance(inner, _Const):
                return _Const(-inner.value)
            return _Neg(inner)
        raise ParseError("expected a number, name, or '('", pos)

    @staticmethod
    def _fold_add(a: _Node, b: _Node, sign: int) -> _Node:
        if isinstance(a, _Const) and isinstance(b, _Const):
            return _Const(a.value + sign * b.value)
        return _Add(a, b, sign)

    @staticmethod
    def _fold_mul(a: _Node, b: _Node) -> _Node:
        if isinstance(a, _Const) and isinstance(b, _Const):
            return _Const(a.value * b.value)
        return _Mul(a, b)

    @staticmethod
    def _fold_div(a: _Node, b: _Node, pos: int) -> _Node:
        if isinstance(b, _Const):
            if b.value == 0:
                raise ParseError("division by zero", pos)
            if isinstance(a, _Const):
                return _Const(a.value / b.value)
            return _Mul(a, _Const(1 / b.value))
        if b.rhi < 0:
            return _Div(_neg_node(a), _neg_node(b))
        if b.rlo <= 0:
            raise ParseError(
                "division needs a positivity witness derivable from the tree", pos)
        return _Div(a, b)

    @staticmethod
    def _apply(name: str, inner: _Node, pos: int) -> _Node:
        if name == "sin":
            return _Sin(inner)
        if name == "cos":
            return _Cos(inner)
        if name == "exp":
            return _Exp(inner)
        if name == "sqrt":
            return _Sqrt(inner, pos)
        return _Ln(inner, pos)


def _neg_node(a: _Node) -> _Node:
    return _Const(-a.value) if isinstance(a, _Const) else _Neg(a)


def parse_expression(text: str, domain=(0, 1)) -> CFunc:
    """Parse an expression in the variable f into a certified `CFunc`."""
    dom = (Fraction(domain[0]), Fraction(domain[1]))
    if not dom[0] < dom[1]:
        raise ValueError(f"empty domain [{dom[0]}, {dom[1]}]")
    root = _Parser(text, dom).parse()
    return CFunc(
        dom[0], dom[1], root.batch,
        ModulusFn.from_lipschitz(root.lip),
        lip=root.lip,
        pos_witness=root.rlo if root.rlo > 0 else None,
        upper_bound=root.rhi,
        lower_bound=root.rlo,
        d2_bound=root.d2,
        const_value=root.value if isinstance(root, _Const) else None,
        label=text.strip())
