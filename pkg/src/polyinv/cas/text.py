"""Polynomial text syntax.

Grammar (whitespace is insignificant, implicit multiplication is an error)::

    expr   := ["+" | "-"] term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*      # "/" only by a nonzero constant
    factor := "-" factor | atom ["^" INT]
    atom   := INT | IDENT | "(" expr ")"

Rational coefficients are written as quotients of integers, e.g. ``-7/2*x1``.
"""

from __future__ import annotations

import re

from gmpy2 import mpq

from ..errors import ParseError
from .monomial import unpack
from .polynomial import Polynomial, make_ring

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")
_NAME = re.compile(r"([A-Za-z_]+)(\d*)$")
_PREFIX_RANK = {"x": 0, "y": 1, "z": 2, "t": 3}


def natural_ring(names) -> tuple:
    """Order variable names: x*, y*, z*, t, others; numeric suffixes numerically."""

    def key(name):
        m = _NAME.match(name.lstrip("_"))
        if not m:
            return (9, name, 0)
        prefix, digits = m.groups()
        return (_PREFIX_RANK.get(prefix, 4), prefix, int(digits) if digits else -1, name)

    return tuple(sorted(set(names), key=key))


class _Tokens:
    def __init__(self, text: str, line: int, col0: int):
        self.items = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad)
            start = m.start(m.lastindex)
            num, ident, op = m.groups()
            if op == "**":
                op = "^"
            if num is not None:
                self.items.append(("num", num, start))
            elif ident is not None:
                self.items.append(("ident", ident, start))
            else:
                self.items.append(("op", op, start))
            pos = m.end()
        self.items.append(("end", "", len(text)))
        self.i = 0
        self.line = line
        self.col0 = col0

    def peek(self):
        return self.items[self.i]

    def take(self):
        tok = self.items[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, self.line, self.col0 + tok[2])


class _Parser:
    def __init__(self, toks: _Tokens, ring):
        self.toks = toks
        self.ring = ring
        self.index = {name: i for i, name in enumerate(ring)}

    def expr(self):
        toks = self.toks
        sign = 1
        if toks.peek()[:2] in (("op", "+"), ("op", "-")):
            sign = -1 if toks.take()[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while toks.peek()[:2] in (("op", "+"), ("op", "-")):
            op = toks.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        toks = self.toks
        acc = self.factor()
        while True:
            tok = toks.peek()
            if tok[:2] == ("op", "*"):
                toks.take()
                acc = acc * self.factor()
            elif tok[:2] == ("op", "/"):
                toks.take()
                rhs_tok = toks.peek()
                rhs = self.factor()
                if not rhs.is_constant() or rhs.is_zero():
                    raise toks.error("division is only allowed by a nonzero constant", rhs_tok)
                acc = acc.scale(1 / rhs.constant_term())
            elif tok[0] in ("num", "ident") or tok[:2] == ("op", "("):
                raise toks.error("implicit multiplication is not allowed; use '*'")
            else:
                return acc

    def factor(self):
        toks = self.toks
        if toks.peek()[:2] == ("op", "-"):
            toks.take()
            return -self.factor()
        base = self.atom()
        if toks.peek()[:2] == ("op", "^"):
            toks.take()
            tok = toks.take()
            if tok[0] != "num":
                raise toks.error("exponent must be a nonnegative integer literal", tok)
            base = base ** int(tok[1])
        return base

    def atom(self):
        toks = self.toks
        tok = toks.take()
        kind, value, _ = tok
        if kind == "num":
            return Polynomial.constant(self.ring, mpq(int(value)))
        if kind == "ident":
            if value not in self.index:
                raise toks.error(f"unknown variable {value!r}", tok)
            return Polynomial.variable(self.ring, self.index[value])
        if tok[:2] == ("op", "("):
            inner = self.expr()
            close = toks.take()
            if close[:2] != ("op", ")"):
                raise toks.error("expected ')'", close)
            return inner
        if kind == "end":
            raise toks.error("unexpected end of expression", tok)
        raise toks.error(f"unexpected {value!r}", tok)


def identifiers(text: str) -> list:
    return re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text)


def parse_polynomial(text: str, ring=None, *, line: int = 1, column: int = 1) -> Polynomial:
    """Parse ``text`` into a polynomial over ``ring``.

    Without a ring, the ring is built from the identifiers that occur, in
    natural order (``x1, x2, ..., y1, ..., z1, ..., t``).
    """
    if ring is None:
        ring = natural_ring(identifiers(text)) or ("x1",)
    ring = make_ring(ring)
    toks = _Tokens(text, line, column - 1)
    if toks.peek()[0] == "end":
        raise ParseError("empty polynomial", line, column)
    parser = _Parser(toks, ring)
    result = parser.expr()
    tail = toks.peek()
    if tail[0] != "end":
        if tail[0] in ("num", "ident") or tail[:2] == ("op", "("):
            raise toks.error("implicit multiplication is not allowed; use '*'", tail)
        raise toks.error(f"unexpected {tail[1]!r}", tail)
    return result


def _format_coeff(c) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_monomial(exps, ring) -> str:
    parts = []
    for name, e in zip(ring, exps):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_polynomial(f: Polynomial) -> str:
    """Terms in display order, e.g. ``-2 + x1^2 + x2^2 + x3^2 - 2*x1*x2*x3``."""
    if f.is_zero():
        return "0"
    out = []
    for c, exps in f.terms():
        mono = format_monomial(exps, f.ring)
        neg = c < 0
        mag = -c if neg else c
        if not mono:
            body = _format_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_format_coeff(mag)}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def monomial_text(key: int, ring) -> str:
    return format_monomial(unpack(key, len(ring)), ring) or "1"
