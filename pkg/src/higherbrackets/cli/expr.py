"""Expression grammar for context elements.

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | power
    power  := atom ("^" "-"? INT)?
    atom   := RATIONAL | IDENT | "d" "(" IDENT ")" | "(" expr ")"

Rationals are ``p`` or ``p/q``.  ``*`` is mandatory between factors.  In
operator contexts (``ops``, ``vect``) ``*`` composes operators and ``d(x)``
is the derivative along ``x``; in ``ham`` and ``multivec`` it is the
supercommutative product and momenta are written ``p_x`` / ``xs_x``.
Negative exponents are accepted only on even parameters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..contexts import LieContext
from ..kernel import SuperPoly

TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^()])
""", re.VERBOSE)


class ParseError(ValueError):
    def __init__(self, message: str, source: str, pos: int, expected=()):
        self.pos = pos
        self.line = source.count("\n", 0, pos) + 1
        self.column = pos - (source.rfind("\n", 0, pos) + 1) + 1
        self.expected = sorted(set(expected))
        where = f"line {self.line}, column {self.column}"
        tail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}: {message}{tail}")


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(source):
        m = TOKEN.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", source, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", len(source)))
    return out


class ExprParser:
    def __init__(self, ctx: LieContext, source: str):
        self.ctx = ctx
        self.sig = ctx.sig
        self.src = source
        self.toks = tokenize(source)
        self.i = 0
        self.operator_ctx = ctx.kind in ("ops", "vect")

    # -- token helpers -------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message, expected=(), tok=None):
        tok = tok or self.tok
        raise ParseError(message, self.src, tok.pos, expected)

    def take(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.take(text):
            got = self.tok.text or "end of input"
            self.error(f"unexpected {got!r}", [repr(text)])

    # -- algebra -------------------------------------------------------------
    def mul(self, a: SuperPoly, b: SuperPoly) -> SuperPoly:
        return self.ctx.compose(a, b) if self.operator_ctx else a * b

    # -- grammar -------------------------------------------------------------
    def parse(self) -> SuperPoly:
        value = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}", ["'+'", "'-'", "'*'", "'^'", "end of input"])
        return value

    def expr(self) -> SuperPoly:
        value = self.term()
        while True:
            if self.take("+"):
                value = value + self.term()
            elif self.take("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> SuperPoly:
        value = self.unary()
        while self.take("*"):
            value = self.mul(value, self.unary())
        return value

    def unary(self) -> SuperPoly:
        if self.take("-"):
            return -self.unary()
        return self.power()

    def power(self) -> SuperPoly:
        start = self.tok
        base, name = self.atom()
        if not self.take("^"):
            return base
        neg = self.take("-")
        tok = self.tok
        if tok.kind != "num" or "/" in tok.text:
            self.error("exponent must be an integer", ["integer"])
        self.i += 1
        k = int(tok.text)
        if neg:
            v = self.sig.vars[self.sig.index[name]] if name in self.sig.index else None
            if v is None or v.role != "param" or v.parity != 0:
                self.error("negative exponents are allowed only on even parameters", tok=start)
            return self.sig.gen(name, -k)
        out = self.sig.one()
        for _ in range(k):
            out = self.mul(out, base)
        return out

    def atom(self) -> tuple[SuperPoly, str | None]:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            num, _, den = tok.text.partition("/")
            if den and int(den) == 0:
                self.error("zero denominator in rational literal", tok=tok)
            return self.sig.const(Fraction(int(num), int(den or 1))), None
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            value = self.expr()
            self.expect(")")
            return value, None
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "d" and self.tok.kind == "op" and self.tok.text == "(":
                return self.derivative(tok), None
            return self.variable(tok), tok.text
        got = tok.text or "end of input"
        self.error(f"unexpected {got!r}", ["number", "identifier", "'('", "'-'", "d(...)"])

    def derivative(self, head: Token) -> SuperPoly:
        if not self.operator_ctx:
            self.error(f"derivative atoms are not available in a {self.ctx.kind} context", tok=head)
        self.expect("(")
        tok = self.tok
        if tok.kind != "ident":
            self.error("expected a variable name", ["identifier"])
        self.i += 1
        if tok.text not in self.ctx.base:
            self.error(f"unknown base variable {tok.text!r}", tok=tok)
        self.expect(")")
        return self.sig.gen(self.ctx._conj_of[tok.text])

    def variable(self, tok: Token) -> SuperPoly:
        name = tok.text
        if name not in self.sig.index:
            self.error(f"unknown identifier {name!r}", tok=tok)
        role = self.sig.var(name).role
        if role == "momentum" and self.operator_ctx:
            base = self.sig.var(name).base
            self.error(f"write d({base}) for the derivative in a {self.ctx.kind} context", tok=tok)
        return self.sig.gen(name)


def parse_expr(source: str, ctx: LieContext) -> SuperPoly:
    value = ExprParser(ctx, source).parse()
    if ctx.kind == "vect" and value and not ctx.is_vector_field(value):
        raise ParseError(f"{ctx.format(value)} is not a vector field", source, 0)
    return value


def print_expr(value: SuperPoly, ctx: LieContext) -> str:
    return ctx.format(value)
