"""Recursive-descent parser for the shared expression grammar.

Grammar (infix, precedence pow > unary minus > mul/div > add/sub, all
binary operators left-associative):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base
    base   := atom ('^' exponent)*
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Identifiers are ASCII letter sequences.  ``u_t``, ``u_xx`` and friends
(one trailing letter per differentiation) are derivative atoms of the
unknown; ``Dx(...)``, ``Dxx(...)``, ``Dt(...)``, ``Dxt(...)`` are group
derivatives.  Names in the caller's variable set become Var leaves,
everything else becomes Param.
"""

from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from typing import Optional

from .errors import ExprSyntaxError
from .expr import (
    Binary,
    Const,
    DerivAtom,
    DerivGroup,
    Expr,
    Param,
    Unary,
    Var,
)

DEFAULT_VARS = frozenset({"x", "t"})

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)"
    r"|(?P<deriv>[A-Za-z]+_[A-Za-z]+)"
    r"|(?P<ident>[A-Za-z]+)"
    r"|(?P<op>[-+*/^()]))"
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m or m.end() == i:
            stripped = text[i:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ExprSyntaxError(
                f"unexpected character {stripped[0]!r}", bad_at,
                frozenset({"number", "identifier", "operator"}),
            )
        for kind in ("num", "deriv", "ident", "op"):
            got = m.group(kind)
            if got is not None:
                tokens.append(_Token(kind if kind != "op" else got, got, m.start(kind)))
                break
        i = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, var_names: frozenset[str]):
        self.text = text
        self.vars = var_names
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, kind: str) -> _Token:
        if self.cur.kind != kind:
            raise ExprSyntaxError(
                f"expected {kind!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.pos, frozenset({kind}),
            )
        return self._advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.cur.kind != "end":
            raise ExprSyntaxError(
                f"trailing input {self.cur.text!r}", self.cur.pos, frozenset({"end"})
            )
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.cur.kind in ("+", "-"):
            op = self._advance().kind
            e = Binary("add" if op == "+" else "sub", e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.cur.kind in ("*", "/"):
            op = self._advance().kind
            e = Binary("mul" if op == "*" else "div", e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.cur.kind == "-":
            self._advance()
            return Unary("neg", self.factor())
        return self.base()

    def base(self) -> Expr:
        e = self.atom()
        while self.cur.kind == "^":
            self._advance()
            if self.cur.kind == "-":  # allow x^-2 without parentheses
                self._advance()
                e = Binary("pow", e, Unary("neg", self.atom()))
            else:
                e = Binary("pow", e, self.atom())
        return e

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self._advance()
            return Const(Fraction(tok.text))
        if tok.kind == "deriv":
            self._advance()
            unknown, letters = tok.text.split("_", 1)
            return DerivAtom(unknown, Counter(letters).items())
        if tok.kind == "ident":
            self._advance()
            name = tok.text
            if self.cur.kind == "(":
                self._advance()
                arg = self.expr()
                self._expect(")")
                return self._call(name, arg, tok.pos)
            return Var(name) if name in self.vars else Param(name)
        if tok.kind == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        raise ExprSyntaxError(
            f"expected expression, found {tok.text or 'end of input'!r}",
            tok.pos, frozenset({"number", "identifier", "(", "-"}),
        )

    def _call(self, name: str, arg: Expr, pos: int) -> Expr:
        if name in FUNCTIONS:
            return Unary(name, arg)
        if len(name) > 1 and name[0] == "D" and name[1:].islower() and name[1:].isalpha():
            return DerivGroup(Counter(name[1:]).items(), arg)
        raise ExprSyntaxError(
            f"unknown function {name!r}", pos, frozenset(FUNCTIONS) | {"Dx(...)"} ,
        )


def parse_expr(text: str, var_names: Optional[frozenset[str]] = None) -> Expr:
    """Parse expression text; names in ``var_names`` (default ``{x, t}``)
    become variables, all other identifiers become parameters."""
    names = DEFAULT_VARS if var_names is None else frozenset(var_names)
    return _Parser(text, names).parse()


def parse_rational(text: str) -> Fraction:
    """Parse ``p``, ``p/q`` or a decimal literal as an exact rational."""
    text = text.strip()
    m = re.fullmatch(r"(-?\d+(?:\.\d+)?)(?:\s*/\s*(-?\d+))?", text)
    if not m:
        raise ExprSyntaxError(f"bad rational {text!r}", 0, frozenset({"number"}))
    value = Fraction(m.group(1))
    if m.group(2) is not None:
        q = Fraction(m.group(2))
        if q == 0:
            raise ExprSyntaxError("zero denominator", 0, frozenset({"number"}))
        value /= q
    return value
