"""Independent translation of the exchange formats into sympy.

This package deliberately shares no code with the discovery engine: the
problem file and the solution record's s-expression are re-parsed from
scratch and the residual is rebuilt with sympy's own calculus, so a bug
in the engine's simplifier cannot hide here.
"""

from __future__ import annotations

import re
from fractions import Fraction

import sympy as sp


class MalformedInput(ValueError):
    """Input file missing, unreadable, or structurally invalid."""


# ---------------------------------------------------------------------------
# S-expressions (the only expression form the oracle reads)
# ---------------------------------------------------------------------------

_UNARY = {
    "neg": lambda a: -a,
    "exp": sp.exp,
    "log": sp.log,
    "sin": sp.sin,
    "cos": sp.cos,
    "sqrt": sp.sqrt,
}
_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": lambda a, b: a**b,
}


def sexp_to_sympy(text: str) -> sp.Expr:
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise MalformedInput("truncated s-expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise MalformedInput("truncated s-expression")
            head = tokens[pos]
            pos += 1
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(parse())
            if pos >= len(tokens):
                raise MalformedInput("unbalanced s-expression")
            pos += 1
            if head in _BINARY and len(args) == 2:
                return _BINARY[head](*args)
            if head in _UNARY and len(args) == 1:
                return _UNARY[head](*args)
            raise MalformedInput(f"bad s-expression head {head!r}/{len(args)}")
        if tok == ")":
            raise MalformedInput("unexpected ')'")
        if re.fullmatch(r"-?\d+(/\d+)?", tok):
            return sp.Rational(tok)
        if re.fullmatch(r"[A-Za-z]+", tok):
            return sp.Symbol(tok)
        raise MalformedInput(f"bad s-expression atom {tok!r}")

    out = parse()
    if pos != len(tokens):
        raise MalformedInput("trailing tokens in s-expression")
    return out


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

def parse_problem_file(text: str) -> dict:
    kv: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedInput(f"bad problem line {line!r}")
        key, value = line.split("=", 1)
        kv.setdefault(key.strip(), value.strip())
    for key in ("unknown", "pde", "time", "ic"):
        if key not in kv:
            raise MalformedInput(f"problem file missing {key!r}")
    m = re.fullmatch(r"([A-Za-z]+)\(([A-Za-z ,]+)\)", kv["unknown"])
    if not m:
        raise MalformedInput(f"bad unknown {kv['unknown']!r}")
    kv["_unknown_name"] = m.group(1)
    kv["_variables"] = [v.strip() for v in m.group(2).split(",")]
    return kv


def _expr_locals(variables: list[str]) -> dict:
    loc = {v: sp.Symbol(v) for v in variables}
    loc.update(
        exp=sp.exp, log=sp.log, sin=sp.sin, cos=sp.cos, sqrt=sp.sqrt
    )
    return loc


def _sympify(text: str, loc: dict) -> sp.Expr:
    try:
        return sp.sympify(text.replace("^", "**"), locals=dict(loc))
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise MalformedInput(f"cannot parse expression {text!r}: {exc}") from exc


def ic_to_sympy(problem: dict) -> sp.Expr:
    return _sympify(problem["ic"], _expr_locals(problem["_variables"]))


def residual_for(problem: dict, candidate: sp.Expr) -> sp.Expr:
    """Substitute the candidate into the governing operator.

    Derivative atoms (u_t, u_xx, ...) become sympy derivatives of the
    candidate; group forms Dxx(...) differentiate their already
    substituted body.
    """
    unknown = problem["_unknown_name"]
    variables = problem["_variables"]
    symbols = {v: sp.Symbol(v) for v in variables}
    loc = _expr_locals(variables)
    loc[unknown] = candidate

    pde = problem["pde"]
    for atom in set(re.findall(rf"\b{unknown}_([a-zA-Z]+)\b", pde)):
        wrt = []
        for letter in atom:
            if letter not in symbols:
                raise MalformedInput(f"derivative in unknown variable {letter!r}")
            wrt.append(symbols[letter])
        loc[f"{unknown}_{atom}"] = sp.diff(candidate, *wrt)
    for group in set(re.findall(r"\bD([a-z]+)\(", pde)):
        wrt = [symbols[letter] for letter in group if letter in symbols]
        if len(wrt) != len(group):
            raise MalformedInput(f"group derivative in unknown variable D{group}")
        loc[f"D{group}"] = (lambda w: lambda e: sp.diff(e, *w))(wrt)

    if pde.count("=") != 1:
        raise MalformedInput("pde must be 'lhs = rhs'")
    lhs, rhs = pde.split("=")
    return _sympify(lhs, loc) - _sympify(rhs, loc)


def is_identically_zero(e: sp.Expr) -> bool:
    simplified = sp.simplify(e)
    if simplified == 0:
        return True
    expanded = sp.simplify(sp.powsimp(sp.expand(simplified)))
    return expanded == 0


def parse_ref(value: str) -> sp.Rational:
    try:
        return sp.Rational(Fraction(*map(int, value.split("/"))) if "/" in value else Fraction(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad rational {value!r}") from exc
