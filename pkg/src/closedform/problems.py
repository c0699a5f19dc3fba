"""Problem files and the solution exchange format.

Problem files are flat key-value text (``#`` comments)::

    name = heat-exp
    unknown = u(x,t)
    pde = u_t - a*u_xx = 0
    coefficients = a
    time = t
    ic = exp(x)
    ref = A:1, B:1
    budget = 200000
    max_insertions = 2
    expected = exp(x + a*t)        # optional handbook solution

Solutions are exchanged as JSON; the expression is serialized both as
infix text and as a prefix s-expression for unambiguous machine parsing.
Rational numbers are serialized as "p/q" strings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import ExprSyntaxError, SchemaError, SemanticError
from .expr import (
    Binary,
    Const,
    DerivAtom,
    DerivGroup,
    Expr,
    Param,
    Unary,
    Var,
    contains_deriv,
    format_expr,
    free_symbols,
    sub,
)
from .parse import parse_expr, parse_rational

DEFAULT_BUDGET = 200_000
DEFAULT_MAX_INSERTIONS = 2

_REQUIRED_KEYS = ("name", "unknown", "pde", "time", "ic")


@dataclass(frozen=True)
class PdeProblem:
    """A governing operator N[u]=0 with its initial condition."""

    name: str
    unknown: str
    variables: tuple[str, ...]
    operator_lhs: Expr
    coefficients: tuple[str, ...]
    time_var: str
    ic: Expr
    ref_values: dict[str, Fraction]
    budget: int = DEFAULT_BUDGET
    max_insertions_per_stage: int = DEFAULT_MAX_INSERTIONS
    expected: Optional[Expr] = None

    @property
    def var_set(self) -> frozenset[str]:
        return frozenset(self.variables)

    def with_refs(self, extra: dict[str, Fraction]) -> "PdeProblem":
        merged = dict(self.ref_values)
        merged.update(extra)
        return replace(self, ref_values=merged)


@dataclass(frozen=True)
class FreeParam:
    name: str
    ref: Fraction


@dataclass(frozen=True)
class Verification:
    pde_pass: bool
    ic_pass: bool


@dataclass(frozen=True)
class Stats:
    candidates_evaluated: int
    stages: int
    wall_time_ms: int


@dataclass(frozen=True)
class SolutionRecord:
    problem: str
    expression: Expr
    expression_text: str
    variables: tuple[str, ...]
    free_params: tuple[FreeParam, ...]
    resolved_params: dict[str, Expr]
    verification: Verification
    stats: Stats


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

def _split_kv(raw: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(raw.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise SchemaError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _parse_unknown(text: str) -> tuple[str, tuple[str, ...]]:
    m = re.fullmatch(r"([A-Za-z]+)\(([A-Za-z]+(?:\s*,\s*[A-Za-z]+)*)\)", text.strip())
    if not m:
        raise SchemaError(f"bad unknown {text!r}; expected e.g. u(x,t)")
    name = m.group(1)
    variables = tuple(v.strip() for v in m.group(2).split(","))
    if len(variables) != len(set(variables)):
        raise SemanticError(f"repeated variable in unknown {text!r}")
    if len(variables) != 2:
        raise SemanticError("exactly two independent variables are supported")
    return name, variables


def parse_problem(data: bytes | str, default_name: str = "") -> PdeProblem:
    raw = data.decode("utf-8") if isinstance(data, bytes) else data
    kv = _split_kv(raw)
    missing = [k for k in _REQUIRED_KEYS if k not in kv and not (k == "name" and default_name)]
    if missing:
        raise SchemaError(f"missing keys: {', '.join(missing)}")
    name = kv.get("name", default_name)
    unknown, variables = _parse_unknown(kv["unknown"])
    var_set = frozenset(variables)
    time_var = kv["time"]
    if time_var not in variables:
        raise SemanticError(f"time variable {time_var!r} not among {variables}")

    pde_text = kv["pde"]
    if pde_text.count("=") != 1:
        raise SchemaError("pde must have the form 'lhs = rhs'")
    lhs_text, rhs_text = pde_text.split("=")
    lhs = parse_expr(lhs_text, var_set)
    rhs = parse_expr(rhs_text, var_set)
    operator_lhs = lhs if rhs == Const(0) else sub(lhs, rhs)

    coefficients = tuple(
        c.strip() for c in kv.get("coefficients", "").split(",") if c.strip()
    )
    ic = parse_expr(kv["ic"], var_set)
    ic_vars, ic_params = free_symbols(ic)
    if time_var in ic_vars:
        raise SemanticError("initial condition must not mention the time variable")
    if unknown in ic_params or contains_deriv(ic):
        raise SemanticError("initial condition must not mention the unknown")

    _, op_params = free_symbols(operator_lhs)
    undeclared = op_params - set(coefficients) - {unknown}
    if undeclared:
        raise SemanticError(
            f"parameters {sorted(undeclared)} in pde are not listed as coefficients"
        )

    ref_values: dict[str, Fraction] = {}
    if kv.get("ref"):
        for piece in kv["ref"].split(","):
            piece = piece.strip()
            if not piece:
                continue
            if ":" not in piece:
                raise SchemaError(f"bad ref entry {piece!r}; expected name:value")
            pname, pval = piece.split(":", 1)
            pname = pname.strip()
            if pname in var_set:
                raise SemanticError(f"ref {pname!r} names a variable")
            ref_values[pname] = parse_rational(pval)

    budget = int(kv.get("budget", DEFAULT_BUDGET))
    max_ins = int(kv.get("max_insertions", DEFAULT_MAX_INSERTIONS))
    if budget <= 0 or max_ins < 1:
        raise SemanticError("budget must be positive and max_insertions >= 1")

    expected = parse_expr(kv["expected"], var_set) if kv.get("expected") else None

    return PdeProblem(
        name=name,
        unknown=unknown,
        variables=variables,
        operator_lhs=operator_lhs,
        coefficients=coefficients,
        time_var=time_var,
        ic=ic,
        ref_values=ref_values,
        budget=budget,
        max_insertions_per_stage=max_ins,
        expected=expected,
    )


def load_problem(path) -> PdeProblem:
    from pathlib import Path

    p = Path(path)
    return parse_problem(p.read_bytes(), default_name=p.stem)


# ---------------------------------------------------------------------------
# S-expressions
# ---------------------------------------------------------------------------

_SEXP_BIN = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
_SEXP_BIN_INV = {v: k for k, v in _SEXP_BIN.items()}
_SEXP_UNARY = ("neg", "exp", "log", "sin", "cos", "sqrt")


def to_sexp(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, DerivAtom):
        return format_expr(e)
    if isinstance(e, Unary):
        return f"({e.op} {to_sexp(e.child)})"
    if isinstance(e, Binary):
        return f"({_SEXP_BIN[e.op]} {to_sexp(e.left)} {to_sexp(e.right)})"
    if isinstance(e, DerivGroup):
        letters = "".join(v * n for v, n in e.orders)
        return f"(D{letters} {to_sexp(e.child)})"
    raise SchemaError(f"cannot serialize {type(e).__name__}")


def from_sexp(text: str, var_names: frozenset[str]) -> Expr:
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    pos = 0

    def parse() -> Expr:
        nonlocal pos
        if pos >= len(tokens):
            raise SchemaError("truncated s-expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            head = tokens[pos]
            pos += 1
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(parse())
            if pos >= len(tokens):
                raise SchemaError("unbalanced s-expression")
            pos += 1  # consume ')'
            return build(head, args)
        if tok == ")":
            raise SchemaError("unexpected ')'")
        return leaf(tok)

    def build(head: str, args: list[Expr]) -> Expr:
        if head in _SEXP_BIN_INV and len(args) == 2:
            return Binary(_SEXP_BIN_INV[head], args[0], args[1])
        if head in _SEXP_UNARY and len(args) == 1:
            return Unary(head, args[0])
        if head.startswith("D") and len(args) == 1 and head[1:].isalpha():
            from collections import Counter

            return DerivGroup(Counter(head[1:]).items(), args[0])
        raise SchemaError(f"bad s-expression head {head!r} with {len(args)} args")

    def leaf(tok: str) -> Expr:
        if re.fullmatch(r"-?\d+(/\d+)?", tok):
            return Const(Fraction(tok))
        if "_" in tok:
            from collections import Counter

            unknown, letters = tok.split("_", 1)
            return DerivAtom(unknown, Counter(letters).items())
        if not tok.isalpha():
            raise SchemaError(f"bad s-expression atom {tok!r}")
        return Var(tok) if tok in var_names else Param(tok)

    e = parse()
    if pos != len(tokens):
        raise SchemaError("trailing tokens in s-expression")
    return e


# ---------------------------------------------------------------------------
# Solution exchange
# ---------------------------------------------------------------------------

def _frac_str(f: Fraction) -> str:
    return str(f)


def export_solution(rec: SolutionRecord) -> bytes:
    doc = {
        "problem": rec.problem,
        "expression_text": rec.expression_text,
        "expression_sexp": to_sexp(rec.expression),
        "variables": list(rec.variables),
        "free_params": [
            {"name": fp.name, "ref": _frac_str(fp.ref)} for fp in rec.free_params
        ],
        "resolved_params": {
            name: format_expr(value)
            for name, value in sorted(rec.resolved_params.items())
        },
        "verification": {
            "pde_pass": rec.verification.pde_pass,
            "ic_pass": rec.verification.ic_pass,
        },
        "stats": {
            "candidates_evaluated": rec.stats.candidates_evaluated,
            "stages": rec.stats.stages,
            "wall_time_ms": rec.stats.wall_time_ms,
        },
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def import_solution(data: bytes | str) -> SolutionRecord:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"bad solution JSON: {exc}") from exc
    try:
        variables = tuple(doc["variables"])
        var_set = frozenset(variables)
        expression = from_sexp(doc["expression_sexp"], var_set)
        free_params = tuple(
            FreeParam(fp["name"], parse_rational(fp["ref"]))
            for fp in doc["free_params"]
        )
        resolved = {
            name: parse_expr(text, var_set)
            for name, text in doc["resolved_params"].items()
        }
        verification = Verification(
            bool(doc["verification"]["pde_pass"]),
            bool(doc["verification"]["ic_pass"]),
        )
        stats = Stats(
            int(doc["stats"]["candidates_evaluated"]),
            int(doc["stats"]["stages"]),
            int(doc["stats"]["wall_time_ms"]),
        )
        return SolutionRecord(
            problem=doc["problem"],
            expression=expression,
            expression_text=doc["expression_text"],
            variables=variables,
            free_params=free_params,
            resolved_params=resolved,
            verification=verification,
            stats=stats,
        )
    except (KeyError, TypeError, ExprSyntaxError) as exc:
        raise SchemaError(f"bad solution record: {exc}") from exc
