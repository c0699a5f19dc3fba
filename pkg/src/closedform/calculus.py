"""Symbolic partial differentiation and PDE residual construction.

Derivative atoms (``u_xx``) and group derivatives (``Dxx(...)``) appear
only in governing operators; they acquire meaning here when a concrete
candidate is substituted for the unknown.
"""

from __future__ import annotations

from .errors import UnsupportedFunctionError
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
)
from .simplify import simplify

__all__ = ["DerivAtom", "DerivGroup", "differentiate", "substitute_unknown", "residual"]

_ZERO = Const(0)
_ONE = Const(1)


def differentiate(e: Expr, v: str) -> Expr:
    """Exact partial derivative with respect to variable ``v``, simplified."""
    if contains_deriv(e):
        raise UnsupportedFunctionError(
            "cannot differentiate an expression containing derivative atoms"
        )
    return simplify(_diff(e, v))


def _diff(e: Expr, v: str) -> Expr:
    if isinstance(e, Const) or isinstance(e, Param):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == v else _ZERO
    if isinstance(e, Unary):
        c = e.child
        dc = _diff(c, v)
        if e.op == "neg":
            return Unary("neg", dc)
        if e.op == "exp":
            return Binary("mul", e, dc)
        if e.op == "log":
            return Binary("div", dc, c)
        if e.op == "sin":
            return Binary("mul", Unary("cos", c), dc)
        if e.op == "cos":
            return Unary("neg", Binary("mul", Unary("sin", c), dc))
        if e.op == "sqrt":
            return Binary("div", dc, Binary("mul", Const(2), e))
    if isinstance(e, Binary):
        l, r = e.left, e.right
        if e.op == "add":
            return Binary("add", _diff(l, v), _diff(r, v))
        if e.op == "sub":
            return Binary("sub", _diff(l, v), _diff(r, v))
        if e.op == "mul":
            return Binary(
                "add",
                Binary("mul", _diff(l, v), r),
                Binary("mul", l, _diff(r, v)),
            )
        if e.op == "div":
            num = Binary(
                "sub",
                Binary("mul", _diff(l, v), r),
                Binary("mul", l, _diff(r, v)),
            )
            return Binary("div", num, Binary("pow", r, Const(2)))
        if e.op == "pow":
            expo = _const_exponent(r)
            if expo is None:
                raise UnsupportedFunctionError(
                    "pow with a non-constant exponent is outside the "
                    "differentiation table"
                )
            if expo == 0:
                return _ZERO
            # d(l^q) = q * l^(q-1) * dl
            return Binary(
                "mul",
                Binary("mul", Const(expo), Binary("pow", l, Const(expo - 1))),
                _diff(l, v),
            )
    raise UnsupportedFunctionError(f"no differentiation rule for {type(e).__name__}")


def _const_exponent(e: Expr):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Unary) and e.op == "neg":
        inner = _const_exponent(e.child)
        return None if inner is None else -inner
    if isinstance(e, Binary) and e.op == "div":
        a, b = _const_exponent(e.left), _const_exponent(e.right)
        if a is None or b is None or b == 0:
            return None
        return a / b
    return None


def _diff_multi(e: Expr, orders: tuple[tuple[str, int], ...]) -> Expr:
    out = e
    for v, n in orders:
        for _ in range(n):
            out = differentiate(out, v)
    return out


def substitute_unknown(operator_lhs: Expr, candidate: Expr, problem) -> Expr:
    """Replace the unknown and its derivative atoms by the candidate.

    Group derivatives are applied after their body has been substituted,
    so nested operator terms like ``Dxx(u_t + u*u_x)`` lower correctly.
    """
    if contains_deriv(candidate):
        raise UnsupportedFunctionError("candidate must not contain derivative atoms")
    unknown = problem.unknown

    def walk(e: Expr) -> Expr:
        if isinstance(e, DerivAtom):
            if e.unknown != unknown:
                raise UnsupportedFunctionError(
                    f"derivative atom of {e.unknown!r}, expected {unknown!r}"
                )
            return _diff_multi(candidate, e.orders)
        if isinstance(e, DerivGroup):
            return _diff_multi(walk(e.child), e.orders)
        if isinstance(e, Param) and e.name == unknown:
            return candidate
        if isinstance(e, Binary):
            return Binary(e.op, walk(e.left), walk(e.right))
        if isinstance(e, Unary):
            return Unary(e.op, walk(e.child))
        return e

    return walk(operator_lhs)


def residual(problem, candidate: Expr) -> Expr:
    """Simplified result of substituting the candidate into the governing
    operator; identically zero iff the candidate solves the PDE."""
    return simplify(substitute_unknown(problem.operator_lhs, candidate, problem))
