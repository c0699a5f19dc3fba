"""Immutable expression trees over exact rational constants.

Node kinds: rational constants, variables, named parameters, unary and
binary operators, plus two leaf-like forms that only appear in governing
operators: derivative atoms (``u_xx``) and group derivatives (``Dxx(...)``).
Trees are immutable, structurally hashable, and shareable across workers.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .errors import InvalidPositionError

UNARY_OPS = ("neg", "exp", "log", "sin", "cos", "sqrt")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")

#: A position is the path of steps from the root to a node.
PositionId = tuple[str, ...]

ROOT: PositionId = ()


class Expr:
    """Base class for all expression nodes. Instances are immutable."""

    __slots__ = ("_hash",)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:  # structural, order-sensitive
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._key() == other._key()

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def _key(self):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {format_expr(self)}>"


class Const(Expr):
    """Exact rational constant. Fraction keeps gcd(p,q)=1 and q>0."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value if isinstance(value, Fraction) else Fraction(value)
        self._hash = hash(("Const", self.value))

    def _key(self):
        return self.value


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("Var", name))

    def _key(self):
        return self.name


class Param(Expr):
    """Named symbolic parameter: a PDE coefficient or a free solution parameter."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("Param", name))

    def _key(self):
        return self.name


class Unary(Expr):
    __slots__ = ("op", "child")

    def __init__(self, op: str, child: Expr):
        assert op in UNARY_OPS, op
        self.op = op
        self.child = child
        self._hash = hash(("Unary", op, child._hash))

    def _key(self):
        return (self.op, self.child)


class Binary(Expr):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: Expr, right: Expr):
        assert op in BINARY_OPS, op
        self.op = op
        self.left = left
        self.right = right
        self._hash = hash(("Binary", op, left._hash, right._hash))

    def _key(self):
        return (self.op, self.left, self.right)


class DerivAtom(Expr):
    """Partial derivative of the unknown, kept opaque at problem level.

    ``orders`` is a sorted multiset ``((var, count), ...)``; mixed partials
    commute, so ``u_xt`` and ``u_tx`` construct equal atoms.
    """

    __slots__ = ("unknown", "orders")

    def __init__(self, unknown: str, orders: Iterable[tuple[str, int]]):
        self.unknown = unknown
        self.orders = tuple(sorted(orders))
        assert all(n >= 1 for _, n in self.orders) and self.orders
        self._hash = hash(("DerivAtom", unknown, self.orders))

    def _key(self):
        return (self.unknown, self.orders)


class DerivGroup(Expr):
    """Derivative of a parenthesized group, e.g. ``Dxx(u_t + u*u_x)``.

    Lowered to actual differentiation only after the unknown has been
    substituted by a concrete candidate.
    """

    __slots__ = ("orders", "child")

    def __init__(self, orders: Iterable[tuple[str, int]], child: Expr):
        self.orders = tuple(sorted(orders))
        assert all(n >= 1 for _, n in self.orders) and self.orders
        self.child = child
        self._hash = hash(("DerivGroup", self.orders, child._hash))

    def _key(self):
        return (self.orders, self.child)


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------

def const(value) -> Const:
    return Const(value)


ZERO = Const(0)
ONE = Const(1)


def add(a: Expr, b: Expr) -> Expr:
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    return Binary("div", a, b)


def power(a: Expr, b: Expr) -> Expr:
    return Binary("pow", a, b)


def neg(a: Expr) -> Expr:
    return Unary("neg", a)


def exp(a: Expr) -> Expr:
    return Unary("exp", a)


def log(a: Expr) -> Expr:
    return Unary("log", a)


def sin(a: Expr) -> Expr:
    return Unary("sin", a)


def cos(a: Expr) -> Expr:
    return Unary("cos", a)


def sqrt(a: Expr) -> Expr:
    return Unary("sqrt", a)


# ---------------------------------------------------------------------------
# Generic traversal
# ---------------------------------------------------------------------------

def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, (Unary, DerivGroup)):
        return (e.child,)
    return ()


def with_children(e: Expr, kids: tuple[Expr, ...]) -> Expr:
    if isinstance(e, Binary):
        return Binary(e.op, kids[0], kids[1])
    if isinstance(e, Unary):
        return Unary(e.op, kids[0])
    if isinstance(e, DerivGroup):
        return DerivGroup(e.orders, kids[0])
    assert not kids
    return e


def structural_eq(a: Expr, b: Expr) -> bool:
    """Exact tree equality; ``x+1`` and ``1+x`` are distinct."""
    return a == b


def node_count(e: Expr) -> int:
    return 1 + sum(node_count(c) for c in children(e))


def positions(e: Expr) -> list[PositionId]:
    """All node positions of ``e`` in preorder; every one is an insertion site."""
    out: list[PositionId] = []

    def walk(node: Expr, path: PositionId):
        out.append(path)
        kids = children(node)
        if isinstance(node, Binary):
            walk(node.left, path + ("left",))
            walk(node.right, path + ("right",))
        elif len(kids) == 1:
            walk(kids[0], path + ("only",))

    walk(e, ROOT)
    return out


def subtree_at(e: Expr, pos: PositionId) -> Expr:
    node = e
    for step in pos:
        if step == "left" and isinstance(node, Binary):
            node = node.left
        elif step == "right" and isinstance(node, Binary):
            node = node.right
        elif step == "only" and len(children(node)) == 1:
            node = children(node)[0]
        else:
            raise InvalidPositionError(f"position {pos} invalid at step {step!r}")
    return node


def replace_at(e: Expr, pos: PositionId, new: Expr) -> Expr:
    if not pos:
        return new
    step, rest = pos[0], pos[1:]
    if step == "left" and isinstance(e, Binary):
        return Binary(e.op, replace_at(e.left, rest, new), e.right)
    if step == "right" and isinstance(e, Binary):
        return Binary(e.op, e.left, replace_at(e.right, rest, new))
    if step == "only" and len(children(e)) == 1:
        return with_children(e, (replace_at(children(e)[0], rest, new),))
    raise InvalidPositionError(f"position {pos} invalid at step {step!r}")


def free_symbols(e: Expr) -> tuple[set[str], set[str]]:
    """Return (variable names, parameter names) occurring in ``e``."""
    vs: set[str] = set()
    ps: set[str] = set()

    def walk(node: Expr):
        if isinstance(node, Var):
            vs.add(node.name)
        elif isinstance(node, Param):
            ps.add(node.name)
        else:
            for c in children(node):
                walk(c)

    walk(e)
    return vs, ps


def contains_deriv(e: Expr) -> bool:
    if isinstance(e, (DerivAtom, DerivGroup)):
        return True
    return any(contains_deriv(c) for c in children(e))


def substitute(e: Expr, mapping: Mapping[Expr, Expr]) -> Expr:
    """Replace leaf nodes (Var/Param/Const keys) by expressions."""
    if e in mapping:
        return mapping[e]
    kids = children(e)
    if not kids:
        return e
    return with_children(e, tuple(substitute(c, mapping) for c in kids))


# ---------------------------------------------------------------------------
# Numeric evaluation
# ---------------------------------------------------------------------------

def eval_numeric(
    e: Expr,
    bindings: Mapping[str, float],
    min_abs_den: float = 0.0,
    max_trig_arg: float = math.inf,
) -> Optional[float]:
    """IEEE double evaluation; None on any evaluation-domain violation.

    Division by zero, log of a non-positive value, sqrt of a negative
    value, overflow, and derivative atoms all yield None rather than an
    exception.  ``min_abs_den`` widens the division guard and
    ``max_trig_arg`` bounds sin/cos arguments; both let callers discard
    sample points where double precision cannot resolve the value.
    """
    try:
        v = _eval(e, bindings, min_abs_den, max_trig_arg)
    except (OverflowError, ValueError, ZeroDivisionError, KeyError):
        return None
    if v is None or not math.isfinite(v):
        return None
    return v


def _eval(e: Expr, b: Mapping[str, float], md: float, mt: float) -> Optional[float]:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, (Var, Param)):
        return float(b[e.name])
    if isinstance(e, Unary):
        c = _eval(e.child, b, md, mt)
        if c is None:
            return None
        if e.op == "neg":
            return -c
        if e.op == "exp":
            return math.exp(c)
        if e.op == "log":
            if c <= 0.0:
                return None
            return math.log(c)
        if e.op == "sin":
            if abs(c) > mt:
                return None
            return math.sin(c)
        if e.op == "cos":
            if abs(c) > mt:
                return None
            return math.cos(c)
        if e.op == "sqrt":
            if c < 0.0:
                return None
            return math.sqrt(c)
    if isinstance(e, Binary):
        l = _eval(e.left, b, md, mt)
        r = _eval(e.right, b, md, mt)
        if l is None or r is None:
            return None
        if e.op == "add":
            return l + r
        if e.op == "sub":
            return l - r
        if e.op == "mul":
            return l * r
        if e.op == "div":
            if r == 0.0 or abs(r) < md:
                return None
            return l / r
        if e.op == "pow":
            if l < 0.0:
                # negative base only with integral exponent
                if isinstance(e.right, Const) and e.right.value.denominator == 1:
                    return l ** int(e.right.value)
                return None
            if l == 0.0 and r < 0.0:
                return None
            return l**r
    return None  # DerivAtom / DerivGroup have no numeric value


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5

_BIN_PREC = {"add": _PREC_ADD, "sub": _PREC_ADD, "mul": _PREC_MUL, "div": _PREC_MUL, "pow": _PREC_POW}
_BIN_TOK = {"add": " + ", "sub": " - ", "mul": "*", "div": "/", "pow": "^"}


def format_expr(e: Expr) -> str:
    """Infix form that round-trips through the parser up to canonicalization."""
    return _fmt(e, 0)


def _fmt(e: Expr, ctx: int) -> str:
    if isinstance(e, Const):
        v = e.value
        if v.denominator == 1:
            s = str(v.numerator)
            p = _PREC_NEG if v < 0 else _PREC_ATOM
        else:
            # a fraction reads as a division, regardless of sign
            s = f"{v.numerator}/{v.denominator}"
            p = _PREC_MUL
        return f"({s})" if p < ctx else s
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, DerivAtom):
        letters = "".join(v * n for v, n in e.orders)
        return f"{e.unknown}_{letters}"
    if isinstance(e, DerivGroup):
        letters = "".join(v * n for v, n in e.orders)
        return f"D{letters}({_fmt(e.child, 0)})"
    if isinstance(e, Unary):
        if e.op == "neg":
            s = "-" + _fmt(e.child, _PREC_NEG)
            return f"({s})" if _PREC_NEG < ctx else s
        return f"{e.op}({_fmt(e.child, 0)})"
    assert isinstance(e, Binary)
    p = _BIN_PREC[e.op]
    s = _fmt(e.left, p) + _BIN_TOK[e.op] + _fmt(e.right, p + 1)
    return f"({s})" if p < ctx else s
