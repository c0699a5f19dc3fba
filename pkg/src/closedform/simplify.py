"""Simplification, the zero certificate, and parameter resolution.

Acceptance of a candidate solution rests entirely on the exact
certificate: an expression is accepted as identically zero only when its
canonical form is the literal constant 0.  Numeric evaluation is used
solely for *rejection* (producing a nonzero witness); a residual that is
neither certified nor witnessed stays Undecided and is never treated as
a pass.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .canonical import (
    Mono,
    P_ONE,
    Poly,
    RF,
    _mono_sorted,
    canon,
    p_add,
    p_mul,
    p_scale,
    rf_to_expr,
)
from .expr import (
    Const,
    Expr,
    Param,
    Var,
    eval_numeric,
    free_symbols,
    substitute,
)

WITNESS_POINTS = 64
WITNESS_TOL = 1e-6
TRIG_COND_LIMIT = 1e7  # sin/cos beyond this carry too few digits to witness
SAMPLE_LO, SAMPLE_HI = 0.3, 2.7
MAX_UNKNOWNS = 3
MAX_DEGREE = 2


@dataclass(frozen=True)
class CanonicalForm:
    """Numerator/denominator pair over the generator set; see canonical.py."""

    num: Poly
    den: Poly

    @classmethod
    def of(cls, e: Expr) -> "CanonicalForm":
        rf = canon(e)
        return cls(rf.num, rf.den)

    def to_expr(self) -> Expr:
        return rf_to_expr(RF(self.num, self.den))


class ZeroKind(enum.Enum):
    CERTIFIED_ZERO = "certified_zero"
    WITNESS_NONZERO = "witness_nonzero"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class ZeroVerdict:
    kind: ZeroKind
    point: Optional[dict[str, float]] = None
    value: Optional[float] = None

    @property
    def is_certified_zero(self) -> bool:
        return self.kind is ZeroKind.CERTIFIED_ZERO


CERTIFIED_ZERO = ZeroVerdict(ZeroKind.CERTIFIED_ZERO)
UNDECIDED = ZeroVerdict(ZeroKind.UNDECIDED)


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` from its canonical form; idempotent and exact."""
    return rf_to_expr(canon(e))


def is_zero_expr(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def draw_point(names, rng: random.Random) -> dict[str, float]:
    return {
        n: (1 if rng.random() < 0.5 else -1) * rng.uniform(SAMPLE_LO, SAMPLE_HI)
        for n in names
    }


def zero_certificate(e: Expr, rng: Optional[random.Random] = None) -> ZeroVerdict:
    """CertifiedZero iff the canonical form is literally 0; otherwise try
    to produce a numeric witness, else Undecided."""
    simplified = simplify(e)
    if is_zero_expr(simplified):
        return CERTIFIED_ZERO
    rng = rng or random.Random(0)
    vs, ps = free_symbols(simplified)
    names = sorted(vs | ps)
    tried = 0
    attempts = 0
    while tried < WITNESS_POINTS and attempts < 4 * WITNESS_POINTS:
        attempts += 1
        point = draw_point(names, rng)
        value = eval_numeric(
            simplified, point, min_abs_den=1e-9, max_trig_arg=TRIG_COND_LIMIT
        )
        if value is None:
            continue  # singular or out of domain: discard and redraw
        tried += 1
        if abs(value) > WITNESS_TOL:
            return ZeroVerdict(ZeroKind.WITNESS_NONZERO, point, value)
    return UNDECIDED


# ---------------------------------------------------------------------------
# Undetermined coefficients
# ---------------------------------------------------------------------------

def _split_mono(m: Mono, unknowns: set[str]) -> tuple[Mono, Mono, Mono]:
    """Split a monomial into (unknown params, coefficient symbols, group key).

    The group key consists of variables, kernels, and derivative atoms:
    the monomials over which an identity must hold for *all* values.
    Non-fresh parameters join the coefficient ring.
    """
    fresh, coeff, group = [], [], []
    for g, n in m:
        if isinstance(g, Param):
            (fresh if g.name in unknowns else coeff).append((g, n))
        elif isinstance(g, Var):
            group.append((g, n))
        else:
            group.append((g, n))  # kernels and atoms are opaque
    return _mono_sorted(fresh), _mono_sorted(coeff), _mono_sorted(group)


def _collect_equations(num: Poly, unknowns: set[str]) -> list[Poly]:
    """Group the numerator by var/kernel monomials; each group's
    coefficient (a polynomial in the unknowns over the remaining
    parameters) must vanish."""
    groups: dict[Mono, Poly] = {}
    for m, c in num.items():
        fresh, coeff, key = _split_mono(m, unknowns)
        poly = groups.setdefault(key, {})
        mono = _mono_sorted(fresh + coeff)
        s = poly.get(mono, Fraction(0)) + c
        if s:
            poly[mono] = s
        else:
            poly.pop(mono, None)
    return [p for p in groups.values() if p]


def _unknown_degree(p: Poly, unknowns: set[str]) -> int:
    """Largest power of any single unknown (quadratic capability limit)."""
    deg = 0
    for m in p:
        for g, n in m:
            if isinstance(g, Param) and g.name in unknowns:
                deg = max(deg, n)
    return deg


def _unknowns_in(p: Poly, unknowns: set[str]) -> set[str]:
    out = set()
    for m in p:
        for g, _ in m:
            if isinstance(g, Param) and g.name in unknowns:
                out.add(g.name)
    return out


def _as_poly_in(p: Poly, name: str) -> dict[int, Poly]:
    """View p as a univariate polynomial in the unknown ``name``."""
    out: dict[int, Poly] = {}
    for m, c in p.items():
        deg = 0
        rest = []
        for g, n in m:
            if isinstance(g, Param) and g.name == name:
                deg = n
            else:
                rest.append((g, n))
        coeff = out.setdefault(deg, {})
        rm = _mono_sorted(rest)
        s = coeff.get(rm, Fraction(0)) + c
        if s:
            coeff[rm] = s
        else:
            coeff.pop(rm, None)
    return {d: c for d, c in out.items() if c}


def _subst_unknown(p: Poly, name: str, val_num: Poly, val_den: Poly) -> Poly:
    """Substitute name := val_num/val_den and clear the denominator."""
    u = _as_poly_in(p, name)
    top = max(u)
    from .canonical import p_pow

    out: Poly = {}
    for d, coeff in u.items():
        term = p_mul(coeff, p_mul(p_pow(val_num, d), p_pow(val_den, top - d)))
        out = p_add(out, term)
    return out


def _mono_unknown_content(eqs_poly: Poly, unknowns: set[str]) -> Mono:
    """Common unknown-monomial factor of all terms (for case splitting)."""
    common: Optional[dict[Expr, int]] = None
    for m in eqs_poly:
        d = {g: n for g, n in m if isinstance(g, Param) and g.name in unknowns}
        if common is None:
            common = d
        else:
            common = {g: min(n, d.get(g, 0)) for g, n in common.items() if d.get(g, 0)}
        if not common:
            return ()
    return _mono_sorted(common.items()) if common else ()


def _sqrt_fraction(c: Fraction) -> Optional[Fraction]:
    import math

    if c < 0:
        return None
    rn = math.isqrt(c.numerator)
    rd = math.isqrt(c.denominator)
    if rn * rn == c.numerator and rd * rd == c.denominator:
        return Fraction(rn, rd)
    return None


class _Unsolvable(Exception):
    pass


def _solve_system(
    eqs: list[Poly], unknowns: list[str], depth: int = 0
) -> Optional[dict[str, RF]]:
    """Find rational-expression values for (a subset of) the unknowns
    making every equation vanish identically.  Linear elimination plus
    content-factor case splits and exact quadratic roots; returns None
    when no branch closes the system."""
    if depth > 12:
        return None
    eqs = [e for e in eqs if e]
    for e in eqs:
        if not _unknowns_in(e, set(unknowns)):
            return None  # nonzero constraint with no unknown left
    if not eqs:
        return {}
    uset = set(unknowns)

    # linear elimination: u appears to degree 1 with an unknown-free coefficient
    for order_name in unknowns:
        for e in eqs:
            u = _as_poly_in(e, order_name)
            if max(u) != 1 or order_name not in _unknowns_in(e, uset):
                continue
            alpha = u[1]
            if _unknowns_in(alpha, uset):
                continue
            beta = u.get(0, {})
            val_num, val_den = p_scale(beta, -1), alpha
            rest = [
                _subst_unknown(q, order_name, val_num, val_den)
                for q in eqs
                if q is not e
            ]
            sub = _solve_system(rest, [n for n in unknowns if n != order_name], depth + 1)
            if sub is None:
                continue
            from .canonical import make_rf

            value = make_rf(
                _subst_rf_poly(val_num, sub), _subst_rf_poly(val_den, sub)
            )
            sub[order_name] = value
            return sub

    # content split: factor out a common unknown monomial (e.g. A*(c-a))
    for e in eqs:
        content = _mono_unknown_content(e, uset)
        if not content:
            continue
        from .canonical import p_divexact

        quotient = p_divexact(e, {content: Fraction(1)})
        rest = [q for q in eqs if q is not e]
        # prefer the branch that keeps the content parameters alive
        sub = _solve_system(rest + [quotient], unknowns, depth + 1)
        if sub is not None:
            return sub
        for g, _ in content:
            name = g.name
            zeroed = [
                _subst_unknown(q, name, {}, dict(P_ONE)) for q in eqs
            ]
            sub = _solve_system(zeroed, [n for n in unknowns if n != name], depth + 1)
            if sub is not None:
                sub[name] = RF({}, dict(P_ONE))
                return sub
        return None

    # exact quadratic in a single unknown with rational coefficients
    for e in eqs:
        present = _unknowns_in(e, uset)
        if len(present) != 1:
            continue
        (name,) = present
        u = _as_poly_in(e, name)
        if max(u) != 2:
            continue

        def _const(p: Poly) -> Optional[Fraction]:
            if not p:
                return Fraction(0)
            if len(p) == 1 and () in p:
                return p[()]
            return None

        a2, a1, a0 = _const(u.get(2, {})), _const(u.get(1, {})), _const(u.get(0, {}))
        if a2 is None or a1 is None or a0 is None or a2 == 0:
            continue
        disc = a1 * a1 - 4 * a2 * a0
        root = _sqrt_fraction(disc)
        if root is None:
            return None
        candidates = sorted(
            {(-a1 + root) / (2 * a2), (-a1 - root) / (2 * a2)},
            key=lambda r: (r == 0, abs(r - 1), abs(r)),
        )
        for rv in candidates:
            rest = [
                _subst_unknown(q, name, p_scale(dict(P_ONE), rv), dict(P_ONE))
                for q in eqs
            ]
            sub = _solve_system(rest, [n for n in unknowns if n != name], depth + 1)
            if sub is not None:
                sub[name] = RF(p_scale(dict(P_ONE), rv), dict(P_ONE))
                return sub
        return None

    return None


def _subst_rf_poly(p: Poly, assignment: dict[str, RF]) -> Poly:
    """Substitute already-resolved unknowns into a value polynomial.

    Values are unknown-free by construction once the recursion returns,
    so plain numerator substitution with denominator clearing suffices.
    """
    out = p
    for name, rf in assignment.items():
        if name in _unknowns_in(out, {name}):
            out = _subst_unknown(out, name, rf.num, rf.den)
    return out


def resolve_parameters(
    residual: Expr,
    fresh: set[str],
    rng: Optional[random.Random] = None,
    prefer: Optional[list[str]] = None,
) -> Optional[dict[str, Expr]]:
    """Method of undetermined coefficients.

    Collects the canonical numerator's coefficients per var/kernel
    monomial (polynomials in the fresh parameters over the remaining
    symbols) and solves coefficient = 0 for all of them.  Returns an
    assignment mapping a subset of ``fresh`` to expressions in the other
    symbols, validated by the zero certificate, or None when the system
    is inconsistent, out of reach (more than 3 unknowns or degree > 2 in
    the unknowns), or the post-check fails.
    """
    rf = canon(residual)
    if rf.is_zero():
        return {}
    eqs = _collect_equations(rf.num, set(fresh))
    participating = set()
    for e in eqs:
        participating |= _unknowns_in(e, set(fresh))
    if len(participating) > MAX_UNKNOWNS:
        return None
    if any(_unknown_degree(e, set(fresh)) > MAX_DEGREE for e in eqs):
        return None
    order = [n for n in (prefer or []) if n in participating]
    order += sorted(participating - set(order))
    solution = _solve_system(eqs, order)
    if solution is None:
        return None
    assignment = {name: rf_to_expr(value) for name, value in solution.items()}
    substituted = substitute(
        residual, {Param(n): e for n, e in assignment.items()}
    )
    if not zero_certificate(substituted, rng).is_certified_zero:
        return None
    return assignment
