"""Law-driven candidate verification and solution equivalence.

A candidate earns fitness 0 iff the PDE residual is certified
identically zero AND the candidate reduces to the initial condition at
t=0 under reference parameter values.  Both checks are exact; an
Undecided certificate never passes.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .calculus import residual
from .canonical import Mono, Poly, canon
from .expr import (
    Binary,
    Const,
    Expr,
    Param,
    Unary,
    Var,
    eval_numeric,
    free_symbols,
    substitute,
)
from .problems import PdeProblem
from .simplify import (
    ZeroKind,
    ZeroVerdict,
    draw_point,
    resolve_parameters,
    zero_certificate,
)

#: reference values tried for fresh parameters during the IC match
IC_MATCH_VALUES = (
    Fraction(0),
    Fraction(1),
    Fraction(-1),
    Fraction(2),
    Fraction(-2),
    Fraction(1, 2),
    Fraction(-1, 2),
)

EQUIV_TRIALS = 32


@dataclass(frozen=True)
class VerificationReport:
    residual_simplified: Expr
    pde_verdict: ZeroVerdict
    ic_pass: bool
    resolved: dict[str, Expr]
    fitness: int
    candidate_final: Expr
    ic_reference_values: dict[str, Fraction] = field(default_factory=dict)


def tidy(e: Expr) -> Expr:
    """Light structure-preserving cleanup after substituting resolved
    parameters: constant folding and neutral element removal only."""
    if isinstance(e, Binary):
        l, r = tidy(e.left), tidy(e.right)
        if isinstance(l, Const) and isinstance(r, Const):
            if e.op == "add":
                return Const(l.value + r.value)
            if e.op == "sub":
                return Const(l.value - r.value)
            if e.op == "mul":
                return Const(l.value * r.value)
            if e.op == "div" and r.value != 0:
                return Const(l.value / r.value)
            if e.op == "pow" and r.value.denominator == 1 and (
                l.value != 0 or r.value >= 0
            ):
                return Const(l.value ** r.value.numerator)
        if e.op == "add":
            if isinstance(l, Const) and l.value == 0:
                return r
            if isinstance(r, Const) and r.value == 0:
                return l
        if e.op == "sub" and isinstance(r, Const) and r.value == 0:
            return l
        if e.op == "sub" and isinstance(l, Const) and l.value == 0:
            return tidy(Unary("neg", r))
        if e.op == "mul":
            for a, b in ((l, r), (r, l)):
                if isinstance(a, Const):
                    if a.value == 0:
                        return Const(0)
                    if a.value == 1:
                        return b
                    if a.value == -1:
                        return tidy(Unary("neg", b))
        if e.op == "div" and isinstance(r, Const) and r.value == 1:
            return l
        if e.op == "pow" and isinstance(r, Const):
            if r.value == 1:
                return l
            if r.value == 0:
                return Const(1)
        return Binary(e.op, l, r)
    if isinstance(e, Unary):
        c = tidy(e.child)
        if e.op == "neg":
            if isinstance(c, Const):
                return Const(-c.value)
            if isinstance(c, Unary) and c.op == "neg":
                return c.child
        return Unary(e.op, c)
    return e


def _ic_check(
    problem: PdeProblem,
    candidate: Expr,
    rng: random.Random,
) -> tuple[bool, dict[str, Fraction]]:
    """Substitute t=0, pin parameters to reference values, and require the
    difference from the initial condition to certify zero.

    Parameters appearing in the initial condition itself stay symbolic on
    both sides (the family must match, not one instance).  Parameters with
    no known reference value are matched over a small rational set; the
    value found becomes their reference value.
    """
    at_zero = substitute(candidate, {Var(problem.time_var): Const(0)})
    _, g_params = free_symbols(problem.ic)
    _, cand_params = free_symbols(at_zero)
    known = {
        name: problem.ref_values[name]
        for name in cand_params
        if name in problem.ref_values and name not in g_params
    }
    unknown = sorted(
        cand_params - set(known) - g_params - set(problem.coefficients)
    )
    base = substitute(at_zero, {Param(n): Const(v) for n, v in known.items()})
    for combo in itertools.product(IC_MATCH_VALUES, repeat=len(unknown)):
        attempt = substitute(
            base, {Param(n): Const(v) for n, v in zip(unknown, combo)}
        )
        diff = Binary("sub", attempt, problem.ic)
        if zero_certificate(diff, rng).is_certified_zero:
            matched = dict(known)
            matched.update(dict(zip(unknown, combo)))
            return True, matched
    return False, {}


def verify_candidate(
    problem: PdeProblem,
    candidate: Expr,
    fresh: Optional[set[str]] = None,
    rng: Optional[random.Random] = None,
    prefer: Optional[list[str]] = None,
) -> VerificationReport:
    """Two-step law-driven evaluation: exact PDE residual certificate
    (with undetermined-coefficient resolution for fresh parameters), then
    the initial-condition check at t=0."""
    rng = rng or random.Random(0)
    if fresh is None:
        _, cand_params = free_symbols(candidate)
        _, ic_params = free_symbols(problem.ic)
        fresh = (
            cand_params
            - set(problem.coefficients)
            - set(problem.ref_values)
            - ic_params
        )
    res = residual(problem, candidate)
    verdict = zero_certificate(res, rng)
    resolved: dict[str, Expr] = {}
    final = candidate
    if not verdict.is_certified_zero and fresh:
        assignment = resolve_parameters(res, fresh, rng, prefer=prefer)
        if assignment:
            resolved = assignment
            final = tidy(
                substitute(candidate, {Param(n): e for n, e in assignment.items()})
            )
            res = residual(problem, final)
            verdict = zero_certificate(res, rng)
    ic_pass = False
    ic_refs: dict[str, Fraction] = {}
    if verdict.is_certified_zero:
        ic_pass, ic_refs = _ic_check(problem, final, rng)
    fitness = 0 if (verdict.kind is ZeroKind.CERTIFIED_ZERO and ic_pass) else 1
    return VerificationReport(
        residual_simplified=res,
        pde_verdict=verdict,
        ic_pass=ic_pass,
        resolved=resolved,
        fitness=fitness,
        candidate_final=final,
        ic_reference_values=ic_refs,
    )


# ---------------------------------------------------------------------------
# Solution equivalence up to affine reparameterization
# ---------------------------------------------------------------------------

def _linear_equations(num: Poly, kappa: set[str]) -> Optional[list[dict[Optional[str], Fraction]]]:
    """Group the numerator by non-kappa monomials; each coefficient must be
    an affine form in the kappa unknowns with rational entries."""
    groups: dict[Mono, dict[Optional[str], Fraction]] = {}
    for m, c in num.items():
        knames = [g.name for g, n in m for _ in range(n) if isinstance(g, Param) and g.name in kappa]
        kdeg = sum(n for g, n in m if isinstance(g, Param) and g.name in kappa)
        if kdeg > 1:
            return None  # not linear in the map coefficients
        rest = tuple((g, n) for g, n in m if not (isinstance(g, Param) and g.name in kappa))
        eq = groups.setdefault(rest, {})
        key = knames[0] if knames else None
        eq[key] = eq.get(key, Fraction(0)) + c
    return [
        {k: v for k, v in eq.items() if v} for eq in groups.values() if any(eq.values())
    ]


def _solve_linear(
    eqs: list[dict[Optional[str], Fraction]], unknowns: list[str]
) -> Optional[dict[str, Fraction]]:
    """Exact Gaussian elimination; free unknowns default to 0."""
    idx = {name: i for i, name in enumerate(unknowns)}
    rows = []
    for eq in eqs:
        row = [Fraction(0)] * len(unknowns) + [Fraction(0)]
        for key, coeff in eq.items():
            if key is None:
                row[-1] += coeff
            else:
                row[idx[key]] += coeff
        rows.append(row)
    pivot_of: dict[int, list[Fraction]] = {}
    for row in rows:
        for col in range(len(unknowns)):
            if row[col] == 0:
                continue
            if col in pivot_of:
                f = row[col] / pivot_of[col][col]
                row[:] = [a - f * b for a, b in zip(row, pivot_of[col])]
            else:
                pivot_of[col] = row
                break
        else:
            if row[-1] != 0:
                return None  # inconsistent
    solution = {name: Fraction(0) for name in unknowns}
    for col in sorted(pivot_of, reverse=True):
        row = pivot_of[col]
        acc = row[-1]
        for c2 in range(col + 1, len(unknowns)):
            acc += row[c2] * solution[unknowns[c2]]
        solution[unknowns[col]] = -acc / row[col]
    return solution


def _affine_map_form(
    b_params: list[str], a_params: list[str]
) -> tuple[dict[Expr, Expr], list[str]]:
    """sol_b's parameters written as affine forms in sol_a's parameters."""
    mapping: dict[Expr, Expr] = {}
    kappa: list[str] = []
    for j, q in enumerate(b_params):
        form: Expr = Param(f"kap{j}o")
        kappa.append(f"kap{j}o")
        for i, p in enumerate(a_params):
            name = f"kap{j}i{i}"
            kappa.append(name)
            form = Binary("add", form, Binary("mul", Param(name), Param(p)))
        mapping[Param(q)] = form
    return mapping, kappa


def _try_affine(
    sol_a: Expr, sol_b: Expr, a_params: list[str], b_params: list[str],
    rng: random.Random,
) -> bool:
    mapping, kappa = _affine_map_form(b_params, a_params)
    mapped = substitute(sol_b, mapping)
    diff = Binary("sub", sol_a, mapped)
    rf = canon(diff)
    if rf.is_zero():
        return True
    eqs = _linear_equations(rf.num, set(kappa))
    if eqs is None:
        return False
    solution = _solve_linear(eqs, kappa)
    if solution is None:
        return False
    concrete = substitute(
        mapped, {Param(n): Const(v) for n, v in solution.items()}
    )
    return zero_certificate(Binary("sub", sol_a, concrete), rng).is_certified_zero


def check_equivalence(
    sol_a: Expr, sol_b: Expr, problem: PdeProblem, rng: Optional[random.Random] = None
) -> str:
    """Returns "Equivalent", "Distinct", or "Undecided".

    Equivalent: some affine rational reparameterization of one side's
    parameters makes the difference certify zero (tried both ways, so the
    relation is symmetric).  Distinct: every sampled parameter map leaves
    a numeric witness separating the families.
    """
    rng = rng or random.Random(0)
    lam = set(problem.coefficients)
    _, pa = free_symbols(sol_a)
    _, pb = free_symbols(sol_b)
    a_params = sorted(pa - lam)
    b_params = sorted(pb - lam)
    if _try_affine(sol_a, sol_b, a_params, b_params, rng):
        return "Equivalent"
    if _try_affine(sol_b, sol_a, b_params, a_params, rng):
        return "Equivalent"
    # sample random affine maps; Distinct only if every one is separated
    names = sorted(set(problem.variables) | lam | set(a_params))
    all_separated = True
    for _ in range(EQUIV_TRIALS):
        mapping = {
            Param(q): _random_affine(a_params, rng) for q in b_params
        }
        mapped = substitute(sol_b, mapping)
        diff = Binary("sub", sol_a, mapped)
        separated = False
        for _ in range(16):
            point = draw_point(names, rng)
            value = eval_numeric(diff, point, min_abs_den=1e-9)
            if value is not None and abs(value) > 1e-6:
                separated = True
                break
        if not separated:
            all_separated = False
            break
    return "Distinct" if all_separated else "Undecided"


def _random_affine(a_params: list[str], rng: random.Random) -> Expr:
    out: Expr = Const(rng.choice(IC_MATCH_VALUES))
    for p in a_params:
        c = rng.choice(IC_MATCH_VALUES)
        if c:
            out = Binary("add", out, Binary("mul", Const(c), Param(p)))
    return out
