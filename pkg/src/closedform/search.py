"""Staged hierarchical search over expression trees.

The loop: lift constants out of the initial condition, then activate one
remaining variable per stage.  Each stage enumerates subtree insertions
into the current expression (position x operator x terminal x
orientation), smallest edits first, and stops at the first candidate
that passes exact verification.  The accepted expression seeds the next
stage.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional

from .errors import DuplicatePositionError, InvalidPositionError
from .expr import (
    Binary,
    Const,
    Expr,
    Param,
    PositionId,
    Unary,
    Var,
    format_expr,
    free_symbols,
    positions,
    replace_at,
)
from .problems import (
    FreeParam,
    PdeProblem,
    SolutionRecord,
    Stats,
    Verification,
)

UNARY_FUNCTIONS = frozenset({"neg", "exp", "log", "sin", "cos", "sqrt"})
DEFAULT_FUNCTION_SET = ("add", "sub", "mul", "div", "exp")

# fresh-name pools: multiplicative rates then additive shifts
_RATE_NAMES = "cdefgh"
_SHIFT_NAMES = "pqrs"
_UNIT_LIFT_NAMES = "AFGH"
_CONST_LIFT_NAMES = "BCDE"


@dataclass(frozen=True)
class SearchConfig:
    function_set: tuple[str, ...] = DEFAULT_FUNCTION_SET
    budget: Optional[int] = None  # None: use the problem's budget
    max_insertions: Optional[int] = None
    stage_order: Optional[tuple[str, ...]] = None
    seed: int = 0
    terminal_builder: Optional[Callable[[str, PdeProblem, "NameAllocator"], list[Expr]]] = None
    max_fresh_params: int = 2


@dataclass(frozen=True)
class CandidateSubtree:
    position: PositionId
    op: str
    terminal: Optional[Expr]  # None for unary wraps
    terminal_left: bool

    def apply(self, target: Expr) -> Expr:
        if self.op in UNARY_FUNCTIONS:
            return Unary(self.op, target)
        assert self.terminal is not None
        if self.terminal_left:
            return Binary(self.op, self.terminal, target)
        return Binary(self.op, target, self.terminal)


@dataclass
class StageState:
    index: int
    current_expr: Expr
    activated: tuple[str, ...]
    terminal_set: list[Expr]
    position_set: list[PositionId]
    fresh_params_introduced: set[str]


class StageFailure(Exception):
    def __init__(self, reason: str, candidates_evaluated: int):
        super().__init__(reason)
        self.reason = reason  # "budget_exhausted" | "pool_exhausted"
        self.candidates_evaluated = candidates_evaluated


class SolveFailure(Exception):
    def __init__(self, stage_failure: StageFailure, stats: Stats):
        super().__init__(f"search failed: {stage_failure.reason}")
        self.stage_failure = stage_failure
        self.stats = stats


class NameAllocator:
    """Deterministic fresh parameter names that avoid existing symbols."""

    def __init__(self, used: set[str]):
        self.used = set(used)

    def _take(self, pool: str) -> str:
        for ch in pool:
            if ch not in self.used:
                self.used.add(ch)
                return ch
        i = 1
        while True:
            for ch in pool:
                name = f"{ch}{i}"
                if name not in self.used:
                    self.used.add(name)
                    return name
            i += 1

    def rate(self) -> str:
        return self._take(_RATE_NAMES)

    def shift(self) -> str:
        return self._take(_SHIFT_NAMES)

    def unit_lift(self) -> str:
        return self._take(_UNIT_LIFT_NAMES)

    def const_lift(self) -> str:
        return self._take(_CONST_LIFT_NAMES)


def _symbols_of(problem: PdeProblem, *exprs: Expr) -> set[str]:
    used = set(problem.variables) | set(problem.coefficients)
    used.add(problem.unknown)
    used.update(problem.ref_values)
    for e in exprs:
        vs, ps = free_symbols(e)
        used |= vs | ps
    return used


# ---------------------------------------------------------------------------
# Constant lifting
# ---------------------------------------------------------------------------

def lift_constants(
    ic: Expr, ref: dict[str, Fraction], used_names: Optional[set[str]] = None
) -> tuple[Expr, list[str], dict[str, Fraction]]:
    """Replace maximal numeric constants in the initial condition by fresh
    parameters and apply a multiplicative unit lift.

    Constants inside function arguments, power exponents, and divisors
    stay put (exp(x/2) keeps its 1/2); additive terms and multiplicative
    factors are lifted.  The unit lift A*ic is skipped when the condition
    is already parametric or the lifting produced a parametric root.
    """
    vs, ps = free_symbols(ic)
    names = NameAllocator((used_names or set()) | vs | ps)
    new_ref = dict(ref)
    fresh: list[str] = []

    def walk(e: Expr) -> Expr:
        if isinstance(e, Const):
            name = names.const_lift()
            fresh.append(name)
            new_ref[name] = e.value
            return Param(name)
        if isinstance(e, Binary) and e.op in ("add", "sub", "mul"):
            return Binary(e.op, walk(e.left), walk(e.right))
        if isinstance(e, Binary) and e.op == "div":
            return Binary(e.op, walk(e.left), e.right)
        if isinstance(e, Unary) and e.op == "neg":
            return Unary(e.op, walk(e.child))
        return e

    lifted = walk(ic)

    def has_param_factor(e: Expr) -> bool:
        if isinstance(e, Param):
            return True
        if isinstance(e, Binary) and e.op == "mul":
            return has_param_factor(e.left) or has_param_factor(e.right)
        return False

    if not ps and not has_param_factor(lifted):
        name = names.unit_lift()
        fresh.insert(0, name)
        new_ref[name] = Fraction(1)
        lifted = Binary("mul", Param(name), lifted)
    return lifted, fresh, new_ref


# ---------------------------------------------------------------------------
# Stage terminals and candidate pool
# ---------------------------------------------------------------------------

def build_stage_terminals(
    v_k: str, problem: PdeProblem, cfg: SearchConfig, names: Optional[NameAllocator] = None
) -> list[Expr]:
    """Default variant template for a newly activated variable:
    { v, c*v, lambda_i*v, v^2, c*v^2, p+v } with fresh c's and p."""
    if cfg.terminal_builder is not None:
        names = names or NameAllocator(_symbols_of(problem))
        return cfg.terminal_builder(v_k, problem, names)
    names = names or NameAllocator(_symbols_of(problem))
    v = Var(v_k)
    out: list[Expr] = [v, Binary("mul", Param(names.rate()), v)]
    for lam in problem.coefficients:
        out.append(Binary("mul", Param(lam), v))
    v2 = Binary("pow", v, Const(2))
    out.append(v2)
    out.append(Binary("mul", Param(names.rate()), v2))
    out.append(Binary("add", Param(names.shift()), v))
    seen: set[Expr] = set()
    unique = []
    for term in out:
        if term not in seen:
            seen.add(term)
            unique.append(term)
    return unique


def assemble_pool(state: StageState, cfg: SearchConfig) -> list[CandidateSubtree]:
    """Position preorder, then function-set order, then terminal order,
    then orientation (terminal-left first)."""
    pool: list[CandidateSubtree] = []
    for pos in state.position_set:
        for op in cfg.function_set:
            if op in UNARY_FUNCTIONS:
                pool.append(CandidateSubtree(pos, op, None, False))
            else:
                for term in state.terminal_set:
                    pool.append(CandidateSubtree(pos, op, term, True))
                    pool.append(CandidateSubtree(pos, op, term, False))
    return pool


def expand(current: Expr, sel: list[CandidateSubtree]) -> Expr:
    """Insert each selected subtree at its position in the original tree.

    Positions must be distinct; insertions are applied deepest-first so
    every original position stays valid while shallower wraps go in.
    """
    seen_positions = set()
    for s in sel:
        if s.position in seen_positions:
            raise DuplicatePositionError(f"duplicate position {s.position}")
        seen_positions.add(s.position)
    valid = set(positions(current))
    for s in sel:
        if s.position not in valid:
            raise InvalidPositionError(f"position {s.position} not in expression")
    out = current
    for s in sorted(sel, key=lambda s: (len(s.position), s.position), reverse=True):
        target = _subtree(out, s.position)
        out = replace_at(out, s.position, s.apply(target))
    return out


def _subtree(e: Expr, pos: PositionId) -> Expr:
    from .expr import subtree_at

    return subtree_at(e, pos)


# ---------------------------------------------------------------------------
# Stage enumeration and the solve loop
# ---------------------------------------------------------------------------

@dataclass
class _Budget:
    remaining: int
    used: int = 0

    def spend(self) -> bool:
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        self.used += 1
        return True


@dataclass
class StageResult:
    expression: Expr
    resolved: dict[str, Expr]
    ref_values: dict[str, Fraction]
    candidates_evaluated: int


def enumerate_stage(
    state: StageState,
    problem: PdeProblem,
    cfg: SearchConfig,
    budget: _Budget,
    rng: random.Random,
    lifted_params: set[str],
) -> StageResult:
    """First-hit enumeration by ascending insertion count, lexicographic
    within a count.  Deterministic for a fixed (problem, cfg, seed)."""
    from .verify import verify_candidate

    pool = assemble_pool(state, cfg)
    max_ins = cfg.max_insertions or problem.max_insertions_per_stage
    n_fun = len(cfg.function_set)
    n_term = max(len(state.terminal_set), 1)
    bound = (2 * n_fun * n_term + 1) ** len(state.position_set)
    evaluated = 0
    for count in range(1, max_ins + 1):
        for combo in combinations(range(len(pool)), count):
            sel = [pool[i] for i in combo]
            if len({s.position for s in sel}) != count:
                continue  # one insertion per position per stage
            candidate = expand(state.current_expr, sel)
            _, cand_params = free_symbols(candidate)
            search_fresh = cand_params & state.fresh_params_introduced
            if len(search_fresh) > cfg.max_fresh_params:
                continue
            if not budget.spend():
                raise StageFailure("budget_exhausted", evaluated)
            evaluated += 1
            assert evaluated <= bound, "stage enumeration exceeded the pool bound"
            report = verify_candidate(
                problem,
                candidate,
                fresh=search_fresh | lifted_params,
                rng=rng,
                prefer=sorted(search_fresh),
            )
            if report.fitness == 0:
                refs = dict(problem.ref_values)
                refs.update(report.ic_reference_values)
                return StageResult(
                    expression=report.candidate_final,
                    resolved=report.resolved,
                    ref_values=refs,
                    candidates_evaluated=evaluated,
                )
    raise StageFailure("pool_exhausted", evaluated)


def default_stage_order(problem: PdeProblem, ic: Expr) -> tuple[str, ...]:
    """Variables not yet present in the (lifted) initial condition, space
    first, time last."""
    ic_vars, _ = free_symbols(ic)
    order = [
        v for v in problem.variables if v != problem.time_var and v not in ic_vars
    ]
    order.append(problem.time_var)
    return tuple(order)


def solve(
    problem: PdeProblem,
    cfg: Optional[SearchConfig] = None,
    clock: Callable[[], float] = time.monotonic,
) -> SolutionRecord:
    """Run the staged search; returns a verified SolutionRecord or raises
    SolveFailure carrying the last stage failure and the stats."""
    from .verify import verify_candidate

    cfg = cfg or SearchConfig()
    rng = random.Random(cfg.seed)
    t0 = clock()
    # ref keys are reserved *for* lifted parameters, not live symbols
    live = set(problem.variables) | set(problem.coefficients) | {problem.unknown}
    current, lifted, refs = lift_constants(problem.ic, problem.ref_values, live)
    working = problem.with_refs(refs)
    stage_vars = cfg.stage_order or default_stage_order(problem, current)
    budget = _Budget(cfg.budget if cfg.budget is not None else problem.budget)
    names = NameAllocator(_symbols_of(working, current))

    resolved_all: dict[str, Expr] = {}
    stages_run = 0
    activated = tuple(v for v in problem.variables if v not in stage_vars)
    try:
        for v_k in stage_vars:
            terminals = build_stage_terminals(v_k, working, cfg, names)
            _, term_params = free_symbols_many(terminals)
            state = StageState(
                index=stages_run + 1,
                current_expr=current,
                activated=activated + (v_k,),
                terminal_set=terminals,
                position_set=positions(current),
                fresh_params_introduced=term_params
                - set(working.coefficients)
                - set(working.ref_values),
            )
            result = enumerate_stage(
                state, working, cfg, budget, rng, lifted_params=set(lifted)
            )
            current = result.expression
            resolved_all.update(result.resolved)
            working = working.with_refs(result.ref_values)
            activated = activated + (v_k,)
            stages_run += 1
    except StageFailure as failure:
        stats = Stats(budget.used, stages_run, _elapsed_ms(clock, t0))
        raise SolveFailure(failure, stats) from failure

    # end-to-end re-verification of the final expression
    final_report = verify_candidate(working, current, fresh=set(), rng=rng)
    assert final_report.fitness == 0, "accepted solution failed re-verification"

    _, final_params = free_symbols(current)
    free_params = tuple(
        FreeParam(name, working.ref_values[name])
        for name in sorted(final_params)
        if name not in working.coefficients
    )
    stats = Stats(budget.used, stages_run, _elapsed_ms(clock, t0))
    return SolutionRecord(
        problem=problem.name,
        expression=current,
        expression_text=format_expr(current),
        variables=problem.variables,
        free_params=free_params,
        resolved_params=resolved_all,
        verification=Verification(pde_pass=True, ic_pass=True),
        stats=stats,
    )


def free_symbols_many(exprs) -> tuple[set[str], set[str]]:
    vs: set[str] = set()
    ps: set[str] = set()
    for e in exprs:
        v, p = free_symbols(e)
        vs |= v
        ps |= p
    return vs, ps


def _elapsed_ms(clock: Callable[[], float], t0: float) -> int:
    return max(0, int(round((clock() - t0) * 1000)))
