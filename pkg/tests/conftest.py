import random
from fractions import Fraction
from pathlib import Path

import pytest

from closedform.expr import Binary, Const, Expr, Param, Unary, Var
from closedform.problems import load_problem

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

VAR_NAMES = ("x", "t")
PARAM_NAMES = ("a", "A", "B", "c")


def random_expr(rng: random.Random, depth: int = 3, safe: bool = False) -> Expr:
    """Random expression tree; ``safe`` avoids log/sqrt so that most
    sample points stay inside the evaluation domain."""
    r = rng.random()
    if depth <= 0 or r < 0.3:
        k = rng.random()
        if k < 0.35:
            return Var(rng.choice(VAR_NAMES))
        if k < 0.6:
            return Param(rng.choice(PARAM_NAMES))
        if rng.random() < 0.7:
            return Const(rng.choice([0, 1, 2, 3, -1, -2]))
        return Const(Fraction(rng.randint(-4, 4), rng.randint(1, 4)))
    if r < 0.75:
        op = rng.choice(["add", "sub", "mul", "mul", "div"])
        return Binary(op, random_expr(rng, depth - 1, safe), random_expr(rng, depth - 1, safe))
    if r < 0.85:
        return Binary("pow", random_expr(rng, depth - 1, safe), Const(rng.randint(0, 3)))
    ops = ["neg", "exp", "sin", "cos"] if safe else ["neg", "exp", "sin", "cos", "log", "sqrt"]
    return Unary(rng.choice(ops), random_expr(rng, depth - 1, safe))


def sample_point(rng: random.Random, names) -> dict[str, float]:
    return {
        n: (1 if rng.random() < 0.5 else -1) * rng.uniform(0.3, 2.7) for n in names
    }


@pytest.fixture
def heat():
    return load_problem(CORPUS / "heat-exp.prob")


@pytest.fixture
def heat_quadratic():
    return load_problem(CORPUS / "heat-quadratic.prob")


@pytest.fixture
def helmholtz_rational():
    return load_problem(CORPUS / "helmholtz-burgers-rational.prob")


@pytest.fixture
def helmholtz_exp():
    return load_problem(CORPUS / "helmholtz-burgers-exp.prob")
