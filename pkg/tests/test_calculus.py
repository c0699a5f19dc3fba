import random

import pytest

from closedform.calculus import differentiate, residual, substitute_unknown
from closedform.errors import UnsupportedFunctionError
from closedform.expr import Binary, Const, Var, eval_numeric, format_expr
from closedform.parse import parse_expr
from closedform.simplify import simplify, zero_certificate

from conftest import random_expr, sample_point


def test_chain_rule_exp():
    d = differentiate(parse_expr("exp(x + a*t)"), "x")
    assert zero_certificate(Binary("sub", d, parse_expr("exp(x + a*t)"))).is_certified_zero


def test_quotient_rule():
    d = differentiate(parse_expr("(B+x)/(A+t)"), "t")
    want = parse_expr("-(B+x)/(A+t)^2")
    assert zero_certificate(Binary("sub", d, want)).is_certified_zero


def test_power_rule_twice():
    d = differentiate(
        differentiate(parse_expr("A + 2*a*B*t + B*x^2"), "x"), "x"
    )
    assert simplify(d) == simplify(parse_expr("2*B"))


def test_rational_exponent_rule():
    d = differentiate(parse_expr("x^(3/2)"), "x")
    want = parse_expr("3/2 * x^(1/2)")
    assert zero_certificate(Binary("sub", d, want)).is_certified_zero


def test_unsupported_symbolic_exponent():
    with pytest.raises(UnsupportedFunctionError):
        differentiate(parse_expr("x^t"), "x")


def test_differentiate_rejects_atoms():
    with pytest.raises(UnsupportedFunctionError):
        differentiate(parse_expr("u_t + x"), "x")


def test_substitute_heat_solution(heat):
    out = substitute_unknown(heat.operator_lhs, parse_expr("exp(x+a*t)"), heat)
    assert zero_certificate(out).is_certified_zero


def test_substitute_heat_non_solution(heat):
    out = substitute_unknown(heat.operator_lhs, parse_expr("exp(x+2*a*t)"), heat)
    want = parse_expr("a*exp(x+2*a*t)")
    assert zero_certificate(Binary("sub", out, want)).is_certified_zero


def test_substitute_group_derivative(helmholtz_rational):
    out = residual(helmholtz_rational, parse_expr("(B+x)/(A+t)"))
    assert out == Const(0)


def test_residual_heat_zero(heat):
    assert residual(heat, parse_expr("exp(x+a*t)")) == Const(0)


def test_residual_heat_fresh_rate(heat):
    r = residual(heat, parse_expr("exp(x+c*t)"))
    want = parse_expr("(c-a)*exp(x+c*t)")
    assert zero_certificate(Binary("sub", r, want)).is_certified_zero


def test_residual_nonlinear_case_study(helmholtz_exp):
    r = residual(helmholtz_exp, parse_expr("A*exp(c*t+x/2)"))
    want = parse_expr("(3*c/4 - 1/4)*A*exp(c*t+x/2)")
    assert zero_certificate(Binary("sub", r, want)).is_certified_zero


def test_finite_difference_agreement():
    rng = random.Random(23)
    names = ("x", "t", "a", "A", "B", "c")
    h = 1e-5
    checked = 0
    while checked < 400:
        e = random_expr(rng, depth=3, safe=True)
        v = rng.choice(("x", "t"))
        try:
            d = differentiate(e, v)
        except UnsupportedFunctionError:
            continue
        point = sample_point(rng, names)
        up = dict(point, **{v: point[v] + h})
        dn = dict(point, **{v: point[v] - h})
        f_up = eval_numeric(e, up, min_abs_den=1e-6)
        f_dn = eval_numeric(e, dn, min_abs_den=1e-6)
        g = eval_numeric(d, point, min_abs_den=1e-6)
        if f_up is None or f_dn is None or g is None:
            continue
        central = (f_up - f_dn) / (2 * h)
        if abs(central) > 1e6:  # wildly scaled points are numerically useless
            continue
        assert abs(central - g) <= 1e-6 * (1 + abs(g)), (format_expr(e), v, central, g)
        checked += 1


def test_mixed_partials_commute_semantically():
    rng = random.Random(31)
    for _ in range(40):
        e = random_expr(rng, depth=3, safe=True)
        try:
            xy = differentiate(differentiate(e, "x"), "t")
            yx = differentiate(differentiate(e, "t"), "x")
        except UnsupportedFunctionError:
            continue
        assert zero_certificate(Binary("sub", xy, yx)).is_certified_zero


def test_residual_linearity_on_heat(heat):
    rng = random.Random(37)
    for _ in range(20):
        f = random_expr(rng, depth=2, safe=True)
        g = random_expr(rng, depth=2, safe=True)
        try:
            rf = residual(heat, f)
            rg = residual(heat, g)
            rfg = residual(heat, Binary("add", f, g))
        except UnsupportedFunctionError:
            continue
        diff = Binary("sub", rfg, Binary("add", rf, rg))
        assert zero_certificate(diff).is_certified_zero
