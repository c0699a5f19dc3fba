import random

import pytest
from hypothesis import given, settings, strategies as st

from closedform.errors import ExprSyntaxError
from closedform.expr import (
    Binary,
    Const,
    DerivAtom,
    DerivGroup,
    Param,
    Unary,
    Var,
    format_expr,
)
from closedform.parse import parse_expr, parse_rational
from closedform.simplify import zero_certificate

from conftest import random_expr


def test_heat_operator_shape():
    e = parse_expr("u_t - a*u_xx")
    assert e == Binary(
        "sub",
        DerivAtom("u", [("t", 1)]),
        Binary("mul", Param("a"), DerivAtom("u", [("x", 2)])),
    )


def test_unary_call():
    assert parse_expr("exp(x)") == Unary("exp", Var("x"))


def test_rational_family():
    e = parse_expr("(B+x)/(A+t)")
    assert e == Binary(
        "div",
        Binary("add", Param("B"), Var("x")),
        Binary("add", Param("A"), Var("t")),
    )


def test_mixed_partials_commute():
    assert parse_expr("u_xt") == parse_expr("u_tx")


def test_group_derivative():
    e = parse_expr("Dxx(u_t + u*u_x)")
    assert isinstance(e, DerivGroup)
    assert e.orders == (("x", 2),)


def test_precedence_pow_over_neg():
    # -x^2 parses as -(x^2)
    e = parse_expr("-x^2")
    assert isinstance(e, Unary) and e.op == "neg"
    assert isinstance(e.child, Binary) and e.child.op == "pow"


def test_left_associativity():
    e = parse_expr("x - t - a")
    assert e == Binary("sub", Binary("sub", Var("x"), Var("t")), Param("a"))


def test_error_offset_and_expected():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("exp(x")
    assert err.value.offset == 5
    assert ")" in err.value.expected


def test_unknown_function_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expr("besselI(x)")


def test_trailing_garbage():
    with pytest.raises(ExprSyntaxError):
        parse_expr("x + 1 )")


def test_unexpected_character():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("x + $")
    assert err.value.offset == 4


def test_decimal_literal_is_exact():
    from fractions import Fraction

    assert parse_expr("0.5") == Const(Fraction(1, 2))


def test_parse_rational():
    from fractions import Fraction

    assert parse_rational("1/2") == Fraction(1, 2)
    assert parse_rational("-3") == Fraction(-3)
    assert parse_rational("2.5") == Fraction(5, 2)
    with pytest.raises(ExprSyntaxError):
        parse_rational("x")


def test_var_set_controls_classification():
    e = parse_expr("y + t", frozenset({"y", "t"}))
    assert e == Binary("add", Var("y"), Var("t"))
    e = parse_expr("y + t")  # default vars are {x, t}
    assert e == Binary("add", Param("y"), Var("t"))


@given(st.text(alphabet="xtaAB +-*/^()_0123456789ec", max_size=40))
@settings(max_examples=500, deadline=None)
def test_parser_totality(text):
    # valid strings parse, invalid strings raise ExprSyntaxError with a
    # position; nothing else escapes
    try:
        parse_expr(text)
    except ExprSyntaxError as err:
        assert 0 <= err.offset <= len(text)


def test_parse_format_semantic_equality_bulk():
    rng = random.Random(11)
    for _ in range(1000):
        e = random_expr(rng, depth=3)
        back = parse_expr(format_expr(e))
        diff = Binary("sub", back, e)
        assert zero_certificate(diff).is_certified_zero
