from fractions import Fraction

import pytest

from closedform.errors import SchemaError, SemanticError
from closedform.expr import Binary, Const, Param, Unary, Var, structural_eq
from closedform.problems import (
    FreeParam,
    SolutionRecord,
    Stats,
    Verification,
    export_solution,
    from_sexp,
    import_solution,
    parse_problem,
    to_sexp,
)
from closedform.parse import parse_expr

HEAT_FILE = """\
# heat conduction
name = heat-exp
unknown = u(x,t)
pde = u_t - a*u_xx = 0
coefficients = a
time = t
ic = exp(x)
ref = A:1, B:1
budget = 200000
max_insertions = 2
"""


def test_parse_heat_file():
    p = parse_problem(HEAT_FILE)
    assert p.name == "heat-exp"
    assert p.unknown == "u"
    assert p.variables == ("x", "t")
    assert p.time_var == "t"
    assert p.coefficients == ("a",)
    assert structural_eq(p.ic, Unary("exp", Var("x")))
    assert structural_eq(p.operator_lhs, parse_expr("u_t - a*u_xx"))
    assert p.ref_values == {"A": Fraction(1), "B": Fraction(1)}
    assert p.budget == 200_000
    assert p.max_insertions_per_stage == 2


def test_defaults():
    p = parse_problem(
        "name = n\nunknown = u(x,t)\npde = u_t = 0\ntime = t\nic = x\n"
    )
    assert p.budget == 200_000
    assert p.max_insertions_per_stage == 2
    assert p.coefficients == ()


def test_nonzero_rhs_moves_left():
    p = parse_problem(
        "name = n\nunknown = u(x,t)\npde = u_t = a*u_xx\ncoefficients = a\ntime = t\nic = x\n"
    )
    assert structural_eq(p.operator_lhs, parse_expr("u_t - (a*u_xx)")) or structural_eq(
        p.operator_lhs, Binary("sub", parse_expr("u_t"), parse_expr("a*u_xx"))
    )


def test_ic_with_time_is_semantic_error():
    with pytest.raises(SemanticError):
        parse_problem(
            "name = n\nunknown = u(x,t)\npde = u_t = 0\ntime = t\nic = exp(t)\n"
        )


def test_missing_pde_is_schema_error():
    with pytest.raises(SchemaError):
        parse_problem("name = n\nunknown = u(x,t)\ntime = t\nic = x\n")


def test_undeclared_coefficient_is_semantic_error():
    with pytest.raises(SemanticError):
        parse_problem(
            "name = n\nunknown = u(x,t)\npde = u_t - b*u_xx = 0\ntime = t\nic = x\n"
        )


def test_ic_mentioning_unknown_rejected():
    with pytest.raises(SemanticError):
        parse_problem(
            "name = n\nunknown = u(x,t)\npde = u_t = 0\ntime = t\nic = u + x\n"
        )


def test_sexp_shape():
    e = parse_expr("exp(x + a*t)")
    assert to_sexp(e) == "(exp (+ x (* a t)))"


def test_sexp_roundtrip():
    for text in ("(B+x)/(A+t)", "A*exp(1/3*t + x/2)", "-x^2 + sqrt(x)", "2/3*x"):
        e = parse_expr(text)
        back = from_sexp(to_sexp(e), frozenset({"x", "t"}))
        assert structural_eq(e, back), text


def _record() -> SolutionRecord:
    return SolutionRecord(
        problem="heat-exp",
        expression=parse_expr("A*exp(a*t + x)"),
        expression_text="A*exp(a*t + x)",
        variables=("x", "t"),
        free_params=(FreeParam("A", Fraction(1)),),
        resolved_params={"c": Param("a")},
        verification=Verification(True, True),
        stats=Stats(150, 1, 827),
    )


def test_export_contains_both_forms():
    raw = export_solution(_record()).decode()
    assert '"expression_text": "A*exp(a*t + x)"' in raw
    assert '"expression_sexp": "(* A (exp (+ (* a t) x)))"' in raw


def test_export_import_roundtrip():
    rec = _record()
    assert import_solution(export_solution(rec)) == rec


def test_export_is_byte_stable():
    rec = _record()
    once = export_solution(rec)
    assert export_solution(import_solution(once)) == once


def test_truncated_record_is_schema_error():
    raw = export_solution(_record())
    with pytest.raises(SchemaError):
        import_solution(raw[: len(raw) // 2])


def test_rational_refs_as_strings():
    rec = SolutionRecord(
        problem="p",
        expression=parse_expr("B*x"),
        expression_text="B*x",
        variables=("x", "t"),
        free_params=(FreeParam("B", Fraction(1, 2)),),
        resolved_params={},
        verification=Verification(True, True),
        stats=Stats(1, 1, 0),
    )
    raw = export_solution(rec).decode()
    assert '"ref": "1/2"' in raw
    assert import_solution(raw).free_params[0].ref == Fraction(1, 2)
