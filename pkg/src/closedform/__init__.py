"""closedform: discovers closed-form analytical PDE solutions by staged
expression-tree search with exact symbolic verification."""

from .calculus import differentiate, residual, substitute_unknown
from .errors import (
    DuplicatePositionError,
    ExprSyntaxError,
    InvalidPositionError,
    SchemaError,
    SemanticError,
    UnsupportedFunctionError,
)
from .expr import (
    Binary,
    Const,
    DerivAtom,
    DerivGroup,
    Expr,
    Param,
    Unary,
    Var,
    eval_numeric,
    format_expr,
    free_symbols,
    positions,
    structural_eq,
    substitute,
)
from .parse import parse_expr
from .problems import (
    PdeProblem,
    SolutionRecord,
    export_solution,
    import_solution,
    load_problem,
    parse_problem,
)
from .search import (
    SearchConfig,
    SolveFailure,
    StageFailure,
    assemble_pool,
    build_stage_terminals,
    enumerate_stage,
    expand,
    lift_constants,
    solve,
)
from .simplify import (
    CanonicalForm,
    ZeroKind,
    ZeroVerdict,
    resolve_parameters,
    simplify,
    zero_certificate,
)
from .bench import BenchReportRow, run_bench
from .verify import VerificationReport, check_equivalence, verify_candidate

__version__ = "0.1.0"

__all__ = [
    "Binary", "Const", "DerivAtom", "DerivGroup", "Expr", "Param", "Unary", "Var",
    "PdeProblem", "SolutionRecord", "SearchConfig", "SolveFailure", "StageFailure",
    "CanonicalForm", "ZeroKind", "ZeroVerdict", "VerificationReport", "BenchReportRow",
    "ExprSyntaxError", "SchemaError", "SemanticError", "UnsupportedFunctionError",
    "InvalidPositionError", "DuplicatePositionError",
    "parse_expr", "parse_problem", "load_problem", "export_solution", "import_solution",
    "differentiate", "substitute_unknown", "residual",
    "simplify", "zero_certificate", "resolve_parameters",
    "lift_constants", "build_stage_terminals", "assemble_pool", "expand",
    "enumerate_stage", "solve",
    "verify_candidate", "check_equivalence", "run_bench",
    "eval_numeric", "format_expr", "free_symbols", "positions", "structural_eq",
    "substitute",
]
