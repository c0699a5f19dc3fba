"""Command-line interface.

Exit codes: 0 on success (solve found / fitness 0 / all bench rows pass),
2 on a verification or search failure, 1 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import rows_to_csv, rows_to_json, run_bench
from .errors import ExprSyntaxError, SchemaError, SemanticError
from .expr import format_expr
from .parse import parse_expr
from .problems import export_solution, load_problem
from .search import SearchConfig, SolveFailure, solve
from .verify import check_equivalence, verify_candidate


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="closedform", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="discover a closed-form solution")
    p_solve.add_argument("problem", type=Path)
    p_solve.add_argument("--budget", type=int, default=None)
    p_solve.add_argument("--max-insertions", type=int, default=None)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--out", type=Path, default=None, help="write solution JSON here")

    p_verify = sub.add_parser("verify", help="verify a candidate expression")
    p_verify.add_argument("problem", type=Path)
    p_verify.add_argument("--candidate", required=True)

    p_bench = sub.add_parser("bench", help="run a corpus directory")
    p_bench.add_argument("corpus", type=Path)
    p_bench.add_argument("--report", type=Path, default=None, help="CSV path; JSON written alongside")
    p_bench.add_argument("--budget", type=int, default=None)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--solutions-dir", type=Path, default=None,
                         help="export each solved record as JSON into this directory")

    p_equiv = sub.add_parser("equiv", help="check two solutions for equivalence")
    p_equiv.add_argument("problem", type=Path)
    p_equiv.add_argument("--a", required=True, dest="expr_a")
    p_equiv.add_argument("--b", required=True, dest="expr_b")
    return parser


def _cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    cfg = SearchConfig(budget=args.budget, max_insertions=args.max_insertions, seed=args.seed)
    try:
        rec = solve(problem, cfg)
    except SolveFailure as failure:
        print(f"FAILED ({failure.stage_failure.reason}) after "
              f"{failure.stats.candidates_evaluated} candidates")
        return 2
    print(f"{problem.name}: u = {rec.expression_text}")
    if rec.resolved_params:
        resolved = ", ".join(
            f"{k} = {format_expr(v)}" for k, v in sorted(rec.resolved_params.items())
        )
        print(f"  resolved: {resolved}")
    if rec.free_params:
        free = ", ".join(f"{fp.name} (ref {fp.ref})" for fp in rec.free_params)
        print(f"  free parameters: {free}")
    print(f"  candidates: {rec.stats.candidates_evaluated}, "
          f"stages: {rec.stats.stages}, wall: {rec.stats.wall_time_ms} ms")
    if args.out:
        args.out.write_bytes(export_solution(rec))
        print(f"  wrote {args.out}")
    return 0


def _cmd_verify(args) -> int:
    problem = load_problem(args.problem)
    candidate = parse_expr(args.candidate, problem.var_set)
    report = verify_candidate(problem, candidate)
    print(f"pde: {report.pde_verdict.kind.value}")
    if report.pde_verdict.value is not None:
        print(f"  residual witness value {report.pde_verdict.value:g} at "
              f"{ {k: round(v, 3) for k, v in report.pde_verdict.point.items()} }")
    print(f"residual: {format_expr(report.residual_simplified)}")
    if report.resolved:
        resolved = ", ".join(
            f"{k} = {format_expr(v)}" for k, v in sorted(report.resolved.items())
        )
        print(f"resolved: {resolved}")
    print(f"ic: {'pass' if report.ic_pass else 'fail'}")
    print(f"fitness: {report.fitness}")
    return 0 if report.fitness == 0 else 2


def _cmd_bench(args) -> int:
    cfg = SearchConfig(budget=args.budget, seed=args.seed)
    on_record = None
    if args.solutions_dir:
        args.solutions_dir.mkdir(parents=True, exist_ok=True)

        def on_record(rec):
            path = args.solutions_dir / f"{rec.problem}.json"
            path.write_bytes(export_solution(rec))

    rows = run_bench(args.corpus, cfg, on_record=on_record)
    print(rows_to_csv(rows), end="")
    if args.report:
        args.report.write_text(rows_to_csv(rows))
        args.report.with_suffix(".json").write_text(rows_to_json(rows))
    failed = [r for r in rows if r.status == "failed"]
    for r in failed:
        print(f"FAILED: {r.name}: {r.note}", file=sys.stderr)
    return 2 if failed else 0


def _cmd_equiv(args) -> int:
    problem = load_problem(args.problem)
    a = parse_expr(args.expr_a, problem.var_set)
    b = parse_expr(args.expr_b, problem.var_set)
    verdict = check_equivalence(a, b, problem)
    print(verdict)
    return 0 if verdict == "Equivalent" else 2


def cli(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "equiv":
            return _cmd_equiv(args)
    except (SchemaError, SemanticError, ExprSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
