"""Benchmark corpus runner: solve every problem file in a directory and
report recovery status against optional handbook solutions."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .expr import Binary
from .problems import PdeProblem, SolutionRecord, load_problem
from .search import SearchConfig, SolveFailure, solve
from .simplify import zero_certificate
from .verify import check_equivalence

CSV_COLUMNS = ("name", "status", "solution", "candidates", "wall_time_ms")


@dataclass(frozen=True)
class BenchReportRow:
    name: str
    status: str  # recovered | equivalent | failed
    solution: str
    candidates: int
    wall_time_ms: int
    note: str = ""


def _classify(problem: PdeProblem, rec: SolutionRecord) -> tuple[str, str]:
    if problem.expected is None:
        return "recovered", ""
    diff = Binary("sub", rec.expression, problem.expected)
    if zero_certificate(diff).is_certified_zero:
        return "recovered", ""
    verdict = check_equivalence(rec.expression, problem.expected, problem)
    if verdict == "Equivalent":
        return "equivalent", ""
    return "failed", f"solution verifies but is {verdict} from expected form"


def run_bench(
    corpus_dir, cfg: Optional[SearchConfig] = None,
    on_record: Optional[Callable[[SolutionRecord], None]] = None,
) -> list[BenchReportRow]:
    """Solve each .prob file (sorted by name); rows for failures carry the
    failure reason and the run continues."""
    rows: list[BenchReportRow] = []
    for path in sorted(Path(corpus_dir).glob("*.prob")):
        problem = load_problem(path)
        try:
            rec = solve(problem, cfg)
        except SolveFailure as failure:
            rows.append(
                BenchReportRow(
                    name=problem.name,
                    status="failed",
                    solution="",
                    candidates=failure.stats.candidates_evaluated,
                    wall_time_ms=failure.stats.wall_time_ms,
                    note=failure.stage_failure.reason,
                )
            )
            continue
        status, note = _classify(problem, rec)
        rows.append(
            BenchReportRow(
                name=problem.name,
                status=status,
                solution=rec.expression_text,
                candidates=rec.stats.candidates_evaluated,
                wall_time_ms=rec.stats.wall_time_ms,
                note=note,
            )
        )
        if on_record is not None:
            on_record(rec)
    return rows


def rows_to_csv(rows: list[BenchReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.name, r.status, r.solution, r.candidates, r.wall_time_ms])
    return buf.getvalue()


def rows_to_json(rows: list[BenchReportRow]) -> str:
    return json.dumps(
        [
            {
                "name": r.name,
                "status": r.status,
                "solution": r.solution,
                "candidates": r.candidates,
                "wall_time_ms": r.wall_time_ms,
                "note": r.note,
            }
            for r in rows
        ],
        indent=2,
    ) + "\n"
