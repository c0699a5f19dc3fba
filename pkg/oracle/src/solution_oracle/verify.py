"""Re-verify exported solution records against their problem files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import sympy as sp

from .translate import (
    MalformedInput,
    ic_to_sympy,
    is_identically_zero,
    parse_problem_file,
    parse_ref,
    residual_for,
    sexp_to_sympy,
)

EXIT_AGREE = 0
EXIT_MALFORMED = 1
EXIT_DISAGREE = 3


@dataclass(frozen=True)
class OracleReport:
    problem: str
    pde_residual_zero: bool
    ic_match: bool
    disagreement: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "problem": self.problem,
                "pde_residual_zero": self.pde_residual_zero,
                "ic_match": self.ic_match,
                "disagreement": self.disagreement,
            }
        )


def _load_record(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read solution record {path}: {exc}") from exc
    for key in ("problem", "expression_sexp", "free_params", "verification"):
        if key not in doc:
            raise MalformedInput(f"solution record missing {key!r}")
    return doc


def _check_ic(problem: dict, candidate: sp.Expr, record: dict) -> bool:
    time_sym = sp.Symbol(problem["time"])
    g = ic_to_sympy(problem)
    at_zero = candidate.subs(time_sym, 0)
    # parameters that the initial condition itself carries stay symbolic;
    # everything else takes its reference value
    keep = {s.name for s in g.free_symbols}
    subs = {}
    for fp in record["free_params"]:
        if not isinstance(fp, dict) or "name" not in fp or "ref" not in fp:
            raise MalformedInput("free_params entries must carry name and ref")
        if fp["name"] not in keep:
            subs[sp.Symbol(fp["name"])] = parse_ref(str(fp["ref"]))
    for piece in problem.get("ref", "").split(","):
        piece = piece.strip()
        if piece and ":" in piece:
            name, value = piece.split(":", 1)
            name = name.strip()
            if name not in keep:
                subs.setdefault(sp.Symbol(name), parse_ref(value.strip()))
    return is_identically_zero(at_zero.subs(subs) - g)


def oracle_verify(solution_path, problem_path) -> tuple[OracleReport, int]:
    """Independently rebuild and check one record; exit code 0 on full
    agreement with the record's verification flags, 3 on disagreement."""
    solution_path = Path(solution_path)
    problem_path = Path(problem_path)
    record = _load_record(solution_path)
    try:
        problem = parse_problem_file(problem_path.read_text())
    except OSError as exc:
        raise MalformedInput(f"cannot read problem file {problem_path}: {exc}") from exc

    candidate = sexp_to_sympy(record["expression_sexp"])
    residual = residual_for(problem, candidate)
    pde_zero = is_identically_zero(residual)
    ic_ok = _check_ic(problem, candidate, record)

    claimed = record["verification"]
    mismatches = []
    if bool(claimed.get("pde_pass")) != pde_zero:
        mismatches.append(
            f"record claims pde_pass={claimed.get('pde_pass')}, oracle finds {pde_zero}"
        )
    if bool(claimed.get("ic_pass")) != ic_ok:
        mismatches.append(
            f"record claims ic_pass={claimed.get('ic_pass')}, oracle finds {ic_ok}"
        )
    note = "; ".join(mismatches) if mismatches else None
    report = OracleReport(
        problem=record["problem"],
        pde_residual_zero=pde_zero,
        ic_match=ic_ok,
        disagreement=note,
    )
    return report, (EXIT_DISAGREE if note else EXIT_AGREE)
