import json
from pathlib import Path

from closedform.bench import BenchReportRow, rows_to_csv, rows_to_json, run_bench
from closedform.search import SearchConfig

from conftest import CORPUS


def test_shipped_corpus_all_pass():
    rows = run_bench(CORPUS)
    assert len(rows) == 8
    assert all(r.status in ("recovered", "equivalent") for r in rows), [
        (r.name, r.status, r.note) for r in rows
    ]
    # rows are ordered by problem name regardless of completion order
    assert [r.name for r in rows] == sorted(r.name for r in rows)


def test_corpus_accepts_user_problems(tmp_path):
    # a handbook problem added as a plain file, no code changes
    (tmp_path / "decay.prob").write_text(
        "name = decay\nunknown = u(x,t)\npde = u_t + k*u = 0\n"
        "coefficients = k\ntime = t\nic = exp(x)\n"
    )
    rows = run_bench(tmp_path)
    assert len(rows) == 1
    assert rows[0].status == "recovered"


def test_decoy_with_tiny_budget_fails_but_run_continues(tmp_path):
    (tmp_path / "a-decoy.prob").write_text(
        "name = a-decoy\nunknown = u(x,t)\npde = u_t - a*u_xx = 0\n"
        "coefficients = a\ntime = t\nic = exp(x)\nbudget = 10\n"
    )
    (tmp_path / "b-easy.prob").write_text(
        "name = b-easy\nunknown = u(x,t)\npde = u_t = 0\ntime = t\nic = x\n"
    )
    rows = run_bench(tmp_path)
    assert [r.name for r in rows] == ["a-decoy", "b-easy"]
    assert rows[0].status == "failed"
    assert rows[0].note == "budget_exhausted"
    assert rows[1].status == "recovered"


def test_empty_directory(tmp_path):
    assert run_bench(tmp_path) == []


def test_csv_columns_fixed():
    rows = [BenchReportRow("n", "recovered", "x + 1", 3, 17)]
    out = rows_to_csv(rows)
    lines = out.splitlines()
    assert lines[0] == "name,status,solution,candidates,wall_time_ms"
    assert lines[1] == "n,recovered,x + 1,3,17"


def test_json_report_parses():
    rows = [BenchReportRow("n", "failed", "", 10, 5, note="budget_exhausted")]
    doc = json.loads(rows_to_json(rows))
    assert doc[0]["status"] == "failed"
    assert doc[0]["note"] == "budget_exhausted"
