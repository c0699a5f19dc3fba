import json

from closedform.cli import cli

from conftest import CORPUS


def test_solve_writes_json_and_exits_zero(tmp_path, capsys):
    out = tmp_path / "sol.json"
    code = cli(["solve", str(CORPUS / "heat-exp.prob"), "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "u = " in printed
    doc = json.loads(out.read_text())
    assert doc["problem"] == "heat-exp"
    assert doc["verification"] == {"pde_pass": True, "ic_pass": True}


def test_verify_bad_candidate_exits_two(capsys):
    code = cli(["verify", str(CORPUS / "heat-exp.prob"), "--candidate", "exp(x+2*a*t)"])
    assert code == 2
    printed = capsys.readouterr().out
    assert "witness_nonzero" in printed
    assert "residual" in printed


def test_verify_good_candidate_exits_zero():
    assert cli(["verify", str(CORPUS / "heat-exp.prob"), "--candidate", "exp(x+a*t)"]) == 0


def test_bench_small_corpus(tmp_path, capsys):
    (tmp_path / "easy.prob").write_text(
        "name = easy\nunknown = u(x,t)\npde = u_t = 0\ntime = t\nic = x\n"
    )
    report = tmp_path / "report.csv"
    code = cli(["bench", str(tmp_path), "--report", str(report)])
    assert code == 0
    assert report.exists()
    assert report.with_suffix(".json").exists()
    assert "easy,recovered" in capsys.readouterr().out


def test_bench_failure_exits_nonzero(tmp_path):
    (tmp_path / "decoy.prob").write_text(
        "name = decoy\nunknown = u(x,t)\npde = u_t - a*u_xx = 0\n"
        "coefficients = a\ntime = t\nic = exp(x)\nbudget = 10\n"
    )
    assert cli(["bench", str(tmp_path)]) == 2


def test_equiv_exits_zero_on_equivalent(capsys):
    code = cli([
        "equiv", str(CORPUS / "heat-quadratic.prob"),
        "--a", "A + 2*B*a*t + B*x^2",
        "--b", "A*(x^2+2*a*t)+B",
    ])
    assert code == 0
    assert "Equivalent" in capsys.readouterr().out


def test_equiv_exits_two_on_distinct():
    code = cli([
        "equiv", str(CORPUS / "heat-exp.prob"),
        "--a", "exp(x + a*t)", "--b", "x + a*t",
    ])
    assert code == 2


def test_usage_error_exits_one(capsys):
    assert cli(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


def test_bad_expression_exits_one(capsys):
    code = cli(["verify", str(CORPUS / "heat-exp.prob"), "--candidate", "exp(x"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_missing_file_exits_one():
    assert cli(["solve", "/nonexistent/prob.prob"]) == 1
