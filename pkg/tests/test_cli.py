import json
import time

import pytest

from fpcheck import cli, laws

from conftest import CORPUS

VALID = sorted((CORPUS / "valid").glob("*.fps"))


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_reflexive_exit_0(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "valid" / "reflexive.fps")
    assert code == 0 and "holds" in out


def test_check_false_refinement_exit_1(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "failing" / "false_refinement.fps")
    assert code == 1
    assert "FAILS [membership] witness label=a" in out


def test_check_malformed_exit_2(capsys):
    path = CORPUS / "malformed" / "unknown_label.fps"
    code, _, err = run(capsys, "check", path)
    assert code == 2
    assert f"{path}:3:13: error: unknown label c" in err


def test_check_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", tmp_path / "nope.fps")
    assert code == 2 and "cannot read" in err


def test_warnings_do_not_change_exit_code(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "valid" / "factor_rejections.fps")
    assert code == 0 and "warning: non-total operand z" in out
    assert "reconstruction: inexact at a" in out


def test_check_json_is_parseable_and_deterministic(capsys):
    path = CORPUS / "valid" / "hierarchy.fps"
    _, first, _ = run(capsys, "check", path, "--json")
    _, second, _ = run(capsys, "check", path, "--json")
    assert first == second
    payload = json.loads(first)
    assert payload["ok"] is True
    chain = payload["results"][-1]
    assert chain["verdict"]["check"] == "chain" and chain["verdict"]["holds"]


def test_check_json_parse_error(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "malformed" / "ambiguous_mix.fps", "--json")
    assert code == 2
    assert json.loads(out)["error"]["line"] == 4


def test_solve_with_omega(capsys):
    code, out, _ = run(capsys, "solve", CORPUS / "valid" / "solve_omega.fps", "--p", "p", "--q", "OMEGA")
    assert code == 0
    assert out.startswith("r_min: delta {a=1, b=1/2} gamma {a=1/2, b=1}")


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", CORPUS / "valid" / "embedded.fps",
                       "--p", "system", "--q", "machine", "--json")
    payload = json.loads(out)
    assert code == 0 and payload["verdict"]["holds"]
    assert payload["r_min"]["gamma"] == {"boot": "1/1", "run": "1/2"}


def test_solve_unknown_name(capsys):
    code, _, err = run(capsys, "solve", CORPUS / "valid" / "solve_omega.fps", "--p", "p", "--q", "zz")
    assert code == 2 and "unresolved name zz" in err


def test_factor_total_exact(capsys):
    code, out, _ = run(capsys, "factor", CORPUS / "valid" / "factor_total.fps", "--p", "p")
    assert code == 0 and "reconstruction: exact" in out


def test_factor_non_total_inexact(capsys):
    code, out, _ = run(capsys, "factor", CORPUS / "valid" / "factor_rejections.fps", "--p", "z", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["reconstruction"] == "inexact" and rep["differing"] == ["a"]


def test_laws_smallest_run(capsys, tmp_path):
    manifest = tmp_path / "m.txt"
    start = time.perf_counter()
    code, out, _ = run(capsys, "laws", "--grid", "1", "--max-universe", "1", "--manifest", manifest, "--write")
    assert time.perf_counter() - start < 1.0
    assert code == 0 and manifest.exists()
    for law in laws.LAWS:
        assert f"law {law.id} " in manifest.read_text()
    # CI mode against the file just written
    code, _, _ = run(capsys, "laws", "--grid", "1", "--max-universe", "1", "--manifest", manifest)
    assert code == 0


def test_laws_drift_exit_1(capsys, tmp_path):
    manifest = tmp_path / "m.txt"
    run(capsys, "laws", "--grid", "1", "--max-universe", "1", "--manifest", manifest, "--write")
    manifest.write_text(manifest.read_text().replace("class=unconditional", "class=unknown", 1))
    code, _, err = run(capsys, "laws", "--grid", "1", "--max-universe", "1", "--manifest", manifest)
    assert code == 1 and "+law" in err and "-law" in err


def test_laws_budget_exit_2(capsys, monkeypatch):
    monkeypatch.setenv("FPCHECK_BUDGET", "10")
    code, _, err = run(capsys, "laws", "--grid", "1", "--max-universe", "1")
    assert code == 2 and "exceeds budget" in err


def test_bad_arguments_exit_2(capsys):
    assert cli.main(["check"]) == 2
    assert cli.main(["laws", "--grid", "0"]) == 2
