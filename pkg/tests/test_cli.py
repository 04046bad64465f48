import json
import shutil
import subprocess

import pytest

from disjrewrite import cli

from conftest import FIXTURES


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fx(name):
    return str(FIXTURES / name)


def test_rewrite_complete(capsys):
    code, out, _ = run(capsys, "rewrite", "-i", fx("ex2_transitivity.dlp"))
    assert code == cli.EXIT_OK
    assert out.splitlines()[1:] == ["% status: complete", "? :- p(V0,V1)."]


def test_rewrite_budget_exit(capsys):
    code, out, _ = run(capsys, "rewrite", "-i", fx("ex2_ground.dlp"), "--max-iter", "2")
    assert code == cli.EXIT_BUDGET
    assert "% status: budget_exhausted" in out


def test_json_output(capsys):
    code, out, _ = run(capsys, "s-rewrite", "-i", fx("ex6_mapping.dlp"), "--json")
    data = json.loads(out)
    assert code == 0 and data["status"] == "complete" and data["cqs"] == []


@pytest.mark.parametrize("name, code", [("triangle.dlp", 0), ("edge.dlp", 2), ("cycle4.dlp", 2)])
def test_entail_exit_codes(capsys, name, code):
    got, out, _ = run(capsys, "entail", "-i", fx(name))
    assert got == code
    assert out.split("\n")[0] in ("entailed", "not_entailed")


def test_entail_unknown_is_budget(capsys):
    code, out, _ = run(capsys, "entail", "-i", fx("triangle.dlp"), "--depth", "1")
    assert code == cli.EXIT_BUDGET and out.startswith("unknown")


def test_single_piece_warns(capsys):
    _, _, err = run(capsys, "rewrite", "-i", fx("ex1_coloring.dlp"), "--max-iter", "1", "--single-piece")
    assert "incomplete" in err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.dlp"
    code, out, _ = run(capsys, "gen-nonfus", "-i", fx("nonfus.dlp"), "--rule", "r", "-o", str(target))
    assert code == 0 and out == ""
    assert "link_r" in target.read_text()


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run(capsys, "unfold", "-i", fx("unfold.dlp"), "--max-comp", "1",
                       "-o", str(tmp_path / "missing" / "x"))
    assert code == cli.EXIT_ERROR and "cannot write" in err


@pytest.mark.parametrize("argv, fragment", [
    (["rewrite", "-i", "no/such/file"], "cannot read"),
    (["s-rewrite", "-i", fx("ex6.dlp")], "@source"),
    (["gen-nonfus", "-i", fx("nonfus.dlp"), "--rule", "nope"], "no rule named"),
    (["gen-reduction", "-i", fx("reduction.dlp"), "--query", "nope"], "no query named"),
    (["gen-reduction", "-i", fx("ex6.dlp"), "--query", "q"], "datalog"),
    (["rewrite", "-i", fx("nonfus.dlp")], "no @queries"),
])
def test_input_errors(capsys, argv, fragment):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_ERROR and fragment in err


def test_parse_error_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.dlp"
    bad.write_text("@facts\nv(X).\n")
    code, _, err = run(capsys, "chase", "-i", str(bad))
    assert code == cli.EXIT_ERROR and "line 2" in err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["rewrite"], ["rewrite", "-i", "x", "--max-iter", "0"],
                                  ["check", "--seed", "-3"]])
def test_usage_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as e:
        cli.run(argv)
    assert e.value.code == cli.EXIT_ERROR


def test_check_command(capsys):
    code, out, _ = run(capsys, "check", "--count", "2", "--invariant-count", "2")
    data = json.loads(out)
    assert code == 0 and data["ok"] is True
    assert data["checked"]["cross_check"] == 2 and data["invariant"] == {"checked": 2, "failures": []}


@pytest.mark.skipif(shutil.which("disjrewrite") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["disjrewrite", "entail", "-i", fx("edge.dlp")], capture_output=True)
    assert proc.returncode == 2
