import csv
import io
import json
import subprocess
import sys

import pytest

from cayleyauto.automata import save_dfa
from cayleyauto.cli import run
from cayleyauto.relations import identity_relation
from regex import regex


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_rep_verify_json(capsys):
    code, out, err = call(capsys, "rep", "verify", "--rep", "heisenberg", "--k", "6")
    assert code == 0 and err == ""
    rep = json.loads(out)
    assert rep["passed"] and rep["k"] == 6 and rep["rep"] == "heisenberg"


def test_rep_verify_failure_exit_1(capsys):
    code, out, err = call(capsys, "rep", "verify", "--rep", "binary-z", "--k", "5", "--corrupt", "a")
    assert code == 1
    assert json.loads(out)["counterexample"] is not None
    assert err.startswith("ERROR: verification failed")


def test_rep_build_and_verify_bundle(capsys, tmp_path):
    out_dir = tmp_path / "unary-z"
    code, out, _ = call(capsys, "rep", "build", "--rep", "unary-z", "--out", str(out_dir))
    assert code == 0 and json.loads(out)["rep"] == "unary-z"
    assert (out_dir / "codec.json").exists()
    code, out, _ = call(capsys, "rep", "verify", "--rep", str(out_dir), "--k", "8", "--format", "csv")
    assert code == 0
    assert {r["key"]: r["value"] for r in rows(out)}["passed"] == "True"


def test_rep_build_needs_out(capsys):
    code, _, err = call(capsys, "rep", "build", "--rep", "unary-z")
    assert code == 2 and err.startswith("ERROR:")


def test_measure_h_unary(capsys):
    code, out, _ = call(capsys, "measure", "h", "--rep", "unary-z", "--n", "12")
    assert code == 0
    table = rows(out)
    assert len(table) == 13 and all(r["h_lower"] == "0" for r in table)


def test_measure_h_rejects_foreign_letters(capsys):
    code, _, err = call(capsys, "measure", "h", "--rep", "heisenberg", "--n", "3")
    assert code == 2 and err.startswith("ERROR: MeasurementError")


def test_measure_s_json(capsys):
    code, out, _ = call(capsys, "measure", "s", "--rep", "binary-z-s", "--n", "6", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [r["n"] for r in data] == list(range(7))
    assert all(r["s_upper"] <= 2 * r["n"] for r in data)


def test_measure_almostall(capsys):
    code, out, _ = call(capsys, "measure", "almostall", "--rep", "lamplighter", "--n", "6", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["lambda"] > 1 and data["rows"][0]["fraction"] == 1.0
    code, _, err = call(capsys, "measure", "almostall", "--rep", "unary-z", "--n", "4")
    assert code == 2 and "exponential growth" in err


def test_lang_growth(capsys, tmp_path):
    code, out, _ = call(capsys, "lang", "growth", "--rep", "binary-z", "--n", "14", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["growth"] == "exponential" and data["fit_residual"] > 0
    path = tmp_path / "astar.json"
    save_dfa(regex("a*b*"), path)
    code, out, _ = call(capsys, "lang", "growth", "--lang", str(path), "--n", "3")
    assert code == 0
    assert [r["count"] for r in rows(out)] == ["1", "2", "3", "4"]
    assert rows(out)[0]["growth"] == "polynomial:1"


def test_fo_eval_presets(capsys):
    code, out, _ = call(capsys, "fo", "eval", "--rep", "heisenberg", "--formula", "R2(u, w0) & R0(u, v)")
    assert code == 0
    data = json.loads(out)
    assert data["vars"] == ["u", "v"] and data["satisfiable"]


def test_fo_eval_bind_and_list(capsys, tmp_path):
    dom = tmp_path / "dom.json"
    eq = tmp_path / "eq.json"
    save_dfa(regex("a*"), dom)
    save_dfa(identity_relation(regex("a*")), eq)
    code, out, _ = call(capsys, "fo", "eval", "--domain", str(dom), "--bind", f"Eq={eq}",
                        "--formula", "exists y Eq(x,y)", "--list", "--n", "2")
    assert code == 0
    assert out.splitlines() == ["x", "<empty>", "a", "a a"]


def test_fo_eval_errors(capsys):
    code, _, err = call(capsys, "fo", "eval", "--rep", "heisenberg", "--formula", "Q(x)")
    assert code == 2 and "unbound relation" in err
    code, _, err = call(capsys, "fo", "eval", "--formula", "R(x)")
    assert code == 2 and err.startswith("ERROR:")
    code, _, err = call(capsys, "fo", "eval", "--rep", "heisenberg", "--formula", "R0(x", "--bind", "bad")
    assert code == 2


def test_ball_export(capsys):
    code, out, _ = call(capsys, "ball", "export", "--rep", "heisenberg", "--n", "1")
    assert code == 0 and len(rows(out)) == 7
    spec = json.dumps({"family": "zn", "n": 2})
    code, out, err = call(capsys, "ball", "export", "--group", spec, "--n", "3")
    assert code == 0, err
    assert len(rows(out)) == 25


def test_ball_cap_exit_3(capsys):
    code, _, err = call(capsys, "ball", "export", "--rep", "heisenberg", "--n", "9", "--cap-ball", "100")
    assert code == 3 and err.startswith("ERROR: cap exceeded")


def test_verify_word_cap_exit_3(capsys):
    code, _, err = call(capsys, "rep", "verify", "--rep", "heisenberg", "--k", "8", "--cap-words", "1000")
    assert code == 3 and err.startswith("ERROR:")


def test_bounds_dehn(capsys):
    code, out, _ = call(capsys, "bounds", "dehn", "--class", "poly:3")
    assert code == 0 and out == "poly:1/3\n"
    code, out, _ = call(capsys, "bounds", "dehn", "--class", "exp", "--format", "json")
    assert json.loads(out) == {"dehn": "exp", "h_lower": "id", "superadditive": True, "n0": 1}
    code, out, _ = call(capsys, "bounds", "dehn", "--class", "poly:2")
    assert out == "none\n"
    code, _, err = call(capsys, "bounds", "dehn", "--class", "log:1")
    assert code == 2 and err.startswith("ERROR:")


@pytest.mark.parametrize("argv", [
    [],
    ["rep"],
    ["nope", "x"],
    ["measure", "h", "--n", "x"],
    ["measure", "h", "--rep", "unary-z", "--n", "-1"],
    ["measure", "h", "--rep", "unary-z", "--workers", "0"],
    ["measure", "h", "--rep", "no-such-rep"],
    ["measure", "h"],
    ["rep", "verify", "--rep", "unary-z", "--format", "xml"],
])
def test_usage_errors(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert err.strip().splitlines()[-1].startswith("ERROR:")


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"rep": "unary-z", "n": 3, "cap-words": 1000}))
    code, out, _ = call(capsys, "measure", "h", "--config", str(cfg))
    assert code == 0 and len(rows(out)) == 4
    code, out, _ = call(capsys, "measure", "h", "--config", str(cfg), "--n", "5")
    assert len(rows(out)) == 6
    cfg.write_text(json.dumps({"rep": "unary-z", "format": "json"}))
    code, out, _ = call(capsys, "measure", "h", "--config", str(cfg), "--n", "1")
    assert len(json.loads(out)) == 2
    code, out, _ = call(capsys, "measure", "h", "--config", str(cfg), "--n", "1", "--format", "csv")
    assert out.startswith("n,")


@pytest.mark.parametrize("content", ['{"bogus": 1}', "[1]", "not json", '{"n": "three"}', '{"cap_ball": -5}'])
def test_bad_config(capsys, tmp_path, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    code, _, err = call(capsys, "measure", "h", "--rep", "unary-z", "--config", str(cfg))
    assert code == 2 and err.startswith("ERROR:")


def test_out_file(capsys, tmp_path):
    path = tmp_path / "h.csv"
    code, out, _ = call(capsys, "measure", "h", "--rep", "unary-z", "--n", "2", "--out", str(path))
    assert code == 0 and out == ""
    assert path.read_text().splitlines()[0] == "n,h_lower,h_upper,words,exhaustive"


def test_repeat_runs_identical(capsys):
    argv = ["measure", "h", "--rep", "binary-z-s", "--n", "10", "--sample", "20", "--seed", "7"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a == b and a
    _, c, _ = call(capsys, *argv[:-1], "8")
    assert c.splitlines()[0] == a.splitlines()[0]


def test_workers_do_not_change_output(capsys):
    _, a, _ = call(capsys, "rep", "verify", "--rep", "free-zz", "--k", "5", "--workers", "1")
    _, b, _ = call(capsys, "rep", "verify", "--rep", "free-zz", "--k", "5", "--workers", "3")
    assert a == b


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "cayleyauto", "bounds", "dehn", "--class", "poly:3"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "poly:1/3\n"
    bad = subprocess.run([sys.executable, "-m", "cayleyauto", "bounds"], capture_output=True, text=True)
    assert bad.returncode == 2 and "ERROR:" in bad.stderr
