import json

import pytest

from freeball.cli import REPRODUCE_IDS, main
from freeball.reproduce import compare, load_expected, run

POLY = '{"d": 2, "terms": [{"word": [], "coeff": 1}, {"word": [1, 2], "coeff": -0.5}, ' \
       '{"word": [2, 1], "coeff": -0.5}]}'


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval(capsys):
    code, out, _ = call(capsys, "eval", "--expr", "inv(1 - Z1)",
                        "--point", '{"matrices": [{"rows": 1, "cols": 1, "data": [[0.5, 0]]}]}')
    rep = json.loads(out)
    assert code == 0 and rep["ok"]
    assert rep["report"]["value"]["data"] == [[2.0, 0.0]]
    assert {"artifact", "version", "command", "config", "report", "ok"} <= set(rep)


def test_bad_input_exit_code(capsys):
    code, out, err = call(capsys, "eval", "--expr", "1 + ")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "syntax_error"
    code, _, err = call(capsys, "eval", "--expr", "Z1", "-d", "1",
                        "--point", '{"matrices": [{"rows": 1, "cols": 1, "data": [[1, 0]]}, '
                                   '{"rows": 1, "cols": 1, "data": [[1, 0]]}]}')
    assert code == 2


def test_failed_verdict_exit_code(capsys):
    code, out, _ = call(capsys, "stable", "--expr", "1 - 2*Z1", "--levels", "1", "--samples", "200")
    rep = json.loads(out)
    assert code == 1 and not rep["ok"]
    assert rep["report"]["verdict"] == "singular_witness"


def test_linearize_verify(capsys):
    code, out, _ = call(capsys, "linearize", "--poly", POLY, "--verify", "--trials", "20")
    rep = json.loads(out)
    assert code == 0 and rep["report"]["verify"]["ok"] and rep["report"]["linearization"]["size"] == 3


def test_linearize_from_expression_text(capsys):
    code, out, _ = call(capsys, "linearize", "--poly", "1 - Z1*Z2*Z1", "--trials", "5")
    assert code == 0


def test_atom_and_realize(capsys):
    code, out, _ = call(capsys, "atom", "--poly", POLY)
    assert code == 0 and json.loads(out)["report"]["verdict"] == "atom"
    code, out, _ = call(capsys, "realize", "--expr", "inv(1 - Z1*Z2)", "--check", "--trials", "20")
    rep = json.loads(out)
    assert code == 0 and rep["report"]["check"]["ok"]


def test_specrad_and_irreducible(capsys, tmp_path):
    t = {"matrices": [{"rows": 2, "cols": 2, "data": [[0, 0], [1, 0], [0, 0], [0, 0]]},
                      {"rows": 2, "cols": 2, "data": [[0, 0], [0, 0], [1, 0], [0, 0]]}]}
    path = tmp_path / "t.json"
    path.write_text(json.dumps(t))
    code, out, _ = call(capsys, "specrad", "--tuple", str(path))
    assert code == 0 and json.loads(out)["report"]["value"] == pytest.approx(1.0)
    code, out, _ = call(capsys, "irreducible", "--tuple", str(path))
    assert code == 0 and json.loads(out)["report"]["algebra_dim"] == 4
    code, _, _ = call(capsys, "specrad", "--tuple", str(path), "--ball", "polydisk")
    assert code == 2


def test_same_seed_gives_identical_reports(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["stable", "--expr", "1 - 0.5*Z1*Z2 - 0.5*Z2*Z1", "--levels", "1,2",
                     "--samples", "50", "--seed", "7", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FREEBALL_SEED", "11")
    code, out, _ = call(capsys, "psum", "--levels", "1", "--samples", "20")
    assert code == 0 and json.loads(out)["config"]["seed"] == 11
    monkeypatch.setenv("FREEBALL_SEED", "eleven")
    code, _, _ = call(capsys, "psum", "--levels", "1", "--samples", "20")
    assert code == 2


def test_fm_check_command(capsys, tmp_path):
    from freeball.reproduce import fm_section_data
    path = tmp_path / "fm.json"
    path.write_text(json.dumps(fm_section_data().to_json()))
    code, out, _ = call(capsys, "fm-check", "--poly", POLY, "--fm", str(path), "--trials", "20")
    assert code == 0 and json.loads(out)["report"]["ok"]


@pytest.mark.parametrize("example_id", REPRODUCE_IDS)
def test_reproduce_matches_expected(example_id):
    rows = compare(run(example_id), load_expected(example_id))
    assert rows and all(r["ok"] for r in rows), [r for r in rows if not r["ok"]]


def test_reproduce_command(capsys):
    code, out, _ = call(capsys, "reproduce", "ex3.3")
    assert code == 0 and json.loads(out)["report"]["ok"]
