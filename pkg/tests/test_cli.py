import json
import subprocess
import sys

import pytest

from qorbit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_fold_example(capsys):
    code, doc = run(capsys, "fold", "--type", "A4", "--tau", "4,3,2,1")
    assert code == 0
    assert doc["folded_type"] == "BC2" and doc["non_reduced"] is True


def test_wminus_example(capsys):
    code, doc = run(capsys, "twist", "wminus", "--type", "A1", "--eps", "-1")
    assert code == 0 and doc["w_minus"] == ["e", "s1"]


def test_check_theosec(capsys):
    code, doc = run(capsys, "check", "theosec", "--max-rank", "3")
    assert code == 0 and doc["ok"]


def test_reduce_output_feeds_hc(capsys, tmp_path):
    code, doc = run(capsys, "twist", "reduce", "--type", "B2", "--eps", "1,-1")
    assert code == 0
    path = tmp_path / "datum.json"
    path.write_text(json.dumps(doc["reduced"]))
    code, hc = run(capsys, "hc", "--datum", str(path), "--weight", "1,0")
    assert code == 0 and hc["datum"] == doc["reduced"] and hc["image"]


def test_inline_json_matches_flags(capsys):
    _, a = run(capsys, "integral", "--type", "A1", "--eps", "1", "--gamma", "-2", "--weight", "1", "--q", "1/2")
    _, b = run(capsys, "integral", "--json", '{"type": "A1", "eps": [1], "gamma": [-2], "weight": [1], "q": "1/2"}')
    assert a == b and a["value"] == "13/4"


@pytest.mark.parametrize("argv", [
    ["rootsys", "--type", "F4"],
    ["twist", "compact", "--type", "A3", "--tau", "3,2,1", "--eps", "1,-1,1"],
    ["h2", "fusion", "--kind", "minus", "--c", "1", "--a", "2", "--N", "20"],
    ["verma", "--case", "A1xA1", "--eps", "1", "--lambda", "1/2*q^{-1}", "--tmax", "8"],
    ["check", "grassmannian"],
])
def test_output_is_deterministic(capsys, argv):
    texts = []
    for _ in range(2):
        assert main(list(argv)) == 0
        texts.append(capsys.readouterr().out)
    assert texts[0] == texts[1]


@pytest.mark.parametrize("argv,kind", [
    (["fold", "--type", "Z3"], "schema"),
    (["fold", "--type", "A3", "--tau", "2,1,3"], "validation"),
    (["twist", "shuffle", "--type", "A1", "--eps", "1"], "usage"),
    (["hc", "--type", "A2", "--eps", "1,1", "--weight", "1"], "shape"),
    (["h2", "model", "--kind", "minus", "--c", "1"], "missing"),
    (["verma", "--case", "B7", "--eps", "1", "--lambda", "2"], "schema"),
    (["check", "nothing"], "unknown_suite"),
    (["integral", "--json", "[1, 2]"], "json"),
])
def test_validation_errors_exit_2(capsys, argv, kind):
    code, doc = run(capsys, *argv)
    assert code == 2 and doc["error"]["kind"] == kind


def test_guard_exit_3(capsys):
    code, doc = run(capsys, "rootsys", "--type", "E8", "--guard", "100")
    assert code == 3 and doc["error"]["kind"] == "guard"


def test_out_file(capsys, tmp_path):
    path = tmp_path / "fold.json"
    assert main(["--out", str(path), "fold", "--type", "D4", "--tau", "1,2,4,3"]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["folded_type"] == "B3"


def test_rationals_are_p_over_q(capsys):
    _, doc = run(capsys, "rootsys", "--type", "B2")
    assert doc["symmetrizer"] == ["2/1", "1/1"] and doc["weyl_order"] == 8


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "qorbit", "twist", "classify", "--type", "A1", "--eps", "-1"],
                         capture_output=True, text=True, check=True)
    doc = json.loads(out.stdout)
    assert doc["flags"]["regular"] and not doc["flags"]["positive"]


def test_run_returns_code_and_document():
    from qorbit.cli import run as run_cli
    code, doc = run_cli(["twist", "wminus", "--type", "B2", "--eps", "-1,-1"])
    assert code == 0 and len(doc["w_minus"]) * doc["w_plus_order"] == doc["w_nu_order"]


def test_emitted_parameters_reparse(capsys):
    # verma: the lambda object goes back in unchanged
    code, doc = run(capsys, "verma", "--case", "A2_twisted", "--eps", "1", "--lambda", "q^{-1}", "--tmax", "6")
    assert code == 0
    params = {"case": doc["case"], "eps": doc["eps"], "lambda": doc["lambda"], "tmax": 6}
    code, again = run(capsys, "verma", "--json", json.dumps(params))
    assert code == 0 and again == doc
    # h2: a stratum document is itself a valid parameter set
    code, doc = run(capsys, "h2", "stratify", "--d", "-4", "--t", "3")
    code, model = run(capsys, "h2", "model", "--json", json.dumps(dict(doc["stratum"], N=30, which="+")))
    assert code == 0 and model["stratum"] == doc["stratum"]
