import json
import os

import pytest

from artifact import __version__
from artifact.cli import ConfigError, load_table, run


def run_json(tmp_path, argv, name="out.json"):
    path = tmp_path / name
    code = run(argv + ["--out", str(path)])
    return code, (json.loads(path.read_text()) if path.exists() else None)


@pytest.fixture
def ones(tmp_path):
    p = tmp_path / "ones.csv"
    p.write_text("b\n" + "1\n" * 200)
    return str(p)


def test_pbw_series_and_metadata(tmp_path, ones):
    code, doc = run_json(tmp_path, ["pbw", "--b-csv", ones, "--N", "100", "--emit", "series"])
    assert code == 0
    assert doc["result"]["a_N"] == "190569292"
    assert doc["result"]["series"][:6] == ["1", "1", "2", "3", "5", "7"]
    assert doc["version"] == __version__ and doc["tool"] == "artifact"
    assert doc["config"]["subcommand"] == "pbw" and doc["config"]["params"]["N"] == 100
    assert "out" not in doc["config"]
    assert list(doc["inputs"].values())[0] and len(list(doc["inputs"].values())[0]) == 64


def test_big_integers_are_strings(tmp_path):
    code, doc = run_json(tmp_path, ["pbw", "--b-csv", "one", "--N", "600"])
    assert code == 0
    a = doc["result"]["a_N"]
    assert isinstance(a, str) and int(a) > 2 ** 64


def test_empty_config_exit_2(tmp_path):
    for text in ("", "{}", "[]", '{"params": {}}', '{"subcommand": "nope"}'):
        cfg = tmp_path / "c.json"
        cfg.write_text(text)
        assert run(["--config", str(cfg)]) == 2
    assert run([]) == 2


def test_invalid_arguments_exit_2(tmp_path):
    assert run(["pbw", "--N", "5", "--b-csv", str(tmp_path / "missing.csv")]) == 2
    assert run(["pbw", "--N", "0", "--b-csv", "one"]) == 2
    assert run(["toeplitz", "--alpha", "x/y"]) == 2
    assert run(["toeplitz", "--alpha", "2", "--gamma", "3", "--emit", "rates"]) == 2
    assert run(["complexity", "--n-max", "4"]) == 2
    assert run(["frobnicate"]) == 2


def test_computation_error_exit_3_names_stage(tmp_path, capsys):
    flat = ",".join(["1"] * 70)
    assert run(["oscillate", "--f1-table", flat, "--f2-table", flat]) == 3
    assert "stage oscillator" in capsys.readouterr().err
    assert run(["pipeline", "--mode", "B1", "--n-max", "64",
                "--f1-table", flat, "--f2-table", flat]) == 3
    assert "stage oscillator" in capsys.readouterr().err


def test_check_failed_exit_4(tmp_path):
    code, doc = run_json(tmp_path, ["pipeline", "--mode", "B1", "--n-max", "64",
                                    "--f1-table", "sqrt"])
    assert code == 4
    assert doc["ok"] is False and doc["failed_checks"]


def test_pipeline_b1_default_exit_0(tmp_path):
    code, doc = run_json(tmp_path, ["pipeline", "--mode", "B1", "--n-max", "128"])
    assert code == 0
    osc = doc["result"]["oscillation"]
    assert "16" in osc["slow_hits"] and "2" in osc["fast_hits"]
    assert all(c["ok"] for c in doc["result"]["checks"])


def test_huge_integers_serialized_in_full(tmp_path):
    code, doc = run_json(tmp_path, ["pipeline", "--mode", "B2", "--n-max", "64"])
    assert code == 0
    m2 = doc["result"]["stages"][1]["m"]
    assert isinstance(m2, str) and len(m2) > 400


def test_global_flags_either_side(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["--format", "csv", "--out", str(a), "pbw", "--b-csv", "one", "--N", "20"]) == 0
    assert run(["pbw", "--b-csv", "one", "--N", "20", "--format", "csv", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "n,a" and lines[-1] == "20,627"


def test_config_file_matches_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "gkdim",
                               "params": {"g_csv": "square", "N": 4096, "scale": "7,3"}}))
    x, y = tmp_path / "x.json", tmp_path / "y.json"
    assert run(["--config", str(cfg), "--out", str(x)]) == 0
    assert run(["gkdim", "--g-csv", "square", "--N", "4096", "--scale", "7,3",
                "--out", str(y)]) == 0
    assert x.read_bytes() == y.read_bytes()
    doc = json.loads(x.read_text())
    assert 1.95 <= doc["result"]["limsup_est"] <= 2.05 and doc["result"]["scaling"]["ok"]


@pytest.mark.parametrize("argv", [
    ["toeplitz", "--emit", "envelopes", "--seed", "5"],
    ["wreath", "--mode", "verify", "--trials", "10", "--seed", "9"],
    ["complexity", "--stream", "thue-morse", "--n-max", "16"],
    ["sbm", "--f-table", "double", "--len", "32", "--emit", "word", "--delta-table", "ceil-sqrt"],
])
def test_deterministic_artifacts(tmp_path, argv):
    assert run(argv + ["--out", str(tmp_path / "1.json")]) == 0
    assert run(argv + ["--out", str(tmp_path / "2.json")]) == 0
    assert (tmp_path / "1.json").read_bytes() == (tmp_path / "2.json").read_bytes()


def test_seed_changes_toeplitz_word(tmp_path):
    base = ["toeplitz", "--emit", "word", "--prefix-len", "625"]
    _, a = run_json(tmp_path, base + ["--seed", "1"], "a.json")
    _, b = run_json(tmp_path, base + ["--seed", "2"], "b.json")
    assert a["config"]["seed"] == 1
    assert a["result"]["word"] != b["result"]["word"]


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    out = tmp_path / "sub" / "r.json"
    out.parent.mkdir()
    out.write_text("stale")
    assert run(["pbw", "--b-csv", "one", "--N", "10", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["result"]["a_N"] == "42"
    assert os.listdir(out.parent) == ["r.json"]


def test_stdout_artifact_and_stderr_summary(capsys):
    assert run(["pbw", "--b-csv", "one", "--N", "10"]) == 0
    cap = capsys.readouterr()
    assert json.loads(cap.out)["result"]["a_N"] == "42"
    assert cap.err.count("\n") == 1 and "a_10 = 42" in cap.err


def test_complexity_word_file(tmp_path):
    w = tmp_path / "w.txt"
    w.write_text(" ".join("0110100110010110" * 8) + "\n")
    code, doc = run_json(tmp_path, ["complexity", "--word-file", str(w), "--n-max", "4"])
    assert code == 0 and doc["result"]["p"] == ["2", "4", "6", "10"]


def test_table_loader(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("# comment\nn,v\n0,5\n1,7\n2,9\n")
    assert load_table(str(p)).values == [5, 7, 9]
    assert load_table("3,4").values == [3, 4]
    assert load_table("sqrt").take(3, start=4) == [2, 2, 2]
    p.write_text("0,5\n2,7\n")
    with pytest.raises(ConfigError):
        load_table(str(p))
    with pytest.raises(ConfigError):
        load_table("no-such-name")
