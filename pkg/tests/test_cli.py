import csv
import io
import json

import pytest
import yaml

from punclab.cli import config_digest, main


def run(tmp_path, cfg, *extra, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    out = tmp_path / (name + ".out")
    code = main([extra[0], "--config", str(path), "--out", str(out), *extra[1:]])
    return code, out.read_text() if out.exists() else ""


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_certify_hadamard(tmp_path):
    code, text = run(tmp_path, {"seed": 1, "field": {"q": 2}, "mother": {"kind": "hadamard", "k": 3}}, "certify")
    assert code == 0
    (row,) = rows_of(text)
    assert float(row["bias"]) == 0 and float(row["distance_eta"]) == 0
    assert row["seed"] == "1" and row["version"].startswith("punclab")
    assert row["config_digest"] == config_digest({"seed": 1, "field": {"q": 2}, "mother": {"kind": "hadamard", "k": 3}})


def test_missing_seed_is_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, {"field": {"q": 2}, "mother": {"kind": "hadamard", "k": 3}}, "certify")
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"


def test_empty_rate_grid_is_config_error(tmp_path):
    cfg = {"seed": 1, "field": {"q": 2}, "n": 8, "trials": 5, "rates": [], "property": {"rho": "1/4", "L": 2}}
    assert run(tmp_path, cfg, "threshold")[0] == 2


def test_unknown_field_order(tmp_path):
    assert run(tmp_path, {"seed": 1, "field": {"q": 6}, "mother": {"kind": "hadamard", "k": 2}}, "certify")[0] == 2


def test_cap_exceeded_exit(tmp_path):
    cfg = {"seed": 1, "field": {"q": 2}, "mother": {"kind": "random", "k": 40, "m": 60}}
    assert run(tmp_path, cfg, "certify")[0] == 3


def test_threshold_deterministic_across_threads(tmp_path):
    cfg = {
        "seed": 9,
        "field": {"q": 2},
        "n": 8,
        "trials": 30,
        "rates": ["1/8", "1/4", "3/8", "1/2"],
        "property": {"rho": "1/4", "L": 2},
    }
    a = run(tmp_path, cfg, "threshold", name="a.yaml")[1]
    b = run(tmp_path, cfg, "threshold", "--threads", "3", name="b.yaml")[1]
    assert a == b
    rows = rows_of(a)
    assert {"trials", "freq", "ci_low", "ci_high"} <= set(rows[0])


def test_seed_flag_overrides_config(tmp_path):
    cfg = {"seed": 1, "field": {"q": 2}, "n": 8, "trials": 10, "rates": ["1/4"], "property": {"rho": "1/4", "L": 2}}
    _, text = run(tmp_path, cfg, "threshold", "--seed", "5")
    assert rows_of(text)[0]["seed"] == "5"


def test_witness_replay_and_tamper(tmp_path):
    cfg = {
        "seed": 3,
        "field": {"q": 2},
        "mother": {"kind": "hadamard", "k": 3},
        "property": {"rho": "1/4", "L": 2},
        "format": "json",
    }
    code, text = run(tmp_path, cfg, "ld-check")
    assert code == 0
    doc = json.loads(text)
    assert doc["result"]["verdict"] == "bad"
    rec = tmp_path / "rec.json"
    rec.write_text(text)
    assert main(["replay", "--config", str(rec), "--out", str(tmp_path / "v")]) == 0
    assert json.loads((tmp_path / "v").read_text())["verdict"] == "verified"
    wit = doc["result"]["witness"]
    wit["center"] = [1 - c for c in wit["center"]]
    rec.write_text(json.dumps(doc))
    assert main(["replay", "--config", str(rec), "--out", str(tmp_path / "v")]) == 4
    assert json.loads((tmp_path / "v").read_text())["verdict"] == "mismatch"


def test_lr_check_runs(tmp_path):
    cfg = {
        "seed": 3,
        "field": {"q": 3},
        "mother": {"kind": "random", "k": 2, "m": 4},
        "property": {"rho": "1/4", "L": 2, "ell": 2},
    }
    code, text = run(tmp_path, cfg, "lr-check")
    assert code == 0 and rows_of(text)[0]["verdict"] in ("good", "bad")


def test_derand_replay(tmp_path):
    cfg = {
        "seed": 4,
        "field": {"q": 2},
        "mother": {"kind": "hadamard", "k": 8, "repeat": 2},
        "n": 16,
        "b": 2,
        "eps": 0.1,
        "format": "json",
    }
    code, text = run(tmp_path, cfg, "derand")
    assert code == 0
    rec = tmp_path / "prov.json"
    rec.write_text(text)
    assert main(["replay", "--config", str(rec), "--out", str(tmp_path / "v")]) == 0
    doc = json.loads(text)
    doc["result"]["subset"][0] += 1
    rec.write_text(json.dumps(doc))
    assert main(["replay", "--config", str(rec), "--out", str(tmp_path / "v")]) == 4


def test_derand_precondition_failure(tmp_path):
    cfg = {"seed": 4, "field": {"q": 2}, "mother": {"kind": "hadamard", "k": 8}, "n": 16, "b": 2, "eps": 0.1}
    assert run(tmp_path, cfg, "derand")[0] == 2


def test_lemma_subcommand(tmp_path):
    cfg = {"seed": 2, "lemmas": ["vazirani", "kl-tail"], "instances": 5}
    code, text = run(tmp_path, cfg, "lemma")
    assert code == 0 and len(rows_of(text)) == 10


def test_channel_subcommand(tmp_path):
    cfg = {
        "seed": 2,
        "field": {"q": 2},
        "noise": {"masses": {1: "0.05"}},
        "rate": "0.4",
        "lengths": [10],
        "codeword_trials": 3,
        "noise_trials": 5,
    }
    code, text = run(tmp_path, cfg, "channel")
    (row,) = rows_of(text)
    assert code == 0 and row["hypothesis"] == "in-hypothesis" and row["trials"] == "15"


def test_puncture_control_and_rate_deficit(tmp_path):
    cfg = {"seed": 2, "field": {"q": 2}, "n": 16, "trials": 20, "control": {"m": 64, "k": 2}}
    code, text = run(tmp_path, cfg, "puncture")
    assert code == 0 and rows_of(text)[0]["freq"] == "1.0"
    cfg = {"seed": 2, "field": {"q": 2}, "n": 12, "trials": 50, "experiment": "rate-deficit", "mother": {"kind": "hadamard", "k": 3}}
    code, text = run(tmp_path, cfg, "puncture", name="rd.yaml")
    assert code == 0 and rows_of(text)[0]["holds"] == "True"


def test_console_script_installed():
    import shutil
    import subprocess

    exe = shutil.which("punclab")
    if exe is None:
        pytest.skip("console script not on PATH")
    res = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "replay" in res.stdout
