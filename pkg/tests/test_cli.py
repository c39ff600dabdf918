import json

import numpy as np
import pytest

from cubemax.cli import run
from cubemax.cube import write_cube_function


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_l1_prints_n_plus_one(capsys):
    code, out, _ = _run(capsys, "norm", "l1", "--n", "2")
    assert code == 0 and out.strip() == "3"


def test_krawtchouk_verify_n0(capsys):
    code, out, _ = _run(capsys, "krawtchouk", "verify", "--n", "0")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["passed"]
    assert {r["check"] for r in doc["results"]} == {"KRAWT-SYM", "KRAWT-ORTHO"}


def test_krawtchouk_table_csv(capsys):
    code, out, _ = _run(capsys, "krawtchouk", "table", "--n", "3", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,k,x,num,den,float"
    assert "3,1,1,1,3,0.33333333333333331" in lines


def test_roots_all_k_fails_half_passes(capsys):
    assert _run(capsys, "krawtchouk", "roots", "--n-max", "6")[0] == 1
    assert _run(capsys, "krawtchouk", "roots", "--n-max", "6", "--k-range", "half")[0] == 0


def test_usage_errors(capsys):
    assert _run(capsys, "bogus")[0] == 2
    assert _run(capsys, "norm", "l1")[0] == 2
    code, _, err = _run(capsys, "norm", "l1", "--n", "40")
    assert code == 2 and "CapacityError" in err
    assert _run(capsys, "norm", "l1", "--n", "2", "--unknown-flag")[0] == 2


def test_bad_input_file(tmp_path, capsys):
    bad = tmp_path / "f.bin"
    bad.write_bytes(b"nonsense")
    code, _, err = _run(capsys, "transform", "wht", "--input", str(bad))
    assert code == 2 and "neither" in err
    code, _, err = _run(capsys, "transform", "wht", "--input", str(tmp_path / "missing"))
    assert code == 2


def test_transform_wht(tmp_path, capsys):
    path = tmp_path / "f.json"
    write_cube_function(path, np.array([1.0, 0.0]))
    code, out, _ = _run(capsys, "transform", "wht", "--input", str(path), "--format", "csv")
    assert code == 0
    assert out.splitlines()[1].startswith("0,0.7071067811865475")


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 3, "seed": 5}))
    out_path = tmp_path / "r.json"
    code, _, _ = _run(capsys, "verify", "abel", "--config", str(cfg), "--n", "4",
                      "--out", str(out_path))
    doc = json.loads(out_path.read_text())
    assert code == 0
    assert doc["config"]["n"] == 4 and doc["config"]["seed"] == 5
    cfg.write_text(json.dumps({"bogus": 1}))
    assert _run(capsys, "verify", "abel", "--config", str(cfg))[0] == 2


def test_report_deterministic(tmp_path, capsys):
    docs = []
    for i in range(2):
        p = tmp_path / "r.json"
        run(["game", "anneal", "--n", "4", "--m", "3", "--seed", "9", "--budget", "100",
             "--out", str(p)])
        doc = json.loads(p.read_text())
        doc.pop("wall_time")
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]


def test_game_center(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"n": 4, "kind": "vertex", "marked": [0]}))
    code, out, _ = _run(capsys, "game", "center", "--marking", str(m))
    doc = json.loads(out)
    assert code == 0 and doc["results"][0]["details"]["value"] == "1/6"


def test_game_exhaustive_csv(capsys):
    code, out, _ = _run(capsys, "game", "exhaustive", "--n", "3", "--format", "csv")
    rows = out.splitlines()
    assert code == 0 and rows[0] == "n,m,epsilon,value,ratio,method,seed"
    assert rows[2].startswith("3,1,1/8,1/3,")


def test_norm_estimate_writes_witness(tmp_path, capsys):
    w = tmp_path / "w.bin"
    code, out, _ = _run(capsys, "norm", "estimate", "--n", "3", "--restarts", "2",
                        "--witness", str(w))
    doc = json.loads(out)
    assert code == 0 and w.exists()
    assert doc["results"][0]["details"]["witness_file"] == str(w)


def test_verify_commands(capsys):
    for argv in (["verify", "diff", "--n", "5"], ["verify", "ncompare", "--n", "4"],
                 ["verify", "truncate", "--n", "5"], ["verify", "binomlb", "--n", "12"],
                 ["verify", "chain", "--n", "9"], ["verify", "stein", "--n", "6"]):
        code, out, _ = _run(capsys, *argv)
        assert code == 0, (argv, out[-500:])


def test_claim_ids_in_reports(capsys):
    code, out, _ = _run(capsys, "verify", "chain", "--n", "4")
    assert json.loads(out)["results"][0]["check"] == "CHAIN-BOUND"


@pytest.mark.slow
def test_suite(tmp_path, capsys):
    out = tmp_path / "suite.json"
    code, _, _ = _run(capsys, "suite", "--n-max", "12", "--seed", "42", "--out", str(out))
    doc = json.loads(out.read_text())
    assert code == 0 and doc["summary"]["passed"]
    for claim in ("KRAWT-ORTHO", "KRAWT-DECAY", "STEIN-D", "BINOM-LB", "ERGODIC-W11",
                  "MARCINKIEWICZ-2", "L1-NORM", "GAME-COROLLARY", "CHAIN-BOUND"):
        assert claim in doc["summary"]["claims"]
    assert {d["check"] for d in doc["known_deviations"]} == {"KRAWT-ROOTS", "STEIN-R"}
