import csv
import io
import json
import math

import pytest

from convexent.cli import main, parse_literal
from convexent.bodies import Box
from convexent.measures import Gaussian, UniformOnBody
from convexent.results import FIELDS

FAST = ["--samples", "3000", "--inner", "32", "--volume-samples", "5000",
        "--search-budget", "60", "--search-samples", "1000"]


def _value(out, key):
    for tok in out.split("  "):
        if tok.strip().startswith(key + " ="):
            return float(tok.split("=")[1])
    raise AssertionError(out)


def test_entropy_commands(capsys):
    assert main(["entropy", "--family", "uniform", "--dim", "2"]) == 0
    assert _value(capsys.readouterr().out, "h") == pytest.approx(0.0, abs=1e-12)
    assert main(["entropy", "--family", "pareto", "--beta", "3", "--dim", "1"]) == 0
    assert _value(capsys.readouterr().out, "h") == pytest.approx(1.5 - math.log(2))
    assert main(["entropy", "--sum", "uniform01,uniform01", "--samples", "50000"]) == 0
    out = capsys.readouterr().out
    assert abs(_value(out, "h") - 0.5) < 3 * _value(out, "stderr") + 0.01


def test_volume_and_mposition(capsys):
    assert main(["volume", "--body", "ball", "--dim", "3", "--r", "1"]) == 0
    assert _value(capsys.readouterr().out, "volume") == pytest.approx(4 * math.pi / 3, rel=1e-6)
    assert main(["mposition", "--body", "ellipsoid", "--aspect", "10", "--dim", "2"]) == 0
    out = capsys.readouterr().out
    assert float(out.split("objective =")[1].split()[0]) >= 0.98


def test_bad_configuration_exits_2(capsys):
    assert main(["verify", "--dim", "9"]) == 2
    assert "dimension" in capsys.readouterr().err
    assert main(["demo-counterexample", "--betas", "3,0.5"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--format", "xml"])
    assert exc.value.code == 2


def test_verify_json_and_csv_reports(tmp_path):
    out = tmp_path / "r.json"
    args = ["verify", "--suite", "renyi2,volsum,berwald", "--dim", "1,2", "--seed", "5", *FAST]
    assert main(args + ["--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc["header"]) == {"tool_version", "root_seed", "config_digest"}
    assert doc["header"]["root_seed"] == 5
    assert all(list(r) == list(FIELDS) for r in doc["records"])
    csv_out = tmp_path / "r.csv"
    assert main(args + ["--out", str(csv_out), "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(csv_out.read_text())))
    assert tuple(rows[0]) == FIELDS and len(rows) == len(doc["records"]) + 1


def test_verify_is_worker_invariant(tmp_path, monkeypatch):
    args = ["verify", "--suite", "epi,submod,vol_maxnorm", "--dim", "1,2", *FAST]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--workers", "1", "--out", str(a)]) == 0
    monkeypatch.setenv("CONVEXENT_WORKERS", "6")
    assert main(args + ["--workers", "1", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_instance_file(tmp_path):
    doc = {"instances": [
        {"check": "epi", "instance": "file gauss",
         "x": {"type": "gaussian", "mean": [0, 0], "cov": [[1, 0], [0, 1]]},
         "y": {"type": "gaussian", "mean": [0, 0], "cov": [[2, 0], [0, 2]]}},
        {"check": "berwald", "body": {"type": "cube", "n": 2}, "phi": {"w": [1, 1], "c": 0.5},
         "p": 1, "q": 2},
    ]}
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "none", "--instances", str(path), "--out", str(out),
                 *FAST]) == 0
    recs = json.loads(out.read_text())["records"]
    assert {r["name"] for r in recs} == {"epi", "berwald"}
    path.write_text(json.dumps({"instances": [{"check": "nope"}]}))
    assert main(["verify", "--instances", str(path), "--out", str(out)]) == 2


def test_literals():
    d = parse_literal({"type": "uniform", "body": {"type": "box", "lo": [0, 0], "hi": [1, 2]}})
    assert isinstance(d, UniformOnBody) and d.volume == pytest.approx(2.0)
    g = parse_literal({"type": "gaussian", "mean": [0], "cov": [[3.0]]})
    assert isinstance(g, Gaussian)
    assert isinstance(parse_literal([{"type": "cube", "n": 2}])[0], Box)
