import json
import subprocess
import sys

import pytest

from ellipt import solvers
from ellipt.cli import run


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def _out(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


TWO_DISCS = {"dim": 2, "ellipses": [{"a": [1, 0], "b": [0, 1]}],
             "target": {"a": [0.5, 0], "b": [0, 0.5]}}


def test_ee_decide_exact(tmp_path, capsys):
    path = _write(tmp_path, "two_discs.json", TWO_DISCS)
    assert run(["ee", "decide", "--method", "exact", "-i", path]) == 0
    out = _out(capsys)
    assert out["verdict"] == "Inside" and out["q"] == 1.0


def test_ee_decide_expect_inside(tmp_path, capsys):
    obj = dict(TWO_DISCS, target={"a": [1.5, 0], "b": [0, 0]})
    path = _write(tmp_path, "out.json", obj)
    assert run(["ee", "decide", "-i", path]) == 0
    assert _out(capsys)["verdict"] == "Outside"
    assert run(["ee", "decide", "-i", path, "--expect-inside"]) == 1


def test_ee_norm_and_reduce(tmp_path, capsys):
    path = _write(tmp_path, "w.json", {"dim": 2, "ellipses": [{"a": [1, 0], "b": [0, 1]}],
                                       "w": [3, 4]})
    assert run(["ee", "norm", "-i", path]) == 0
    assert _out(capsys)["hi"] == pytest.approx(5.0, abs=1e-6)
    assert run(["ee", "norm", "-i", path, "--method", "projection", "--n", "8"]) == 0
    out = _out(capsys)
    assert out["lo"] <= 5.0 + 1e-9 <= out["hi"] + 1e-6 and out["level"] == 8
    path = _write(tmp_path, "r.json", {"dim": 2, "ellipses": [{"a": [1, 0], "b": [0, 1]},
                                                              {"a": [0.5, 0], "b": [0, 0.5]}]})
    assert run(["ee", "reduce", "-i", path]) == 0
    out = _out(capsys)
    assert out["kept"] == [0] and out["removed"] == 1


def test_jsr_appendix(tmp_path, capsys):
    path = _write(tmp_path, "appendix_T.json", {"family": "appendix", "alpha": 0.0, "beta": 0.0})
    assert run(["jsr", "-i", path, "--alpha", "0.3", "--beta", "-0.4"]) == 0
    out = _out(capsys)
    assert out["jsr"] == pytest.approx(1.0, abs=1e-8)
    assert sorted(out["smp"]) == [0, 1]


def test_lyapunov_matrices(tmp_path, capsys):
    path = _write(tmp_path, "m.json", {"matrices": [[[0.0, -0.9], [0.9, 0.0]]]})
    assert run(["lyapunov", "-i", path, "--verify"]) == 0
    out = _out(capsys)
    assert out["converged"] and out["reverified"] and out["n_vertices"] == 1
    path = _write(tmp_path, "real.json", {"matrices": [[[2.0, 0.0], [0.0, 1.0]]]})
    assert run(["lyapunov", "-i", path]) == 1
    assert "error" in _out(capsys)


def test_hardness(capsys):
    assert run(["hardness", "--n", "3"]) == 0
    out = _out(capsys)
    assert out["local_maxima"] == 8 and out["distinct_values"] == 8
    assert out["polyhedron"]["n_facets"] <= 9


def test_usage_errors(tmp_path, capsys, caplog):
    assert run(["ee", "decide"]) == 2
    assert run(["hardness", "--n", "1"]) == 2
    assert run(["ee", "decide", "-i", str(tmp_path / "missing.json")]) == 2
    path = _write(tmp_path, "bad.json", '{"dim": 2,\n "ellipses": [}')
    assert run(["ee", "decide", "-i", path]) == 2
    assert "malformed JSON at line 2, column" in caplog.text
    path = _write(tmp_path, "notarget.json", {"dim": 2, "ellipses": [{"a": [1, 0]}]})
    assert run(["ee", "decide", "-i", path]) == 2
    d4 = {"dim": 4, "ellipses": [{"a": [1, 0, 0, 0], "b": [0, 1, 0, 0]}],
          "target": {"a": [0.1, 0, 0, 0], "b": [0, 0, 0.1, 0]}}
    assert run(["ee", "decide", "--method", "exact", "-i", _write(tmp_path, "d4.json", d4)]) == 2


def test_solver_failure_exit(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise solvers.SolverError("forced")
    monkeypatch.setattr("ellipt.engine.cpm_value", boom)
    path = _write(tmp_path, "x.json", dict(TWO_DISCS, target={"a": [0.5, 0.1], "b": [0.2, 0.7]},
                                           ellipses=[{"a": [1, 0], "b": [0, 0.3]},
                                                     {"a": [0.3, 0], "b": [0, 1]}]))
    assert run(["ee", "decide", "--method", "mixed", "-i", path]) == 3


def test_bench_dataset_roundtrip(tmp_path, capsys):
    out_dir = tmp_path / "ds"
    assert run(["bench", "dataset", "--out", str(out_dir), "--d", "2", "--N", "4",
                "--instances", "2"]) == 0
    files = _out(capsys)["files"]
    assert len(files) == 2
    for f in files:
        assert run(["ee", "decide", "-i", f]) == 0
        assert _out(capsys)["verdict"] in ("Inside", "Outside")


def test_bench_csv_and_env_seed(tmp_path, capsys, monkeypatch):
    out_dir = tmp_path / "b"
    monkeypatch.setenv("ELLIPT_SEED", "5")
    assert run(["bench", "vertexfrac", "--out", str(out_dir), "--points", "--d", "2",
                "--sizes", "5,10", "--seeds", "2", "--jobs", "2"]) == 0
    text = (out_dir / "vertexfrac.csv").read_text().splitlines()
    assert text[0].startswith("schema,run_id")
    assert len(text) == 1 + 4
    assert {line.split(",")[5] for line in text[1:]} == {"5", "6"}
    assert run(["bench", "accuracy", "--out", str(out_dir), "--d", "2", "--N", "3",
                "--instances", "1"]) == 0
    assert _out(capsys)["records"] > 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ellipt.cli", "hardness", "--n", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["local_maxima"] == 4
