import csv
import json
import math
import subprocess
import sys

import pytest

from susydirac import __version__
from susydirac.cli import (CONFIG_SCHEMA, ConfigError, config_hash, dumps_json, fmt, load_config,
                           main, resolve_constants)

OSC = {"family": "oscillator", "omega": 1.0}
WIDE = {"x_min": -12, "x_max": 12, "n_points": 4001}


def run(tmp_path, cfg, *extra, name="cfg.json", out="out"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    code = main(["--config", str(path), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def read_json(path):
    return json.loads(path.read_text())


@pytest.mark.parametrize("value, text", [(1.0, "1"), (0.1, "0.10000000000000001"), (1 / 3, "0.33333333333333331"),
                                         (math.nan, "nan"), (None, "")])
def test_fmt(value, text):
    assert fmt(value) == text


def test_dumps_json_round_trip():
    obj = {"a": [1, 2.5, None, True], "b": {"c": math.pi, "d": math.inf}, "e": "x"}
    back = json.loads(dumps_json(obj))
    assert back["a"] == [1, 2.5, None, True]
    assert back["b"]["c"] == math.pi and back["b"]["d"] is None


def test_schema_has_no_open_objects():
    def walk(node):
        if isinstance(node, dict):
            if node.get("type") == "object":
                closed = node.get("additionalProperties") is False or (
                    "oneOf" in node and all(b.get("additionalProperties") is False for b in node["oneOf"]))
                assert closed
            for v in node.values():
                walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)
    walk(CONFIG_SCHEMA)


@pytest.mark.parametrize("cfg", [
    {"potential": {**OSC, "bogus": 1}, "task": {"type": "validate"}},
    {"potential": {"family": "oscillator"}, "task": {"type": "validate"}},
    {"potential": OSC, "task": {"type": "spectrum", "k": 0}},
    {"potential": OSC, "task": {"type": "nonsense"}},
    {"potential": OSC},
    {"potential": OSC, "grid": {"x_min": -1, "x_max": 1, "n_points": 2}, "task": {"type": "validate"}},
])
def test_schema_rejections(tmp_path, cfg):
    assert run(tmp_path, cfg)[0] == 2


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    with pytest.raises(ConfigError):
        load_config(bad)


def test_bad_flags(tmp_path):
    cfg = {"potential": OSC, "task": {"type": "validate"}}
    assert run(tmp_path, cfg, "--threads", "0")[0] == 2
    assert run(tmp_path, cfg, "--tolerance", "-1")[0] == 2


def test_validate(tmp_path):
    code, out = run(tmp_path, {"potential": OSC, "task": {"type": "validate"}})
    assert code == 0
    rep = read_json(out / "validate.json")
    assert rep["susy_condition"] == "pass" and rep["susy"] == "unbroken"
    assert rep["tool"] == "susydirac" and rep["version"] == __version__
    assert len(rep["config_hash"]) == 64


@pytest.mark.parametrize("task", [{"type": "validate"}, {"type": "spectrum", "k": 3}])
def test_susy_condition_failure(tmp_path, task):
    code, _ = run(tmp_path, {"potential": {**OSC, "V": [0, 1]}, "task": task})
    assert code == 3


def test_spectrum(tmp_path):
    code, out = run(tmp_path, {"potential": OSC, "grid": WIDE, "task": {"type": "spectrum", "k": 5, "spinors": True}})
    assert code == 0
    rep = read_json(out / "spectrum.json")
    lv = rep["levels"]
    assert lv[0]["E_minus"] == -1 and lv[0]["E_plus"] is None
    for n in range(1, 5):
        assert lv[n]["epsilon"] == pytest.approx(n, rel=1e-6)
        assert lv[n]["E_plus"] == pytest.approx(math.sqrt(1 + 2 * n), rel=1e-6)
    with open(out / "spinors.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "x" and rows[0][-2:] == ["config_hash", "version"]
    assert len(rows) == 4001 + 1


def test_constant_scalar_shifts_rest_energy(tmp_path):
    code, out = run(tmp_path, {"potential": {**OSC, "S": [0.5]}, "grid": WIDE, "task": {"type": "spectrum", "k": 2}})
    assert code == 0
    lv = read_json(out / "spectrum.json")["levels"]
    assert lv[0]["E_minus"] == -1.5
    assert lv[1]["E_plus"] == pytest.approx(math.sqrt(1.5**2 + 2), rel=1e-6)


def test_box_too_small(tmp_path):
    cfg = {"potential": OSC, "grid": {"x_min": -7, "x_max": 7, "n_points": 1401}, "task": {"type": "spectrum", "k": 20}}
    assert run(tmp_path, cfg)[0] == 4


def test_near_pole(tmp_path):
    cfg = {"potential": OSC, "task": {"type": "greens", "z": [-1], "points": [[0, 0]]}}
    assert run(tmp_path, cfg)[0] == 5


def test_regime_mismatch(tmp_path):
    cfg = {"potential": {"family": "power", "d": 2}, "task": {"type": "quasiclassical", "rule": "cbc"}}
    assert run(tmp_path, cfg)[0] == 6


def test_greens_csv(tmp_path):
    cfg = {"potential": OSC, "grid": WIDE,
           "task": {"type": "greens", "z": [0, [0, 0.5]], "points": [[0, 0], [0.3, -0.6]]}}
    code, out = run(tmp_path, cfg)
    assert code == 0
    with open(out / "greens.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    for r in rows:
        for key in ("G11", "G12", "G21", "G22"):
            for part in ("re", "im"):
                assert abs(float(r[f"{key}_{part}"]) - float(r[f"cf_{key}_{part}"])) < 1e-5
        assert float(r["residual"]) < 1e-5
        assert r["method"] == "grid_inverse"


def test_quasiclassical(tmp_path):
    cfg = {"potential": OSC, "task": {"type": "quasiclassical", "n_min": 0, "n_max": 3}}
    code, out = run(tmp_path, cfg)
    assert code == 0
    lv = read_json(out / "qc.json")["levels"]
    assert lv[0]["epsilon_qc"] == 0 and lv[0]["E_minus_qc"] == -1
    assert lv[3]["epsilon_qc"] == pytest.approx(3, abs=1e-8)


def test_threads_deterministic(tmp_path):
    cfg = {"potential": OSC, "grid": WIDE,
           "task": {"type": "greens", "z": [0, [0, 0.5], 1.2], "points": [[0, 0], [1.2, 0.6]]}}
    _, a = run(tmp_path, cfg, "--threads", "1", out="a")
    _, b = run(tmp_path, cfg, "--threads", "3", out="b")
    assert (a / "greens.csv").read_bytes() == (b / "greens.csv").read_bytes()


def test_rerun_identical(tmp_path):
    cfg = {"potential": {"family": "power", "d": 2}, "task": {"type": "quasiclassical", "n_min": 1, "n_max": 3}}
    _, a = run(tmp_path, cfg, out="a")
    _, b = run(tmp_path, cfg, out="b")
    assert (a / "qc.json").read_bytes() == (b / "qc.json").read_bytes()


def test_env_override(tmp_path, monkeypatch):
    cfg = {"potential": OSC, "grid": WIDE, "task": {"type": "spectrum", "k": 2}}
    _, a = run(tmp_path, cfg, out="a")
    monkeypatch.setenv("SUSYDIRAC_M", "2")
    _, b = run(tmp_path, cfg, out="b")
    ra, rb = read_json(a / "spectrum.json"), read_json(b / "spectrum.json")
    assert ra["config_hash"] != rb["config_hash"]
    # mc² = 2, ħω = 1: E₁ = sqrt(4 + 4)
    assert rb["levels"][1]["E_plus"] == pytest.approx(math.sqrt(8), rel=1e-6)
    monkeypatch.setenv("SUSYDIRAC_C", "abc")
    assert run(tmp_path, cfg, out="c")[0] == 2


def test_resolve_constants_precedence():
    c = resolve_constants({"constants": {"m": 3.0, "hbar": 0.5}}, environ={"SUSYDIRAC_HBAR": "0.25"})
    assert (c.m, c.c, c.hbar) == (3.0, 1.0, 0.25)


def test_config_hash_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_tabulated_potential(tmp_path):
    import numpy as np
    x = np.linspace(-8, 8, 801)
    np.savetxt(tmp_path / "phi.csv", np.column_stack([x, x / math.sqrt(2)]), delimiter=",")
    cfg = {"potential": {"family": "tabulated", "file": "phi.csv"},
           "grid": {"x_min": -7.5, "x_max": 7.5, "n_points": 1501}, "task": {"type": "spectrum", "k": 3}}
    code, out = run(tmp_path, cfg)
    assert code == 0
    lv = read_json(out / "spectrum.json")["levels"]
    assert lv[2]["epsilon"] == pytest.approx(2, rel=1e-4)


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"potential": OSC, "task": {"type": "validate"}}))
    res = subprocess.run([sys.executable, "-m", "susydirac", "--config", str(cfg), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    res = subprocess.run([sys.executable, "-m", "susydirac", "--version"], capture_output=True, text=True)
    assert __version__ in res.stdout
