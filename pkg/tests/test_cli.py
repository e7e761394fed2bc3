import hashlib
import json
import os
import subprocess
import sys

import pytest

from qcutstack.cli import main
from qcutstack.config import ConfigError, load_config, validate

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_build_identity(tmp_path):
    cfg = os.path.join(CONFIGS, "identity.json")
    assert main(["build", "--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "map_N4.csv").read_text().splitlines()
    assert lines[0].startswith("# qcutstack command=build config_hash=")
    assert lines[1] == "Q,image,provenance"
    assert len(lines[2:]) == 4
    assert [l.split(",")[:2] for l in lines[2:]] == [[str(q), str(q)] for q in range(4)]


def test_build_rotation_checksum_stable(tmp_path):
    cfg = write(tmp_path, "rot.json", {"map": {"kind": "rotation", "alpha": "610/987"}, "N": [1024]})
    for d in ("a", "b"):
        assert main(["build", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    a, b = read(tmp_path / "a" / "map_N1024.csv"), read(tmp_path / "b" / "map_N1024.csv")
    assert hashlib.sha256(a).hexdigest() == hashlib.sha256(b).hexdigest()
    rows = a.decode().splitlines()[2:]
    assert sorted(int(r.split(",")[1]) for r in rows) == list(range(1024))


@pytest.mark.parametrize("raw,field", [
    ({"map": {"kind": "rotation", "alpha": "1/0"}, "N": [4]}, "map.alpha"),
    ({"map": {"kind": "rotation", "alpha": "1/3"}, "N": [8, 4]}, "N"),
    ({"map": {"kind": "rotation", "alpha": "1/3"}}, "N"),
    ({"map": {"kind": "nope"}, "N": [4]}, "map.kind"),
    ({"map": {"kind": "rotation", "alpha": "1/3"}, "N": [4], "kappa": 0}, "kappa"),
    ({"map": {"kind": "rotation", "alpha": "1/3"}, "N": [4], "observables": [{"kind": "wobble"}]}, "observables[0]"),
])
def test_config_errors_name_the_field(tmp_path, capsys, raw, field):
    cfg = write(tmp_path, "bad.json", raw)
    assert main(["build", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert field in capsys.readouterr().err


def test_json_syntax_error_reports_line(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", '{\n "N": [4],\n "map": {,}\n}')
    assert main(["build", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_spectrum_identity_n8(tmp_path):
    cfg = write(tmp_path, "id.json", {"map": {"kind": "iet", "permutation": [1], "lengths": ["1/1"]}, "N": [8]})
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    a = read(tmp_path / "a" / "spectrum_N8.csv")
    assert a == read(tmp_path / "b" / "spectrum_N8.csv")
    rows = a.decode().splitlines()[2:]
    assert len(rows) == 8 and all(float(r.split(",")[-1]) < 1e-12 for r in rows)


def test_memory_guard(tmp_path, capsys):
    cfg = write(tmp_path, "big.json", {"map": {"kind": "rotation", "alpha": "1/3"}, "N": [64, 1 << 20]})
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 4
    assert "max_N" in capsys.readouterr().err


def test_oracle_limit_guard(tmp_path):
    cfg = write(tmp_path, "eg.json", {"map": {"kind": "rotation", "alpha": "610/987"}, "N": [128],
                                      "egorov": {"observable": {"kind": "cos_p", "k": 1}}})
    assert main(["egorov", "--config", cfg, "--out", str(tmp_path), "--oracle-limit", "64"]) == 4


def test_qlimit_recipes_and_env_seed(tmp_path, monkeypatch):
    cfg = os.path.join(CONFIGS, "thm2a_golden.json")
    out = tmp_path / "a"
    monkeypatch.setenv("QLIMIT_SEED", "7")
    assert main(["qlimit", "--config", cfg, "--out", str(out), "--threads", "2"]) == 0
    head = (out / "orbits.csv").read_text().splitlines()[0]
    assert "seed=7" in head and f"config_hash={load_config(cfg).with_seed(7).config_hash}" in head
    summary = json.loads((out / "summary.json").read_text())
    assert summary["fits"]["designated_distance"]["loglog_slope"] < 0
    assert main(["qlimit", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    assert read(out / "summary.json") == read(tmp_path / "b" / "summary.json")


def test_blend_recipe_has_blend_column(tmp_path):
    raw = json.load(open(os.path.join(CONFIGS, "thm2c_blend.json")))
    raw["N"] = [512, 1024, 2048]
    cfg = write(tmp_path, "blend.json", raw)
    assert main(["qlimit", "--config", cfg, "--out", str(tmp_path)]) == 0
    head = (tmp_path / "orbits.csv").read_text().splitlines()[1].split(",")
    assert "distance_target" in head and "distance_mu1" in head


def test_egorov_and_trace_commands(tmp_path):
    cfg = write(tmp_path, "e.json", {"map": {"kind": "rotation", "alpha": "610/987"}, "N": [32, 256],
                                     "egorov": {"bump": {"support": ["15/32", "17/32"], "margin": "3/32", "n_max": 16},
                                                "prop1": {"s": "377/987", "observable": {"kind": "cos", "k": 1}}}})
    assert main(["egorov", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["trace-check", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "trace.csv").read_text().splitlines()[2:]
    assert len(rows) == 40 and all(float(r.split(",")[6]) <= 1e-12 for r in rows)
    eg = (tmp_path / "egorov.csv").read_text().splitlines()
    assert eg[1].startswith("N,stage,epsilon_N,delta_N") and len(eg) == 4


def test_egorov_missing_section(tmp_path):
    cfg = write(tmp_path, "e.json", {"map": {"kind": "rotation", "alpha": "1/3"}, "N": [8]})
    assert main(["egorov", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_config_round_trip():
    cfg = load_config(os.path.join(CONFIGS, "thm2c_blend.json"))
    again = validate(json.loads(cfg.to_json()))
    assert again.to_json() == cfg.to_json() and again.config_hash == cfg.config_hash


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "qcutstack.cli", "build", "--config",
                        os.path.join(CONFIGS, "identity.json"), "--out", str(tmp_path)], capture_output=True)
    assert r.returncode == 0
