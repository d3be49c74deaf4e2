import json
import math
from pathlib import Path

import numpy as np
import pytest

from gpelab.cli import main
from gpelab.errors import ConfigError
from gpelab.grid import Grid2D, ScalarField
from gpelab.manifest import (
    config_hash,
    dump_field,
    load_field,
    read_csv,
    resolve_config,
    write_csv,
)


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def townes_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("townes")
    code = run_cli("townes", "--out", str(out), "--check")
    assert code == 0
    return out


def test_townes_outputs(townes_dir):
    doc = json.loads((townes_dir / "townes.json").read_text())
    assert doc["mass"] == pytest.approx(11.70, abs=0.01)
    schema, cols, rows = read_csv(townes_dir / "constants.csv")
    assert schema == "gpelab-constants/1"
    by_name = {r["name"]: float(r["value"]) for r in rows}
    assert by_name["astar"] == pytest.approx(11.700896519, rel=1e-8)
    man = json.loads((townes_dir / "manifest.json").read_text())
    assert man["command"] == "townes"
    assert man["config_sha256"] == config_hash(man["config"])


def test_malformed_config_exits_1(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"grid": {"n": 255}}))
    out = tmp_path / "out"
    assert run_cli("townes", "--config", str(cfg), "--out", str(out)) == 1
    assert not (out / "townes.json").exists()
    cfg.write_text("{not json")
    assert run_cli("townes", "--config", str(cfg), "--out", str(out)) == 1
    cfg.write_text(json.dumps({"no_such_key": 1}))
    assert run_cli("townes", "--config", str(cfg), "--out", str(out)) == 1


def test_single_harmonic(tmp_path):
    out = tmp_path / "run"
    code = run_cli(
        "single", "--out", str(out), "--check",
        "--set", "grid.n=128", "--set", "grid.half_width=8.0",
    )
    assert code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["energy"] == pytest.approx(2.0, abs=1e-6)
    assert doc["converged"]
    field, header = load_field(out / "u1.bin")
    assert header["n"] == 128
    assert abs(field.grid.h**2 * float(np.sum(field.values**2)) - 1.0) < 1e-12


def test_unbounded_requires_supercritical(tmp_path):
    out = tmp_path / "u"
    assert run_cli("unbounded", "--out", str(out), "--set", "problem.a1=1.0") == 1


def test_unbounded_ladder_cli(tmp_path, profile):
    out = tmp_path / "u"
    a1 = 1.1 * profile.mass
    code = run_cli(
        "unbounded", "--out", str(out),
        "--set", f"problem.a1={a1}",
        "--set", "grid.half_width=6.0", "--set", "grid.n=1920",
    )
    assert code == 0
    schema, cols, rows = read_csv(out / "unbounded.csv")
    energies = [float(r["energy"]) for r in rows]
    assert all(b < a for a, b in zip(energies, energies[1:]))
    assert (out / "unbounded.svg").exists()


def test_lemma_a_cli(tmp_path):
    out = tmp_path / "la"
    code = run_cli(
        "lemma-a", "--out", str(out), "--check",
        "--set", 'lemma_a.kappas=[10000.0]',
        "--set", 'lemma_a.ms=[1.0,2.0,4.0]',
        "--set", 'lemma_a.ps=[2.0]',
        "--set", 'lemma_a.a_fractions=[0.999]',
    )
    assert code == 0
    schema, cols, rows = read_csv(out / "lemma_a.csv")
    assert schema == "gpelab-lemma-a/1"
    ratios = [float(r["bound_ratio"]) for r in rows]
    assert ratios == sorted(ratios)
    assert max(float(r["brute_rel_err"]) for r in rows) < 1e-6


def test_report_without_diagnostics(tmp_path):
    assert run_cli("report", "--out", str(tmp_path)) == 1


def test_resolve_config_rejects_unknown():
    with pytest.raises(ConfigError):
        resolve_config({"grid": {"m": 7}})
    with pytest.raises(ConfigError):
        resolve_config({"problem": {"beta": -1.0}})


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    rows = [{"x": 1.0 / 3.0, "flag": True, "name": "a"}]
    write_csv(path, "s/1", ["x", "flag", "name"], rows)
    schema, cols, back = read_csv(path)
    assert schema == "s/1"
    assert float(back[0]["x"]) == 1.0 / 3.0  # 17 significant digits round-trip
    assert back[0]["flag"] == "true"


def test_field_dump_roundtrip(tmp_path):
    grid = Grid2D(8.0, 64)
    rng = np.random.default_rng(5)
    f = ScalarField(grid, rng.random((64, 64)))
    path = tmp_path / "f.bin"
    dump_field(path, f, {"component": 1})
    back, header = load_field(path)
    assert header["component"] == 1
    np.testing.assert_array_equal(back.values, f.values)
    assert back.grid == grid


def test_townes_rerun_byte_identical(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run_cli("townes", "--out", str(out1)) == 0
    assert run_cli("townes", "--out", str(out2)) == 0
    for name in ("townes.json", "constants.csv", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
