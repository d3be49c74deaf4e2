"""Run configuration, manifests, CSV writing, and field dumps.

Every command writes its outputs next to a manifest.json holding the fully
resolved configuration, the schema version, and a sha256 hash of the resolved
config; reruns from the same manifest are byte-identical (no timestamps,
fixed float formatting).
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import Grid2D, ScalarField

ARTIFACT_VERSION = "gpelab-artifacts/1"


# --------------------------------------------------------------------------
# config


_DEFAULTS = {
    "grid": {"half_width": 12.0, "n": 256},
    "solver": {
        "dt0": 0.1,
        "tol_residual": 1e-6,
        "tol_energy": 1e-12,
        "max_iter": 20000,
        "polish_iter": 8000,
    },
    "problem": {
        "a1": 0.0,
        "a2": 0.0,
        "beta": 0.0,
        "trap1": {"center": [0.0, 0.0], "exponent": 2.0},
        "trap2": {"center": [0.0, 0.0], "exponent": 2.0},
    },
    "schedule": {"fractions": [0.90, 0.95, 0.98, 0.99, 0.995]},
    "townes": {"tolerance": 1e-10, "r_max": 20.0, "step": 2e-3, "moment_ps": [1.0, 2.0, 3.0]},
    "trial": {"taus": [10.0, 20.0, 40.0], "c0": 3.0, "cutoff_radius": 1.0},
    "lemma_a": {
        "kappas": [1e4, 1e5, 1e6],
        "ms": [1.0, 2.0, 4.0],
        "ps": [1.0, 1.5, 2.0],
        "a_fractions": [0.99, 0.999],
    },
    "policy": {"max_n": 1024, "min_cells_per_eps": 8.0},
    "q_reference": "",
}


def _deep_merge(base: dict, over: dict, path="") -> dict:
    out = dict(base)
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path + key!r} must be a mapping")
            out[key] = _deep_merge(base[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def resolve_config(doc: dict | None, overrides: dict | None = None) -> dict:
    cfg = _deep_merge(_DEFAULTS, doc or {})
    if overrides:
        cfg = _deep_merge(cfg, overrides)
    validate_config(cfg)
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def validate_config(cfg: dict, allow_supercritical: bool = False):
    g = cfg["grid"]
    if not (isinstance(g["n"], int) and g["n"] % 2 == 0 and g["n"] >= 32):
        raise ConfigError("grid.n must be an even integer >= 32")
    if not g["half_width"] > 0:
        raise ConfigError("grid.half_width must be positive")
    p = cfg["problem"]
    for key in ("a1", "a2"):
        if p[key] < 0:
            raise ConfigError(f"problem.{key} must be >= 0")
    if p["beta"] < 0:
        raise ConfigError("problem.beta must be >= 0")
    for tkey in ("trap1", "trap2"):
        if p[tkey]["exponent"] <= 0:
            raise ConfigError(f"problem.{tkey}.exponent must be > 0")
    if any(f <= 0 for f in cfg["schedule"]["fractions"]):
        raise ConfigError("schedule fractions must be positive")


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(out_dir, command: str, cfg: dict, extra: dict | None = None):
    doc = {
        "artifact_version": ARTIFACT_VERSION,
        "command": command,
        "config": cfg,
        "config_sha256": config_hash(cfg),
    }
    if extra:
        doc.update(extra)
    path = Path(out_dir) / "manifest.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# --------------------------------------------------------------------------
# CSV


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"  # round-trips float64
    return str(v)


def write_csv(path, schema: str, columns, rows):
    """CSV with a '# schema' comment line, stable column order, 17 significant
    digits for floats."""
    lines = [f"# schema: {schema}", ",".join(columns)]
    for row in rows:
        if isinstance(row, dict):
            lines.append(",".join(_cell(row[c]) for c in columns))
        else:
            lines.append(",".join(_cell(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# schema:"):
        raise ConfigError(f"{path} is missing the schema header")
    schema = lines[0].split(":", 1)[1].strip()
    columns = lines[1].split(",")
    rows = [dict(zip(columns, ln.split(","))) for ln in lines[2:] if ln]
    return schema, columns, rows


# --------------------------------------------------------------------------
# field dumps


def dump_field(path, f: ScalarField, meta: dict | None = None):
    """JSON header line + row-major float64 little-endian payload."""
    header = {
        "artifact_version": ARTIFACT_VERSION,
        "half_width": f.grid.half_width,
        "n": f.grid.n,
        "dtype": "<f8",
        "order": "C",
    }
    if meta:
        header.update(meta)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field(path) -> tuple[ScalarField, dict]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        payload = fh.read()
    n = header["n"]
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n).copy()
    grid = Grid2D(header["half_width"], n)
    return ScalarField(grid, values), header
