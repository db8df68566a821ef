"""
Run configuration: JSON schema, parsing and physical validation.

Complex numbers are written as ``{"re": x, "im": y}``.  Unknown keys are
rejected everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .model import FAMILIES, CouplingSet, XYZFieldParams, build_fields_xyz, xxz_couplings

TASKS = ("spectrum", "charges", "integrability", "dynamics", "lindblad", "perturb", "bethe",
         "couplings")

_COMPLEX = {
    "type": "object",
    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
    "required": ["re", "im"],
    "additionalProperties": False,
}
_WINDOW = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_BITS = {"type": "string", "pattern": "^[01]+$"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["task"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "N", "epsilon", "g"],
            "properties": {
                "kind": {"enum": ["xyz", "xxz"]},
                "family": {"enum": list(FAMILIES)},
                "N": {"type": "integer", "minimum": 1, "maximum": 12},
                "epsilon": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "g": {"type": "number"},
                "alpha_x": {"type": "number"},
                "alpha_y": {"type": "number"},
                "beta_x": {"type": "number"},
                "beta_y": {"type": "number"},
                "delta": _COMPLEX,
                "lambda": _COMPLEX,
                "bz": {"enum": ["one", "epsilon"]},
                "imaginary_x_coupling": {"type": "boolean"},
            },
        },
        "task": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": list(TASKS)},
                "charges": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "tag_tol": {"type": "number", "exclusiveMinimum": 0},
                "hamiltonian_charge": {"type": "integer", "minimum": 0},
                "weights": {"type": "array", "items": {"type": "number"}},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "sample_dt": {"type": "number", "exclusiveMinimum": 0},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "gamma": {"type": "number"},
                "jump_sites": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "initial": _BITS,
                "mode": {"enum": ["standard", "cp"]},
                "window": _WINDOW,
                "inner": {"enum": ["cpt", "standard"]},
                "scales": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "degeneracy_tol": {"type": "number", "exclusiveMinimum": 0},
                "M": {"type": "integer", "minimum": 1},
                "bethe_g": {"type": "number"},
                "d_grid": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}, "uniqueItems": True},
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    task: str
    params: dict
    model: dict | None
    output_dir: str | None
    formats: tuple

    def couplings(self) -> CouplingSet:
        if self.model is None:
            raise ConfigError(f"task {self.task!r} needs a model block")
        return couplings_from_model(self.model)


def _complex(v, default=0.0) -> complex:
    if v is None:
        return complex(default)
    return complex(v["re"], v["im"])


def couplings_from_model(m: dict) -> CouplingSet:
    eps = np.asarray(m["epsilon"], dtype=float)
    if m["kind"] == "xxz":
        cs = xxz_couplings(m.get("family", "rational"), eps, m["g"],
                           m.get("imaginary_x_coupling", False))
    else:
        p = XYZFieldParams(m.get("alpha_x", 1.0), m.get("alpha_y", 1.0),
                           m.get("beta_x", 0.5), m.get("beta_y", 0.5),
                           _complex(m.get("delta")), _complex(m.get("lambda")),
                           tuple(eps), m["g"])
        cs = build_fields_xyz(p)
    if m.get("bz", "one") == "epsilon":
        cs = cs.replace(Bz=eps.astype(complex))
    return cs


def _check_physics(cfg: dict) -> None:
    m = cfg.get("model")
    t = cfg["task"]
    if m is not None:
        eps = m["epsilon"]
        if len(eps) != m["N"]:
            raise ConfigError(f"epsilon has {len(eps)} entries but N = {m['N']}")
        if len(set(eps)) != len(eps):
            raise ConfigError("epsilon entries must be distinct")
        if m["kind"] == "xxz" and "family" not in m:
            raise ConfigError("xxz model needs a coupling family")
        n = m["N"]
        for key in ("jump_sites", "charges"):
            if any(s >= n for s in t.get(key, [])):
                raise ConfigError(f"{key} entries must be below N = {n}")
        if "hamiltonian_charge" in t and t["hamiltonian_charge"] >= n:
            raise ConfigError("hamiltonian_charge must be below N")
        if "weights" in t and len(t["weights"]) != n:
            raise ConfigError(f"weights must have N = {n} entries")
        if "initial" in t and len(t["initial"]) != n:
            raise ConfigError(f"initial bitstring must have N = {n} characters")
        if "M" in t and t["M"] > n:
            raise ConfigError(f"M must not exceed N = {n}")
    elif t["type"] != "couplings":
        raise ConfigError(f"task {t['type']!r} needs a model block")
    if t.get("gamma", 0.0) < 0:
        raise ConfigError("gamma must be >= 0")
    if "window" in t and t["window"][0] >= t["window"][1]:
        raise ConfigError("window must be increasing")
    if t["type"] == "bethe" and m is not None and t.get("bethe_g", m["g"]) == 0:
        raise ConfigError("bethe task needs nonzero g")


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON document; raise :class:`ConfigError` on any problem."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    _check_physics(data)
    out = data.get("output", {})
    if data.get("model") is not None:
        try:
            couplings_from_model(data["model"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    params = {k: v for k, v in data["task"].items() if k != "type"}
    return RunConfig(data, data["task"]["type"], params, data.get("model"),
                     out.get("directory"), tuple(out.get("formats", ("csv", "json"))))


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(data)
