"""Run configuration: JSON parsing, defaults and validation."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

from .errors import ConfigError, CopopError
from .selfmaps import map_from_descriptor
from .weights import weight_from_descriptor

DEFAULTS = {
    "weight": None,
    "map": None,
    "moments": {"nmax": 200, "radial_nodes": 64},
    "grids": {
        "radii": [0.9, 0.99, 0.999, 0.9999],
        "angles": 512,
        "R_sequence": [0.9, 0.99, 0.999],
        "radial_nodes": 64,
        "angular_nodes": 128,
        "counting_angles": 16,
    },
    "tolerances": {"compact_tol": 1e-6, "notcompact_tol": 1e-3, "hs_gap_tol": 0.01},
    "schatten": {"p": [1.0, 2.0, 4.0], "berezin_r": 0.5},
    "closed_range": {"nmax_monomials": 40, "a_grid": [0.5, 0.75, 0.9],
                     "delta": None, "normalize_origin": False},
    "cov": {"functions": ["1", "abs2", "re_plus_1"]},
    "matrix": {"size": 32},
    "output": {"directory": "copop-out", "formats": ["json", "csv"]},
}

COV_FUNCTIONS = ("1", "abs2", "re_plus_1")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``data`` is the fully defaulted JSON tree."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def weight(self):
        return weight_from_descriptor(self.data["weight"])

    @property
    def map(self):
        return map_from_descriptor(self.data["map"])

    def canonical(self):
        # the output location does not change any result
        body = {k: v for k, v in self.data.items() if k != "output"}
        return json.dumps(body, sort_keys=True, separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def _merge(defaults, given, path):
    if not isinstance(given, dict):
        raise ConfigError("expected an object", path)
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", path)
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


def _number(v, path, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("expected a number", path)
    if integer and int(v) != v:
        raise ConfigError("expected an integer", path)
    if positive and not v > 0:
        raise ConfigError("must be positive", path)
    return int(v) if integer else float(v)


def _radii(v, path):
    if not isinstance(v, list) or not v:
        raise ConfigError("expected a non-empty list", path)
    vals = [_number(x, f"{path}[{i}]") for i, x in enumerate(v)]
    if any(not 0 < x < 1 for x in vals):
        raise ConfigError("radii must lie in (0, 1)", path)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("radii not increasing", path)
    return vals


def _complex_list(v, path):
    if not isinstance(v, list):
        raise ConfigError("expected a list", path)
    out = []
    for i, x in enumerate(v):
        p = f"{path}[{i}]"
        if isinstance(x, list):
            if len(x) != 2:
                raise ConfigError("expected [re, im]", p)
            out.append([_number(x[0], p), _number(x[1], p)])
        else:
            out.append([_number(x, p), 0.0])
    return out


def validate(data):
    """Defaults, type checks and range checks; returns a :class:`RunConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", "$")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", "$")
    for key in ("weight", "map"):
        if key not in data:
            raise ConfigError("required", key)
        if not isinstance(data[key], dict):
            raise ConfigError("expected an object", key)

    cfg = {"weight": copy.deepcopy(data["weight"]), "map": copy.deepcopy(data["map"])}
    for key, default in DEFAULTS.items():
        if default is not None:
            cfg[key] = _merge(default, data.get(key, {}), key)

    m = cfg["moments"]
    m["nmax"] = _number(m["nmax"], "moments.nmax", positive=True, integer=True)
    m["radial_nodes"] = _number(m["radial_nodes"], "moments.radial_nodes", positive=True, integer=True)

    g = cfg["grids"]
    g["radii"] = _radii(g["radii"], "grids.radii")
    g["R_sequence"] = _radii(g["R_sequence"], "grids.R_sequence")
    if len(g["R_sequence"]) < 2:
        raise ConfigError("need at least two radii", "grids.R_sequence")
    for k in ("angles", "radial_nodes", "angular_nodes", "counting_angles"):
        g[k] = _number(g[k], f"grids.{k}", positive=True, integer=True)

    t = cfg["tolerances"]
    for k in t:
        t[k] = _number(t[k], f"tolerances.{k}", positive=True)

    s = cfg["schatten"]
    if not isinstance(s["p"], list) or not s["p"]:
        raise ConfigError("expected a non-empty list", "schatten.p")
    s["p"] = [_number(x, f"schatten.p[{i}]", positive=True) for i, x in enumerate(s["p"])]
    s["berezin_r"] = _number(s["berezin_r"], "schatten.berezin_r", positive=True)
    if s["berezin_r"] >= 1:
        raise ConfigError("must be < 1", "schatten.berezin_r")

    c = cfg["closed_range"]
    c["nmax_monomials"] = _number(c["nmax_monomials"], "closed_range.nmax_monomials",
                                  positive=True, integer=True)
    c["a_grid"] = _complex_list(c["a_grid"], "closed_range.a_grid")
    for i, (re, im) in enumerate(c["a_grid"]):
        if not 0 < abs(complex(re, im)) < 1:
            raise ConfigError("need 0 < |a| < 1", f"closed_range.a_grid[{i}]")
    if c["delta"] is not None:
        c["delta"] = _number(c["delta"], "closed_range.delta", positive=True)
    if not isinstance(c["normalize_origin"], bool):
        raise ConfigError("expected true or false", "closed_range.normalize_origin")

    fs = cfg["cov"]["functions"]
    if not isinstance(fs, list) or any(f not in COV_FUNCTIONS for f in fs):
        raise ConfigError(f"entries must be among {list(COV_FUNCTIONS)}", "cov.functions")

    cfg["matrix"]["size"] = _number(cfg["matrix"]["size"], "matrix.size", positive=True, integer=True)
    if cfg["matrix"]["size"] < 2:
        raise ConfigError("must be >= 2", "matrix.size")

    o = cfg["output"]
    if not isinstance(o["directory"], str) or not o["directory"]:
        raise ConfigError("expected a path", "output.directory")
    if not isinstance(o["formats"], list) or any(f not in FORMATS for f in o["formats"]):
        raise ConfigError(f"entries must be among {list(FORMATS)}", "output.formats")

    run = RunConfig(cfg)
    for key in ("weight", "map"):
        try:
            getattr(run, key)
        except (CopopError, KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"invalid descriptor ({exc})", key) from None
    return run


def parse_config(text):
    """Parse JSON text into a validated :class:`RunConfig`.

    Raises
    ------
    ConfigError
        With line and column for malformed JSON, or a field path for
        validation failures.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return validate(data)
