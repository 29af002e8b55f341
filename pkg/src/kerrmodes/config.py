"""Run configuration for the command-line verification suites.

A single declarative JSON (or YAML) document selects the Kerr parameters,
the suites to run, grid resolutions, the sigma-scan window, the output
directory, and the random seed.  The document is schema-validated and
unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import yaml

ALL_SUITES = ("geometry", "harmonics", "teukolsky", "scan", "modes",
              "invariants", "pairings")


class ConfigError(Exception):
    """Malformed or invalid run configuration."""


SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "params": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "suites": {
            "type": "array",
            "items": {"type": "string", "enum": list(ALL_SUITES)},
        },
        "out_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "jobs": {"type": "integer", "minimum": 1},
        "grids": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_r": {"type": "integer", "minimum": 2},
                "n_theta": {"type": "integer", "minimum": 2},
                "lmax": {"type": "integer", "minimum": 2},
                "invariant_points": {"type": "integer", "minimum": 1},
                "gauge_trials": {"type": "integer", "minimum": 0},
                "separation_cases": {"type": "integer", "minimum": 1},
            },
        },
        "sigma_window": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "re": {"type": "array", "items": {"type": "number"},
                       "minItems": 2, "maxItems": 2},
                "im": {"type": "array", "items": {"type": "number"},
                       "minItems": 2, "maxItems": 2},
                "step": {"type": "number", "exclusiveMinimum": 0},
                "exclude": {"type": "number", "minimum": 0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number"},
        },
    },
}

DEFAULT_GRIDS = {
    "n_r": 10,
    "n_theta": 6,
    "lmax": 6,
    "invariant_points": 20,
    "gauge_trials": 2,
    "separation_cases": 4,
}

DEFAULT_SIGMA_WINDOW = {
    "re": [-2.0, 2.0],
    "im": [0.0, 1.0],
    "step": 0.05,
    "exclude": 0.05,
}

# default check tolerances; any entry can be overridden from the config
DEFAULT_TOLERANCES = {
    "ricci_flat": 1e-6,
    "metric_inverse": 1e-12,
    "sw_eigen_residual": 1e-8,
    "separation_residual": 1e-6,
    "indicial_exact": 1e-12,
    "growing_branch_floor": 1e-6,
    "scan_floor": 1e-4,
    "catalog_residual": 1e-8,
    "coulomb_fit_residual": 1e-7,
    "static_solve_residual": 1e-7,
    "linearized_einstein": 1e-6,
    "invariant_closed_form": 1e-6,
    "gauge_insensitivity": 1e-6,
    "pairing_8pi": 1e-8,
    "pairing_rotation": 1e-8,
    "pairing_4pi": 1e-6,
    "pairing_exponent_floor": 0.9,
    "decay_slope_window": 0.05,
}


@dataclass(frozen=True)
class RunConfig:
    params: tuple = ((1.0, 0.9),)
    suites: tuple = ALL_SUITES
    out_dir: str = "out"
    seed: int = 0
    jobs: int = 1
    grids: dict = field(default_factory=lambda: dict(DEFAULT_GRIDS))
    sigma_window: dict = field(
        default_factory=lambda: dict(DEFAULT_SIGMA_WINDOW))
    tolerances: dict = field(
        default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def to_dict(self) -> dict:
        return {
            "params": [list(p) for p in self.params],
            "suites": list(self.suites),
            "out_dir": self.out_dir,
            "seed": self.seed,
            "jobs": self.jobs,
            "grids": dict(self.grids),
            "sigma_window": dict(self.sigma_window),
            "tolerances": dict(self.tolerances),
        }


def from_dict(raw: dict) -> RunConfig:
    """Validate a raw mapping against the schema and fill defaults."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc
    grids = dict(DEFAULT_GRIDS)
    grids.update(raw.get("grids", {}))
    window = dict(DEFAULT_SIGMA_WINDOW)
    window.update(raw.get("sigma_window", {}))
    tols = dict(DEFAULT_TOLERANCES)
    for key, val in raw.get("tolerances", {}).items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance name: {key}")
        tols[key] = float(val)
    params = tuple(tuple(float(x) for x in p)
                   for p in raw.get("params", [[1.0, 0.9]]))
    for m, a in params:
        if not (m > 0 and abs(a) < m):
            raise ConfigError(f"subextreme Kerr requires |a| < m: ({m}, {a})")
    return RunConfig(
        params=params,
        suites=tuple(raw.get("suites", ALL_SUITES)),
        out_dir=str(raw.get("out_dir", "out")),
        seed=int(raw.get("seed", 0)),
        jobs=int(raw.get("jobs", 1)),
        grids=grids,
        sigma_window=window,
        tolerances=tols,
    )


def load_config(path: Optional[str] = None) -> RunConfig:
    """Load a JSON or YAML config file; None gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        raw = yaml.safe_load(text) if str(path).endswith(
            (".yml", ".yaml")) else json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config file: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a mapping")
    return from_dict(raw)
