"""Strict JSON run configuration.

Every section is optional and falls back to the defaults below. Unknown
keys at any level raise :class:`ConfigError` naming the dotted key path.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .eigensolve import DEFAULT_TOL, LANCZOS_SEED
from .errors import ConfigError, DumbbellError
from .geometry import DumbbellSpec, MaterialParams, ProfileSpec
from .problems import Discretization
from .spectra.sweep import DEFAULT_EPSILONS, PARTS, SweepConfig, Thresholds

DEFAULTS: dict = {
    "geometry": {
        "left_length": 1.0,
        "right_length": 1.0,
        "epsilon": 0.05,
        "profile": {"kind": "constant", "params": [1.0], "delta": 0.25},
    },
    "params": {"sigma": 0.3, "tau": 0.0},
    "discretization": {
        "h_target": 0.05, "channel_rows": 2, "growth": 1.3, "junction_grading": None,
        "aspect_cap": 50.0, "nx": 64, "ny": 4, "x_grading": None, "n_elems_1d": 256,
    },
    "solver": {"k": 10, "tol": DEFAULT_TOL, "max_iters": 400, "seed": LANCZOS_SEED},
    "sweep": {
        "epsilons": list(DEFAULT_EPSILONS), "parts": list(PARTS), "channel_modes": 3,
        "decomposition_modes": 10, "dirichlet_modes": 5, "localization_modes": None,
    },
    "thresholds": {
        "deviation": 0.05, "deviation_epsilon": 0.05, "localization": 0.85,
        "localization_epsilon": 0.025, "channel_error": 0.05, "gap_rel": 0.1,
    },
    "decompose": None,
    "output": {"dir": "out"},
}

# free-form sections: any of these keys, values checked when used
_DECOMPOSE_KEYS = {"dumbbell", "omega", "theta", "N"}


def _merge(defaults, given, path: str):
    if given is None:
        return copy.deepcopy(defaults)
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(defaults[key], dict) and key != "profile":
            out[key] = _merge(defaults[key], val, where)
        elif key == "profile":
            if not isinstance(val, dict):
                raise ConfigError(f"{where}: expected an object")
            for k in val:
                if k not in defaults[key]:
                    raise ConfigError(f"unknown config key: {where}.{k}")
            out[key] = {**defaults[key], **val}
        else:
            out[key] = val
    return out


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    geometry: DumbbellSpec
    params: MaterialParams
    disc: Discretization
    sweep: SweepConfig
    k: int
    solver_kw: dict
    decompose_input: Optional[dict]
    output_dir: str

    @property
    def profile(self) -> ProfileSpec:
        return self.geometry.profile

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _number(section: dict, key: str, path: str, kind=float, allow_none=False):
    val = section[key]
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    if kind is int:
        if int(val) != val:
            raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
        return int(val)
    return float(val)


def build_config(data: Any) -> RunConfig:
    raw = _merge(DEFAULTS, data, "")
    dec = raw["decompose"]
    if dec is not None:
        if not isinstance(dec, dict):
            raise ConfigError("decompose: expected an object")
        for k in dec:
            if k not in _DECOMPOSE_KEYS:
                raise ConfigError(f"unknown config key: decompose.{k}")
    try:
        g, p, d = raw["geometry"], raw["params"], raw["discretization"]
        s, t, so = raw["sweep"], raw["thresholds"], raw["solver"]
        prof = g["profile"]
        if not isinstance(prof["params"], list):
            raise ConfigError("geometry.profile.params: expected a list")
        profile = ProfileSpec(prof["kind"], tuple(prof["params"]), _number(prof, "delta", "geometry.profile"))
        spec = DumbbellSpec(_number(g, "left_length", "geometry"), _number(g, "right_length", "geometry"),
                            profile, _number(g, "epsilon", "geometry"))
        params = MaterialParams(_number(p, "sigma", "params"), _number(p, "tau", "params"))
        disc = Discretization(
            h_target=_number(d, "h_target", "discretization"),
            channel_rows=_number(d, "channel_rows", "discretization", int, allow_none=True),
            growth=_number(d, "growth", "discretization"),
            junction_grading=_number(d, "junction_grading", "discretization", allow_none=True),
            aspect_cap=_number(d, "aspect_cap", "discretization"),
            nx=_number(d, "nx", "discretization", int), ny=_number(d, "ny", "discretization", int),
            x_grading=_number(d, "x_grading", "discretization", allow_none=True),
            n_elems_1d=_number(d, "n_elems_1d", "discretization", int))
        if disc.h_target <= 0 or disc.nx < 2 or disc.ny < 2 or disc.n_elems_1d < 4:
            raise ConfigError("discretization: h_target > 0, nx, ny >= 2 and n_elems_1d >= 4 required")
        parts = s["parts"]
        if not isinstance(parts, list) or any(x not in PARTS for x in parts):
            raise ConfigError(f"sweep.parts: expected a list drawn from {list(PARTS)}")
        eps = s["epsilons"]
        if not isinstance(eps, list) or not eps or any(isinstance(e, bool) or not isinstance(e, (int, float)) or e <= 0 for e in eps):
            raise ConfigError("sweep.epsilons: expected a non-empty list of positive numbers")
        for e in eps:
            spec.with_epsilon(float(e))
        thresholds = Thresholds(**{k: _number(t, k, "thresholds") for k in t})
        tol = _number(so, "tol", "solver")
        if not tol > 0:
            raise ConfigError("solver.tol must be positive")
        k = _number(so, "k", "solver", int)
        if k < 1:
            raise ConfigError("solver.k must be >= 1")
        solver_kw = {"tol": tol, "max_iters": _number(so, "max_iters", "solver", int),
                     "seed": _number(so, "seed", "solver", int)}
        sweep = SweepConfig(
            left_length=spec.left_length, right_length=spec.right_length, profile=profile,
            params=params, disc=disc, epsilons=tuple(float(e) for e in eps),
            channel_modes=_number(s, "channel_modes", "sweep", int),
            decomposition_modes=_number(s, "decomposition_modes", "sweep", int),
            dirichlet_modes=_number(s, "dirichlet_modes", "sweep", int),
            localization_modes=_number(s, "localization_modes", "sweep", int, allow_none=True),
            thresholds=thresholds, parts=tuple(parts), **solver_kw)
        out_dir = raw["output"]["dir"]
        if not isinstance(out_dir, str):
            raise ConfigError("output.dir: expected a string")
    except ConfigError:
        raise
    except DumbbellError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return RunConfig(raw, spec, params, disc, sweep, k, solver_kw, dec, out_dir)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return build_config(data)
