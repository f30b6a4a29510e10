"""Run configuration: strict JSON schema, defaults and path resolution."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import ConfigError, boundary_from_json, initial_from_json

COMMANDS = ("spectral-x", "spectral-t", "derive", "solve", "validate", "emit")

TOP_KEYS = {"lambda", "preset", "initial", "boundary", "grid", "expansion_order", "tolerances",
            "gates", "solve", "paths", "workers", "command"}
GRID_KEYS = {"panels_per_ray", "nodes_per_panel", "R_max", "grading"}
TOL_KEYS = {"tol_ode", "tol_quad", "tol_solve"}
GATE_KEYS = {"global_relation", "cond_limit", "zero_scan_radius"}
SOLVE_KEYS = {"x", "t", "max_unknowns", "phase_per_panel"}
AXIS_KEYS = {"start", "stop", "num"}
PATH_KEYS = {"spectral_x", "spectral_t", "derived", "solution", "report"}
PRESET_KEYS = {"name", "params"}


def _strict(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    return d


def _positive(v, name):
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number") from None
    if not (np.isfinite(v) and v > 0):
        raise ConfigError(f"{name} must be positive")
    return v


@dataclass
class Axis:
    start: float
    stop: float
    num: int

    def values(self):
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class RunConfig:
    command: str
    lam: int
    initial: object  # InitialProfile
    boundary: object  # BoundaryProfile
    preset: dict = None
    grid: dict = field(default_factory=lambda: {"panels_per_ray": 24, "nodes_per_panel": 16,
                                                "R_max": 60.0, "grading": 1.35})
    expansion_order: int = 4
    tol_ode: float = 1e-10
    tol_quad: float = 1e-7
    tol_solve: float = 1e-10
    gr_threshold: float = 1e-4
    cond_limit: float = 1e10
    zero_scan_radius: float = 20.0
    x_axis: Axis = field(default_factory=lambda: Axis(0.0, 2.0, 21))
    t_axis: Axis = field(default_factory=lambda: Axis(0.0, 0.5, 11))
    max_unknowns: int = 2400
    phase_per_panel: float = 12.0
    paths: dict = field(default_factory=dict)
    workers: int = 1

    def path(self, key):
        return self.paths[key]


DEFAULT_PATHS = {"spectral_x": "spectral_x.json", "spectral_t": "spectral_t.json",
                 "derived": "derived.json", "solution": "solution.csv", "report": "report"}


def parse_config(doc, command, base_dir="."):
    """RunConfig from a parsed JSON document; every level rejects unknown keys."""
    from .presets import compatible_preset

    _strict(doc, TOP_KEYS, "config")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if "command" in doc and doc["command"] != command:
        raise ConfigError(f"config is for command {doc['command']!r}, invoked as {command!r}")
    preset = None
    if "preset" in doc:
        preset = _strict(doc["preset"], PRESET_KEYS, "preset")
        if "initial" in doc or "boundary" in doc:
            raise ConfigError("give either a preset or initial/boundary profiles, not both")
        params = preset.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("preset params must be an object")
        bundle = compatible_preset(preset.get("name"), **params)
        lam, p, q = bundle.lam, bundle.initial, bundle.boundary
        if "lambda" in doc and doc["lambda"] != lam:
            raise ConfigError(f"preset {preset['name']!r} fixes lambda = {lam}")
    else:
        if "lambda" not in doc:
            raise ConfigError("missing 'lambda'")
        lam = doc["lambda"]
        if lam not in (1, -1):
            raise ConfigError("lambda must be 1 or -1")
        if "initial" not in doc or "boundary" not in doc:
            raise ConfigError("need 'initial' and 'boundary' profiles (or a preset)")
        p = initial_from_json(doc["initial"], lam)
        q = boundary_from_json(doc["boundary"], lam)
    cfg = RunConfig(command, lam, p, q, preset=preset)
    if "grid" in doc:
        g = _strict(doc["grid"], GRID_KEYS, "grid")
        cfg.grid.update(g)
        for key in ("R_max", "grading"):
            _positive(cfg.grid[key], f"grid.{key}")
        for key in ("panels_per_ray", "nodes_per_panel"):
            if not isinstance(cfg.grid[key], int) or cfg.grid[key] < 2:
                raise ConfigError(f"grid.{key} must be an integer >= 2")
    if "expansion_order" in doc:
        m = doc["expansion_order"]
        if not isinstance(m, int) or not 1 <= m <= 8:
            raise ConfigError("expansion_order must be an integer in [1, 8]")
        cfg.expansion_order = m
    if "tolerances" in doc:
        tol = _strict(doc["tolerances"], TOL_KEYS, "tolerances")
        for key, val in tol.items():
            setattr(cfg, key, _positive(val, f"tolerances.{key}"))
    if "gates" in doc:
        gates = _strict(doc["gates"], GATE_KEYS, "gates")
        if "global_relation" in gates:
            cfg.gr_threshold = _positive(gates["global_relation"], "gates.global_relation")
        if "cond_limit" in gates:
            cfg.cond_limit = _positive(gates["cond_limit"], "gates.cond_limit")
        if "zero_scan_radius" in gates:
            cfg.zero_scan_radius = _positive(gates["zero_scan_radius"], "gates.zero_scan_radius")
    if "solve" in doc:
        s = _strict(doc["solve"], SOLVE_KEYS, "solve")
        for key in ("x", "t"):
            if key in s:
                ax = _strict(s[key], AXIS_KEYS, f"solve.{key}")
                try:
                    axis = Axis(float(ax["start"]), float(ax["stop"]), int(ax["num"]))
                except (KeyError, TypeError, ValueError):
                    raise ConfigError(f"solve.{key} needs numeric start, stop, num") from None
                if axis.start < 0 or axis.stop < axis.start or axis.num < 1:
                    raise ConfigError(f"solve.{key} must satisfy 0 <= start <= stop, num >= 1")
                setattr(cfg, f"{key}_axis", axis)
        if "max_unknowns" in s:
            cfg.max_unknowns = int(_positive(s["max_unknowns"], "solve.max_unknowns"))
        if "phase_per_panel" in s:
            cfg.phase_per_panel = _positive(s["phase_per_panel"], "solve.phase_per_panel")
    paths = dict(DEFAULT_PATHS)
    if "paths" in doc:
        paths.update(_strict(doc["paths"], PATH_KEYS, "paths"))
    base = Path(base_dir)
    cfg.paths = {k: str(Path(v) if Path(v).is_absolute() else base / v) for k, v in paths.items()}
    if "workers" in doc:
        w = doc["workers"]
        if not isinstance(w, int) or w < 1:
            raise ConfigError("workers must be a positive integer")
        cfg.workers = w
    return cfg


def load_config(path, command):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(doc, command, base_dir=path.parent)
