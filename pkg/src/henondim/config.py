"""Run configuration files (YAML).

Example::

    map:
      factors:
        - coeffs: [[-6, 0], [0, 0], [1, 0]]   # ascending degree, [re, im]
          a: [0.2, 0]
    n_max: 10
    t_grid: [0, 4, 0.01]
    tol: 1.0e-9
    cache_dir: .henondim-cache
    jobs: 0
    sweep:
      slot: {kind: coeff, factor: 0, index: 0}
      segment: {start: [-8, 0], end: [-6, 0], count: 11}

A ``linear_model`` section (``branch_logs``, ``log_a``) may replace ``map``.
Errors name the offending line.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from . import maps, oracle, sweep
from .errors import ConfigError

CACHE_ENV = "HENONDIM_CACHE_DIR"


@dataclass
class RunConfig:
    map: Optional[maps.HenonMap] = None
    linear_model: Optional[oracle.LinearModel] = None
    n_max: int = 10
    t_grid: tuple = (0.0, 4.0, 0.01)
    tol: float = 1e-9
    cache_dir: Optional[str] = None
    jobs: int = 0
    family: Optional[sweep.FamilySpec] = None
    source_lines: dict = field(default_factory=dict, repr=False)

    @property
    def source(self):
        return self.map if self.map is not None else self.linear_model

    def validate(self):
        if (self.map is None) == (self.linear_model is None):
            raise ConfigError("exactly one of 'map' or 'linear_model' must be given")
        if self.t_grid[2] <= 0:
            raise ConfigError(self._where("t_grid") + "t_grid step must be > 0")
        if self.t_grid[1] < self.t_grid[0]:
            raise ConfigError(self._where("t_grid") + "t_grid max must be >= min")
        if self.n_max < 3:
            raise ConfigError(self._where("n_max") + "n_max must be >= 3")
        return self

    def _where(self, key):
        line = self.source_lines.get(key)
        return f"line {line}: " if line else ""


def _line(node) -> int:
    return node.start_mark.line + 1


def _err(node, msg):
    return ConfigError(f"line {_line(node)}: {msg}")


def _mapping(node, what):
    if not isinstance(node, yaml.MappingNode):
        raise _err(node, f"{what} must be a mapping")
    return {k.value: v for k, v in node.value}


def _value(node):
    return yaml.safe_load(yaml.serialize(node))


def _number(node, what) -> float:
    v = _value(node)
    if isinstance(v, str):
        # PyYAML reads exponents without a dot ("1e-9") as strings
        try:
            v = float(v)
        except ValueError:
            pass
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(node, f"{what} must be a number")
    return float(v)


def _complex(node, what) -> complex:
    if isinstance(node, yaml.SequenceNode):
        if len(node.value) != 2:
            raise _err(node, f"{what} must be [re, im]")
        return complex(_number(node.value[0], what), _number(node.value[1], what))
    return complex(_number(node, what), 0.0)


def _int(node, what) -> int:
    v = _value(node)
    if isinstance(v, bool) or not isinstance(v, int):
        raise _err(node, f"{what} must be an integer")
    return v


def parse_map(node) -> maps.HenonMap:
    body = _mapping(node, "map")
    if "factors" not in body:
        raise _err(node, "map needs a 'factors' list")
    fnode = body["factors"]
    if not isinstance(fnode, yaml.SequenceNode) or not fnode.value:
        raise _err(fnode, "factors must be a non-empty list")
    factors = []
    for item in fnode.value:
        fields_ = _mapping(item, "factor")
        if "coeffs" not in fields_ or "a" not in fields_:
            raise _err(item, "factor needs 'coeffs' and 'a'")
        cnode = fields_["coeffs"]
        if not isinstance(cnode, yaml.SequenceNode):
            raise _err(cnode, "coeffs must be a list of [re, im] pairs")
        coeffs = [_complex(c, "coefficient") for c in cnode.value]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) - 1 < 2:
            raise _err(cnode, f"factor polynomial has degree {len(coeffs) - 1}; degree >= 2 required")
        a = _complex(fields_["a"], "a")
        if a == 0:
            raise _err(fields_["a"], "factor parameter a must be nonzero")
        factors.append(maps.HenonFactor(tuple(coeffs), a))
    return maps.HenonMap(tuple(factors))


def parse_linear_model(node) -> oracle.LinearModel:
    body = _mapping(node, "linear_model")
    if "branch_logs" not in body:
        raise _err(node, "linear_model needs 'branch_logs'")
    bnode = body["branch_logs"]
    if not isinstance(bnode, yaml.SequenceNode):
        raise _err(bnode, "branch_logs must be a list")
    logs = [_number(x, "branch log") for x in bnode.value]
    if len(logs) < 2:
        raise _err(bnode, "linear_model needs at least two branches")
    for x, v in zip(bnode.value, logs):
        if v <= 0:
            raise _err(x, "branch logs must be positive")
    log_a = _number(body["log_a"], "log_a") if "log_a" in body else 0.0
    if log_a > 0:
        raise _err(body["log_a"], "log_a must be <= 0")
    return oracle.LinearModel(tuple(logs), log_a)


def parse_family(node, template) -> sweep.FamilySpec:
    body = _mapping(node, "sweep")
    if "slot" not in body:
        raise _err(node, "sweep needs a 'slot'")
    snode = _mapping(body["slot"], "slot")
    kind = _value(snode["kind"]) if "kind" in snode else None
    if kind not in ("coeff", "a", "branch_log", "log_a"):
        raise _err(body["slot"], f"unknown slot kind {kind!r}")
    slot = sweep.Slot(
        kind,
        _int(snode["factor"], "factor") if "factor" in snode else 0,
        _int(snode["index"], "index") if "index" in snode else 0,
    )
    if "segment" in body:
        seg = _mapping(body["segment"], "segment")
        samples = sweep.Segment(
            _complex(seg["start"], "start"), _complex(seg["end"], "end"), _int(seg["count"], "count")
        )
    elif "circle" in body:
        cir = _mapping(body["circle"], "circle")
        samples = sweep.Circle(
            _complex(cir["center"], "center"), _number(cir["radius"], "radius"), _int(cir["count"], "count")
        )
    else:
        raise _err(node, "sweep needs a 'segment' or 'circle'")
    try:
        family = sweep.FamilySpec(template, slot, samples)
        family.member(family.params()[0])
    except (ValueError, IndexError) as exc:
        raise _err(node, str(exc)) from None
    return family


def load_config(path) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text)


def parse_config(text: str) -> RunConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark else "?"
        raise ConfigError(f"line {line}: malformed YAML") from None
    if root is None:
        raise ConfigError("empty configuration")
    body = _mapping(root, "configuration")
    cfg = RunConfig()
    cfg.source_lines = {k: _line(v) for k, v in body.items()}
    if "map" in body:
        cfg.map = parse_map(body["map"])
    if "linear_model" in body:
        cfg.linear_model = parse_linear_model(body["linear_model"])
    if "n_max" in body:
        cfg.n_max = _int(body["n_max"], "n_max")
    if "t_grid" in body:
        g = body["t_grid"]
        if not isinstance(g, yaml.SequenceNode) or len(g.value) != 3:
            raise _err(g, "t_grid must be [min, max, step]")
        cfg.t_grid = tuple(_number(x, "t_grid entry") for x in g.value)
    if "tol" in body:
        cfg.tol = _number(body["tol"], "tol")
    if "cache_dir" in body:
        cfg.cache_dir = str(_value(body["cache_dir"]))
    if "jobs" in body:
        cfg.jobs = _int(body["jobs"], "jobs")
    known = {"map", "linear_model", "n_max", "t_grid", "tol", "cache_dir", "jobs", "sweep"}
    for key, node in body.items():
        if key not in known:
            raise _err(node, f"unknown key {key!r}")
    if cfg.map is not None and cfg.linear_model is not None:
        raise _err(body["linear_model"], "give either 'map' or 'linear_model', not both")
    if "sweep" in body:
        if cfg.source is None:
            raise _err(body["sweep"], "sweep needs a map or linear_model template")
        cfg.family = parse_family(body["sweep"], cfg.source)
    return cfg.validate()


def resolve_cache_dir(cli_value, cfg: RunConfig):
    """Flag, then environment variable, then config file."""
    if cli_value:
        return cli_value
    env = os.environ.get(CACHE_ENV)
    if env:
        return env
    return cfg.cache_dir
