"""
Run configuration: a single JSON object, validated strictly.

Unknown keys are rejected with their dotted path so typos never silently
fall back to defaults.
"""

import json
import math
from dataclasses import dataclass, field

from .graph import make_sequence
from .objectives import FAMILIES
from .schedule import KINDS as SCHEDULE_KINDS

__all__ = ["ConfigError", "RunConfig", "load_config", "config_from_dict"]

GRAPH_MODELS = ("static", "cyclic-schedule", "random-B-connected", "regular-family")
PERTURBATION_KINDS = ("zero", "decaying-deterministic", "subgradient-injected", "custom-sequence")

_TOP = {
    "seed", "n", "d", "T", "graph", "objective", "schedule", "x0", "perturbation",
    "monitors", "lemma8_points", "lemma8_random_points", "thresholds", "windows",
    "params", "out_dir",
}
_GRAPH = {"model", "B", "p", "edges", "graphs", "degrees", "c_min", "c_max"}
_OBJECTIVE = {"family", "anchors", "generate", "scales", "width", "directions"}
_GENERATE = {"low", "high", "integer"}
_SCHEDULE = {"kind", "p", "offset", "values"}
_PERTURBATION = {"kind", "c", "signs", "power", "values"}
_THRESHOLDS = {"consensus_tol", "opt_tol"}
_PARAMS = {"delta", "lambda", "C"}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass
class RunConfig:
    seed: int
    n: int
    T: int
    graph: dict
    d: int = 1
    objective: dict = None
    schedule: dict = field(default_factory=lambda: {"kind": "inv-sqrt"})
    x0: object = None
    perturbation: dict = field(default_factory=lambda: {"kind": "zero"})
    monitors: list = None
    lemma8_points: list = None
    lemma8_random_points: int = 0
    thresholds: dict = field(default_factory=lambda: {"consensus_tol": 1e-2, "opt_tol": 5e-2})
    windows: int = None
    params: dict = field(default_factory=dict)
    out_dir: str = None

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    extra = sorted(set(obj) - allowed)
    if extra:
        path = ".".join(filter(None, [where, extra[0]]))
        raise ConfigError(f"unknown key {path!r}")


def _int(obj, key, lo, where=""):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}{key} must be an integer")
    if v < lo:
        raise ConfigError(f"{where}{key} must be ≥ {lo}")
    return v


def _real(obj, key, where=""):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}{key} must be a finite number")
    return float(v)


def config_from_dict(raw):
    """Validate a parsed JSON object and fill defaults."""
    _reject_unknown(raw, _TOP, "")
    for key in ("seed", "n", "graph", "T"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    cfg = RunConfig(
        seed=_int(raw, "seed", 0),
        n=_int(raw, "n", 1),
        T=_int(raw, "T", 1),
        graph=dict(raw["graph"]) if isinstance(raw["graph"], dict) else raw["graph"],
    )
    if "d" in raw:
        cfg.d = _int(raw, "d", 1)

    g = cfg.graph
    _reject_unknown(g, _GRAPH, "graph")
    if g.get("model") not in GRAPH_MODELS:
        raise ConfigError(f"graph.model must be one of {', '.join(GRAPH_MODELS)}")
    if "B" in g:
        _int(g, "B", 1, "graph.")
    if "p" in g and not 0.0 <= _real(g, "p", "graph.") <= 1.0:
        raise ConfigError("graph.p must lie in [0, 1]")

    if raw.get("objective") is not None:
        obj = dict(raw["objective"])
        _reject_unknown(obj, _OBJECTIVE, "objective")
        if obj.get("family") not in FAMILIES:
            raise ConfigError(f"objective.family must be one of {', '.join(FAMILIES)}")
        if obj.get("anchors") is None and obj.get("generate") is None:
            raise ConfigError("objective needs 'anchors' or 'generate'")
        if obj.get("generate") is not None:
            _reject_unknown(obj["generate"], _GENERATE, "objective.generate")
        if "width" in obj and _real(obj, "width", "objective.") <= 0:
            raise ConfigError("objective.width must be > 0")
        cfg.objective = obj

    if "schedule" in raw:
        sch = raw["schedule"]
        sch = {"kind": sch} if isinstance(sch, str) else dict(sch)
        _reject_unknown(sch, _SCHEDULE, "schedule")
        if sch.get("kind") not in SCHEDULE_KINDS:
            raise ConfigError(f"schedule.kind must be one of {', '.join(SCHEDULE_KINDS)}")
        cfg.schedule = sch

    if "perturbation" in raw:
        pert = dict(raw["perturbation"])
        _reject_unknown(pert, _PERTURBATION, "perturbation")
        if pert.get("kind") not in PERTURBATION_KINDS:
            raise ConfigError(f"perturbation.kind must be one of {', '.join(PERTURBATION_KINDS)}")
        if pert["kind"] == "decaying-deterministic" and "c" not in pert:
            raise ConfigError("perturbation.c is required for decaying-deterministic")
        if pert["kind"] == "custom-sequence" and "values" not in pert:
            raise ConfigError("perturbation.values is required for custom-sequence")
        cfg.perturbation = pert

    cfg.x0 = raw.get("x0")
    if "monitors" in raw:
        from .sgp import MONITORS

        mons = raw["monitors"]
        if not isinstance(mons, list) or any(m not in MONITORS for m in mons):
            raise ConfigError(f"monitors must be a list drawn from {', '.join(MONITORS)}")
        cfg.monitors = list(mons)
    cfg.lemma8_points = raw.get("lemma8_points")
    if "lemma8_random_points" in raw:
        cfg.lemma8_random_points = _int(raw, "lemma8_random_points", 0)
    if "thresholds" in raw:
        th = dict(raw["thresholds"])
        _reject_unknown(th, _THRESHOLDS, "thresholds")
        cfg.thresholds = {**cfg.thresholds, **{k: _real(th, k, "thresholds.") for k in th}}
    if "windows" in raw:
        cfg.windows = _int(raw, "windows", 1)
    if "params" in raw:
        pr = dict(raw["params"])
        _reject_unknown(pr, _PARAMS, "params")
        cfg.params = {k: _real(pr, k, "params.") for k in pr}
    if raw.get("out_dir") is not None:
        cfg.out_dir = str(raw["out_dir"])

    # catch model-specific parameter errors (bad edges, degrees) at load time
    try:
        build_graph_params = {k: v for k, v in g.items() if k not in ("model", "B")}
        make_sequence(g["model"], cfg.n, g.get("B", 1), cfg.seed, **build_graph_params)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"graph: {exc}") from exc
    return cfg


def load_config(path):
    """Read and validate a JSON run configuration."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(raw)
