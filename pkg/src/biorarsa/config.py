"""Experiment configuration documents.

Configs are JSON objects.  Angles are given in degrees (``delta0_deg``) and
converted to radians once, here.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from biorarsa.model import AMPLITUDE_MODELS
from biorarsa.schemes import SchemeKind, SchemeParams

EXPERIMENTS = ("trajectory", "sweep-delta", "sweep-nodes", "gain-table", "stepsize-trace")
FORMATS = ("csv", "json")

ALL_SCHEMES = tuple(k.value for k in SchemeKind)
PAPER_DELTA_SWEEP = (1.0, 3.0, 5.0, 7.0, 9.0, 11.0)
PAPER_C_STOPS = (0.6, 0.7, 0.8, 0.9)
PAPER_NODE_COUNTS = (200, 400, 600, 800)

# per experiment: (schemes, desk node counts, full-scale node counts, delta0_deg, c_stop)
EXPERIMENT_DEFAULTS = {
    "trajectory": (ALL_SCHEMES, (100,), (800,), (3.0, 9.0), (0.75,)),
    "sweep-delta": (ALL_SCHEMES, (100,), (200, 800), PAPER_DELTA_SWEEP, (0.75,)),
    "sweep-nodes": (("biorarsa",), (25, 50, 100, 200), PAPER_NODE_COUNTS, (3.0,), PAPER_C_STOPS),
    "gain-table": (
        ("reverse_tracking", "biorarsa"),
        (25, 50, 100, 200),
        PAPER_NODE_COUNTS,
        PAPER_DELTA_SWEEP,
        (0.75,),
    ),
    "stepsize-trace": (("biorarsa",), (100,), (800,), (3.0, 9.0), (0.75,)),
}
DESK_TRIALS = (20, 20)
FULL_TRIALS = (100, 100)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    schemes: tuple[str, ...]
    node_counts: tuple[int, ...]
    delta0_deg: tuple[float, ...]
    delta0_values: tuple[float, ...]  # radians, derived from delta0_deg
    c_stop_values: tuple[float, ...]
    hold_length: int = 5
    max_swim: int = 5
    alpha: float = 0.5
    max_transmissions: int | None = None
    n_channels: int = DESK_TRIALS[0]
    n_sequences: int = DESK_TRIALS[1]
    base_seed: int = 0
    amplitude_model: str = "rayleigh"
    power: float = 1.0
    output: str = "results"
    format: str = "csv"
    workers: int = 1
    require_convergence: bool = False
    dump_trials: bool = False
    full_scale: bool = False

    @property
    def delta0(self) -> float:
        return self.delta0_values[0]

    @property
    def c_stop(self) -> float:
        return self.c_stop_values[0]

    def scheme_params(self) -> SchemeParams:
        return SchemeParams(
            delta0=self.delta0,
            hold_length=self.hold_length,
            max_swim=self.max_swim,
            alpha=self.alpha,
            c_stop=self.c_stop,
            max_transmissions=self.max_transmissions,
        )


_SCALAR_KEYS = {
    "hold_length": int,
    "max_swim": int,
    "alpha": float,
    "max_transmissions": int,
    "n_channels": int,
    "n_sequences": int,
    "base_seed": int,
    "amplitude_model": str,
    "power": float,
    "output": str,
    "format": str,
    "workers": int,
    "require_convergence": bool,
    "dump_trials": bool,
    "full_scale": bool,
}
_LIST_KEYS = {"schemes": str, "node_counts": int, "delta0_deg": float, "c_stop": float}
KNOWN_KEYS = {"experiment", *_SCALAR_KEYS, *_LIST_KEYS}


def _coerce(name, value, kind):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected true/false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(name, f"expected a string, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    return float(value)


def _as_list(name, value, kind):
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ConfigError(name, "must not be empty")
    return tuple(_coerce(name, v, kind) for v in items)


def config_from_dict(doc: dict, experiment: str | None = None) -> RunConfig:
    """Validate a parsed config mapping and fill defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    declared = doc.get("experiment")
    if declared is not None and declared not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    if experiment is not None and declared is not None and declared != experiment:
        raise ConfigError("experiment", f"config is for {declared!r}, not {experiment!r}")
    experiment = experiment or declared
    if experiment is None:
        raise ConfigError("experiment", "missing required field")
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")

    values = {k: _coerce(k, doc[k], t) for k, t in _SCALAR_KEYS.items() if k in doc and doc[k] is not None}
    full = values.get("full_scale", False)
    schemes, desk_nodes, full_nodes, deltas, c_stops = EXPERIMENT_DEFAULTS[experiment]
    trials = FULL_TRIALS if full else DESK_TRIALS
    values.setdefault("n_channels", trials[0])
    values.setdefault("n_sequences", trials[1])

    lists = {
        "schemes": schemes,
        "node_counts": full_nodes if full else desk_nodes,
        "delta0_deg": deltas,
        "c_stop": c_stops,
    }
    for key, kind in _LIST_KEYS.items():
        if key in doc:
            lists[key] = _as_list(key, doc[key], kind)

    for s in lists["schemes"]:
        if s not in ALL_SCHEMES:
            raise ConfigError("schemes", f"unknown scheme {s!r}")
    if len(set(lists["schemes"])) != len(lists["schemes"]):
        raise ConfigError("schemes", "duplicate entries")
    if min(lists["node_counts"]) < 1:
        raise ConfigError("node_counts", "must be >= 1")
    if min(lists["delta0_deg"]) <= 0:
        raise ConfigError("delta0_deg", "must be > 0")
    if not all(0 < c < 1 for c in lists["c_stop"]):
        raise ConfigError("c_stop", "must lie in (0, 1)")

    checks = {
        "hold_length": lambda v: v >= 1,
        "max_swim": lambda v: v >= 1,
        "alpha": lambda v: 0 < v <= 1,
        "max_transmissions": lambda v: v >= 0,
        "n_channels": lambda v: v >= 1,
        "n_sequences": lambda v: v >= 1,
        "base_seed": lambda v: v >= 0,
        "power": lambda v: v > 0,
        "workers": lambda v: v >= 1,
    }
    for key, ok in checks.items():
        if key in values and not ok(values[key]):
            raise ConfigError(key, f"value {values[key]!r} out of range")
    if values.get("amplitude_model", "rayleigh") not in AMPLITUDE_MODELS:
        raise ConfigError("amplitude_model", f"must be one of {', '.join(AMPLITUDE_MODELS)}")
    if values.get("format", "csv") not in FORMATS:
        raise ConfigError("format", f"must be one of {', '.join(FORMATS)}")

    return RunConfig(
        experiment=experiment,
        schemes=lists["schemes"],
        node_counts=lists["node_counts"],
        delta0_deg=lists["delta0_deg"],
        delta0_values=tuple(math.radians(d) for d in lists["delta0_deg"]),
        c_stop_values=lists["c_stop"],
        **values,
    )


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Parse a JSON config document into a validated :class:`RunConfig`."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON ({exc})") from None
    return config_from_dict(doc, experiment)


def config_to_dict(config: RunConfig) -> dict:
    """Inverse of :func:`config_from_dict` (human units, every key explicit)."""
    out = {}
    for f in fields(config):
        name = f.name
        if name == "delta0_values":
            continue
        value = getattr(config, name)
        key = "c_stop" if name == "c_stop_values" else name
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def dump_config(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"
