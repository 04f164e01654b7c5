"""JSON run configuration and the bundled example configurations."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .asymptotics import geometric_grid
from .classical import ClassicalSpec
from .errors import ValidationError
from .market import MarketModel
from .measure import Measure, make_measure

DEFAULT_GRIDS = {
    "temporal": {"start": 1.0, "stop": 1e4, "num": 41},
    "spatial": {"start": 1e2, "stop": 1e8, "num": 41},
}
DEFAULT_SIMULATION = {"x": 1.0, "horizon": 1.0, "steps": 100, "paths": 1000, "seed": 0,
                      "check_paths": 10000, "fractions": []}

EXAMPLES = {
    "single-dirac": {
        "measure": {"type": "dirac", "points": [2.0], "weights": [1.0]},
        "market": {"lambda": [0.25], "breakpoints": [], "sigma": 0.2},
        "simulation": {"x": 1.0, "horizon": 1.0, "steps": 100, "paths": 1000, "seed": 0,
                       "check_paths": 100000, "fractions": [1.25, 3.75]},
    },
    "two-dirac": {
        "measure": {"type": "dirac", "points": [2.0, 4.0], "weights": [1.0, 1.0]},
        "market": {"lambda": [0.25], "breakpoints": [], "sigma": 0.2},
        "simulation": {"x": 1.0, "horizon": 1.0, "steps": 100, "paths": 1000, "seed": 0,
                       "check_paths": 10000, "fractions": []},
    },
    "lebesgue": {
        "measure": {"type": "lebesgue", "a": 1.0, "b": 2.0},
        "market": {"lambda": [0.25], "breakpoints": [], "sigma": 0.2},
    },
    "lebesgue-zero-a": {
        "measure": {"type": "lebesgue", "a": 0.0, "b": 2.0},
        "market": {"lambda": [0.25], "breakpoints": [], "sigma": 0.2},
        "grids": {"temporal": {"start": 1.0, "stop": 1e6, "num": 31}},
    },
    "classical": {
        "measure": {"type": "dirac", "points": [2.0, 4.0], "weights": [1.0, 1.0]},
        "classical": {"theta": 0.5, "lambda": 1.0, "x0": 1.0, "tau0": 1.0},
        "grids": {"temporal": {"start": 1.0, "stop": 1e4, "num": 41},
                  "spatial": {"start": 1.0, "stop": 1e8, "num": 41}},
    },
}


@dataclass
class RunConfig:
    """Validated run configuration.

    Attributes
    ----------
    measure : Measure
    market : MarketModel or None
    grids : dict
        ``{"temporal": ndarray, "spatial": ndarray}``.
    simulation : dict
        Monte Carlo settings with defaults filled in.
    classical : ClassicalSpec or None
    classical_fixed : dict
        ``x0`` and ``tau0`` of the classical series.
    rtol : float
        Inversion tolerance.
    out : Path or None
    """

    measure: Measure
    market: MarketModel | None = None
    grids: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    classical: ClassicalSpec | None = None
    classical_fixed: dict = field(default_factory=dict)
    rtol: float = 1e-12
    out: Path | None = None


def _block(raw: dict, name: str, required: bool = False) -> dict | None:
    blk = raw.get(name)
    if blk is None:
        if required:
            raise ValidationError("missing block", name)
        return None
    if not isinstance(blk, dict):
        raise ValidationError("must be an object", name)
    return blk


def _number(blk: dict, key: str, prefix: str, default=None, integer: bool = False):
    v = blk.get(key, default)
    if v is None:
        raise ValidationError("missing value", f"{prefix}.{key}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError("must be a number", f"{prefix}.{key}")
    if integer:
        if float(v) != int(v):
            raise ValidationError("must be an integer", f"{prefix}.{key}")
        return int(v)
    return float(v)


def _numbers(blk: dict, key: str, prefix: str, default=None) -> list[float]:
    v = blk.get(key, default)
    if v is None:
        raise ValidationError("missing value", f"{prefix}.{key}")
    if not isinstance(v, list) or any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in v):
        raise ValidationError("must be a list of numbers", f"{prefix}.{key}")
    return [float(e) for e in v]


def parse_measure(blk: dict) -> Measure:
    kind = blk.get("type")
    if not isinstance(kind, str):
        raise ValidationError("missing or non-string measure type", "measure.type")
    try:
        if kind == "dirac":
            return make_measure("dirac", points=_numbers(blk, "points", "measure"),
                                weights=_numbers(blk, "weights", "measure"))
        if kind == "lebesgue":
            return make_measure("lebesgue", a=_number(blk, "a", "measure"), b=_number(blk, "b", "measure"))
        if kind == "density":
            extra = {k: _number(blk, k, "measure", integer=True) for k in ("panels", "order") if k in blk}
            return make_measure("density", a=_number(blk, "a", "measure"), b=_number(blk, "b", "measure"),
                                values=_numbers(blk, "values", "measure"), **extra)
        return make_measure(kind)
    except ValidationError as exc:
        if exc.field and exc.field.startswith("measure."):
            raise
        raise exc.with_prefix("measure") from None


def _grid(blk: dict | None, axis: str) -> np.ndarray:
    spec = dict(DEFAULT_GRIDS[axis])
    if blk is not None:
        sub = blk.get(axis)
        if sub is not None:
            if isinstance(sub, list):
                pts = _numbers(blk, axis, "grids")
                if len(pts) < 2 or any(p <= 0 for p in pts) or any(np.diff(pts) <= 0):
                    raise ValidationError("must be at least two positive increasing values", f"grids.{axis}")
                return np.asarray(pts)
            if not isinstance(sub, dict):
                raise ValidationError("must be an object or a list", f"grids.{axis}")
            spec.update(sub)
    prefix = f"grids.{axis}"
    start, stop = _number(spec, "start", prefix), _number(spec, "stop", prefix)
    num = _number(spec, "num", prefix, integer=True)
    if not (0 < start < stop) or num < 2:
        raise ValidationError("need 0 < start < stop and num >= 2", prefix)
    return geometric_grid(start, stop, num)


def parse_config(raw: dict) -> RunConfig:
    """Validate a decoded JSON configuration.

    Raises
    ------
    ValidationError
        With a dotted field path such as ``measure.points``.
    """
    if not isinstance(raw, dict):
        raise ValidationError("configuration must be a JSON object", "config")
    cfg = RunConfig(parse_measure(_block(raw, "measure", required=True)))

    mk = _block(raw, "market")
    if mk is not None:
        try:
            cfg.market = MarketModel(tuple(_numbers(mk, "lambda", "market")),
                                     tuple(_numbers(mk, "breakpoints", "market", default=[])),
                                     _number(mk, "sigma", "market", default=1.0))
        except ValidationError as exc:
            raise (exc if exc.field and exc.field.startswith("market.") else exc.with_prefix("market")) from None

    grids = _block(raw, "grids")
    cfg.grids = {axis: _grid(grids, axis) for axis in ("temporal", "spatial")}

    sim = dict(DEFAULT_SIMULATION)
    sim.update(_block(raw, "simulation") or {})
    for key in ("x", "horizon"):
        sim[key] = _number(sim, key, "simulation")
        if sim[key] <= 0:
            raise ValidationError("must be positive", f"simulation.{key}")
    for key in ("steps", "paths", "seed", "check_paths"):
        sim[key] = _number(sim, key, "simulation", integer=True)
        if sim[key] < (0 if key == "seed" else 1):
            raise ValidationError("out of range", f"simulation.{key}")
    sim["fractions"] = _numbers(sim, "fractions", "simulation")
    cfg.simulation = sim

    cl = _block(raw, "classical")
    if cl is not None:
        try:
            cfg.classical = ClassicalSpec(_number(cl, "theta", "classical", default=0.5),
                                          _number(cl, "lambda", "classical", default=1.0))
        except ValidationError as exc:
            raise (exc if exc.field and exc.field.startswith("classical.") else exc.with_prefix("classical")) from None
        cfg.classical_fixed = {k: _number(cl, k, "classical", default=1.0) for k in ("x0", "tau0")}
        if cfg.classical_fixed["x0"] <= 0 or cfg.classical_fixed["tau0"] < 0:
            raise ValidationError("x0 must be positive and tau0 non-negative", "classical")

    tol = _block(raw, "tolerances") or {}
    cfg.rtol = _number(tol, "rtol", "tolerances", default=1e-12)
    if not cfg.rtol > 0:
        raise ValidationError("must be positive", "tolerances.rtol")
    out = raw.get("output")
    if out is not None:
        if not isinstance(out, str):
            raise ValidationError("must be a path string", "output")
        cfg.out = Path(out)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", "config") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "config") from None
    return parse_config(raw)


def example_config(name: str) -> dict:
    """Bundled configuration by name."""
    if name not in EXAMPLES:
        raise ValidationError(f"unknown example {name!r}; expected one of {sorted(EXAMPLES)}", "example")
    return copy.deepcopy(EXAMPLES[name])
