"""JSON configuration documents: schema, loading and serialisation.

Rationals travel as ``"p/q"`` strings so they stay exact; plain JSON numbers
are accepted too (integers exactly, floats as floats).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .levelchain import CoordinateChainSpec
from .montecarlo import SimConfig
from .rates import CoordinateRates, rates_from_dict
from .walks import SpecError, WalkSpec, validate

SCHEMA_VERSION = 1

_NUM = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*[+-]?\d+(\.\d+)?(\s*/\s*\d+)?\s*$"},
    ]
}
_TABLE = {"type": "object", "patternProperties": {r"^-?\d+$": _NUM}, "additionalProperties": False}

WALK_SCHEMA = {
    "type": "object",
    "required": ["model", "d", "alpha"],
    "properties": {
        "model": {"enum": ["model1", "model2", "model3", "model4", "model5", "modelB1"]},
        "d": {"type": "integer", "minimum": 1},
        "alpha": {"type": "array", "items": _NUM, "minItems": 1},
        "delta": {"type": "array", "items": _NUM},
        "c": _NUM,
        "M": {"type": "integer", "minimum": 0},
        "rho": _NUM,
        "rate_tables": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"up": _TABLE, "down": _TABLE},
                "additionalProperties": False,
            },
        },
    },
}

RATES_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["bd_gamma", "ratio", "uniform", "table"]},
        "gamma": _NUM,
        "d": {"type": "integer", "minimum": 1},
        "c": _NUM,
        "alpha": _NUM,
        "up": {"type": "array", "items": _NUM},
        "down": {"type": "array", "items": _NUM},
        "tail_up": _NUM,
        "tail_down": _NUM,
    },
    "additionalProperties": False,
}

SIM_SCHEMA = {
    "type": "object",
    "properties": {
        "steps": {"type": "integer", "minimum": 1},
        "walks": {"type": "integer", "minimum": 1},
        "burn_in": {"type": "integer", "minimum": 0},
        "n_max": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "radius": {"type": "integer", "minimum": 0},
        "checkpoints": {"type": "array", "items": {"type": "integer", "minimum": 1}},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        **WALK_SCHEMA["properties"],
        "walks": {"type": "array", "items": WALK_SCHEMA},
        "rates": RATES_SCHEMA,
        "coordinates": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["rates"],
                "properties": {"rates": RATES_SCHEMA, "reflection_doubling": {"type": "boolean"}},
                "additionalProperties": False,
            },
        },
        "sim": SIM_SCHEMA,
    },
    "dependentRequired": {"model": ["d", "alpha"], "d": ["model", "alpha"], "alpha": ["model", "d"]},
    "additionalProperties": False,
}


@dataclass
class ConfigError(ValueError):
    errors: list[tuple[str, str]]

    def __str__(self) -> str:
        return "; ".join(f"{ptr or '/'}: {msg}" for ptr, msg in self.errors)

    def to_dict(self) -> dict:
        return {"errors": [{"pointer": p, "message": m} for p, m in self.errors]}


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def num_out(x):
    return str(x) if isinstance(x, Fraction) else x


def walk_to_dict(spec: WalkSpec) -> dict:
    out: dict[str, Any] = {"model": spec.model.value, "d": spec.d, "alpha": [num_out(a) for a in spec.alpha]}
    if spec.delta is not None:
        out["delta"] = [num_out(x) for x in spec.delta]
    if spec.c is not None:
        out["c"] = num_out(spec.c)
    if spec.big_m is not None:
        out["M"] = spec.big_m
    if spec.rho is not None:
        out["rho"] = num_out(spec.rho)
    if spec.rate_tables is not None:
        tables = []
        for t in spec.rate_tables:
            doc = {"up": {str(s): num_out(v) for s, v in sorted(t.up.items())}}
            if t.down is not None:
                doc["down"] = {str(s): num_out(v) for s, v in sorted(t.down.items())}
            tables.append(doc)
        out["rate_tables"] = tables
    return out


def walk_from_dict(doc: dict, pointer: str = "") -> WalkSpec:
    errors = [
        (pointer + _pointer(e.absolute_path), e.message)
        for e in jsonschema.Draft202012Validator(WALK_SCHEMA).iter_errors(doc)
    ]
    if errors:
        raise ConfigError(errors)
    try:
        spec = WalkSpec.build(
            doc["model"],
            doc["d"],
            doc["alpha"],
            delta=doc.get("delta"),
            c=doc.get("c"),
            big_m=doc.get("M"),
            rate_tables=doc.get("rate_tables"),
            rho=doc.get("rho"),
        )
        return validate(spec)
    except SpecError as exc:
        raise ConfigError([(pointer, str(v)) for v in exc.violations]) from exc
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError([(pointer, str(exc))]) from exc


def sim_from_dict(doc: dict, **overrides) -> SimConfig:
    merged = {**doc, **{k: v for k, v in overrides.items() if v is not None}}
    if "steps" not in merged:
        raise ConfigError([("/sim/steps", "simulation horizon 'steps' is required")])
    merged["checkpoints"] = tuple(merged.get("checkpoints", ()))
    try:
        return SimConfig(**merged)
    except (ValueError, TypeError) as exc:
        raise ConfigError([("/sim", str(exc))]) from exc


def sim_to_dict(cfg: SimConfig) -> dict:
    return {
        "steps": cfg.steps,
        "walks": cfg.walks,
        "burn_in": cfg.burn_in,
        "n_max": cfg.n_max,
        "seed": cfg.seed,
        "radius": cfg.radius,
        "checkpoints": list(cfg.checkpoints),
    }


@dataclass
class ConfigBundle:
    walk: Optional[WalkSpec] = None
    walks: list[WalkSpec] = field(default_factory=list)
    rates: Optional[CoordinateRates] = None
    coordinates: Optional[list[CoordinateChainSpec]] = None
    sim: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        if self.walk is not None:
            out.update(walk_to_dict(self.walk))
        if self.walks:
            out["walks"] = [walk_to_dict(w) for w in self.walks]
        if self.rates is not None:
            out["rates"] = self.rates.to_dict()
        if self.coordinates is not None:
            out["coordinates"] = [c.to_dict() for c in self.coordinates]
        if self.sim:
            out["sim"] = dict(self.sim)
        return out


def parse_config(doc: Any) -> ConfigBundle:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError([(_pointer(e.absolute_path), e.message) for e in errors])
    bundle = ConfigBundle(sim=dict(doc.get("sim", {})))
    if "model" in doc:
        bundle.walk = walk_from_dict({k: doc[k] for k in WALK_SCHEMA["properties"] if k in doc})
    bundle.walks = [walk_from_dict(w, f"/walks/{i}") for i, w in enumerate(doc.get("walks", []))]
    try:
        if "rates" in doc:
            bundle.rates = rates_from_dict(doc["rates"])
        if "coordinates" in doc:
            bundle.coordinates = [
                CoordinateChainSpec(rates_from_dict(c["rates"]), bool(c.get("reflection_doubling", False)))
                for c in doc["coordinates"]
            ]
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        raise ConfigError([("", f"bad rates: {exc}")]) from exc
    return bundle


def load_config(path) -> ConfigBundle:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError([("", f"config file not found: {path}")]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"malformed JSON: {exc}")]) from exc
    return parse_config(doc)

