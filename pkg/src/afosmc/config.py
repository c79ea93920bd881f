"""JSON experiment configuration: parsing, validation and serialization.

A config document is a JSON object whose sections are all optional; any
missing field takes its default. Unknown keys are rejected at every level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .control import (AfosmcParams, BaselineParams, CompensatorParams, PidGains,
                      SmcGains)
from .harness import VELOCITY_ESTIMATES, Reference, Scenario
from .plant import Friction, PlantParams, Sinusoid, UncertaintyModel, default_uncertainty

__all__ = ["ConfigError", "MemoryLength", "SweepSettings", "OutputPaths", "Config",
           "parse_config", "load_config", "dump_config", "config_to_dict"]


class ConfigError(ValueError):
    """The configuration is malformed or violates a parameter invariant."""


@dataclass(frozen=True)
class MemoryLength:
    """Operator memory length with an explicit unit."""

    value: float = 50.0
    unit: str = "samples"

    def __post_init__(self):
        if self.unit not in ("samples", "seconds"):
            raise ValueError(f"memory unit must be 'samples' or 'seconds', got {self.unit!r}")
        if not (math.isfinite(self.value) and self.value > 0):
            raise ValueError("memory length must be positive")

    def seconds(self, step: float) -> float:
        return self.value * step if self.unit == "samples" else self.value


@dataclass(frozen=True)
class SweepSettings:
    """Memory lengths (seconds) and the run whose error signal is swept."""

    lengths: tuple[float, ...] = (0.01, 0.05, 0.1, 0.5, 1.0, 5.0)
    case: int = 1
    reference: int = 0

    def __post_init__(self):
        if not self.lengths or not all(math.isfinite(v) and v > 0 for v in self.lengths):
            raise ValueError("sweep lengths must be a non-empty list of positive seconds")
        if self.case not in (1, 2, 3):
            raise ValueError("sweep case must be 1, 2 or 3")
        if self.reference < 0:
            raise ValueError("sweep reference index must be non-negative")


@dataclass(frozen=True)
class OutputPaths:
    trace: str | None = None
    sweep: str | None = None
    figures: str | None = None


def _default_references() -> tuple[Reference, ...]:
    return tuple(Reference("sine", f, 1.0, 5.0) for f in (1.0, 5.0, 10.0))


@dataclass(frozen=True)
class Config:
    plant: PlantParams = field(
        default_factory=lambda: PlantParams(uncertainty=default_uncertainty()))
    afosmc: AfosmcParams = field(default_factory=AfosmcParams)
    memory: MemoryLength = field(default_factory=MemoryLength)
    compensator: CompensatorParams = field(default_factory=CompensatorParams)
    baseline: BaselineParams = field(default_factory=BaselineParams)
    references: tuple[Reference, ...] = field(default_factory=_default_references)
    step: float = 1e-3
    settle_skip: float | None = None  # None: one reference period
    quantization: float = 0.0
    velocity_estimate: str = "midpoint"
    sweep: SweepSettings = field(default_factory=SweepSettings)
    output: OutputPaths = field(default_factory=OutputPaths)

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.references:
            raise ValueError("at least one reference is required")
        if self.sweep.reference >= len(self.references):
            raise ValueError("sweep reference index out of range")
        if self.settle_skip is not None:
            if not (math.isfinite(self.settle_skip) and self.settle_skip >= 0):
                raise ValueError("settle_skip must be non-negative")
            if any(self.settle_skip >= r.duration for r in self.references):
                raise ValueError("settle_skip must be shorter than every reference duration")
        # the windows are built from afosmc.memory_L; keep it in step with the tag
        object.__setattr__(self, "afosmc",
                           replace(self.afosmc, memory_L=self.memory.seconds(self.step)))
        # constructing one scenario validates step, quantization and velocity_estimate
        self.scenario(1, 0)

    def scenario(self, case_id: int, reference: int = 0) -> Scenario:
        return Scenario(case_id, self.references[reference], self.plant, self.afosmc,
                        self.compensator, self.baseline, self.step, self.quantization,
                        self.velocity_estimate)

    def skip_for(self, reference: int) -> float:
        return self.references[reference].period if self.settle_skip is None else self.settle_skip


# ---------------------------------------------------------------------------
# parsing

def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite")
    return v


def _section(doc: Any, where: str, allowed: set[str]) -> dict:
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    return doc


def _numeric(cls, doc: Any, where: str, rename: dict[str, str] | None = None):
    """Build a dataclass of plain numbers from a JSON object."""
    rename = rename or {}
    inverse = {v: k for k, v in rename.items()}
    names = [f.name for f in fields(cls)]
    keys = {inverse.get(n, n) for n in names}
    d = _section(doc, where, keys)
    kwargs = {rename.get(k, k): _number(v, f"{where}.{k}") for k, v in d.items()}
    return _build(cls, kwargs, where)


def _build(cls, kwargs: dict, where: str):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_uncertainty(doc: Any) -> UncertaintyModel | None:
    if doc is None:
        return None
    if doc == "none":
        return UncertaintyModel()
    d = _section(doc, "uncertainty", {"dm", "db", "dc", "dg", "friction"})
    kw = {k: _numeric(Sinusoid, d[k], f"uncertainty.{k}")
          for k in ("dm", "db", "dc", "dg") if k in d}
    if "friction" in d:
        kw["friction"] = _numeric(Friction, d["friction"], "uncertainty.friction")
    return UncertaintyModel(**kw)


def _parse_compensator(doc: Any) -> CompensatorParams:
    d = dict(_section(doc, "compensator",
                      {"lambda1", "lambda2", "lambda3", "Q", "R", "kappa", "n_c"}))
    kw: dict[str, Any] = {}
    if "Q" in d:
        Q = d.pop("Q")
        ok = (isinstance(Q, list) and len(Q) == 3
              and all(isinstance(r, list) and len(r) == 3 for r in Q))
        if not ok:
            raise ConfigError("compensator.Q: expected a 3x3 nested list")
        kw["Q"] = np.array([[_number(x, "compensator.Q") for x in r] for r in Q])
    if "n_c" in d:
        n_c = d.pop("n_c")
        if isinstance(n_c, bool) or not isinstance(n_c, int):
            raise ConfigError("compensator.n_c: expected an integer")
        kw["n_c"] = n_c
    kw.update({k: _number(v, f"compensator.{k}") for k, v in d.items()})
    return _build(CompensatorParams, kw, "compensator")


def _parse_baseline(doc: Any) -> BaselineParams:
    d = _section(doc, "baseline", {"pid", "smc", "dob_bandwidth"})
    kw: dict[str, Any] = {}
    if "pid" in d:
        kw["pid"] = _numeric(PidGains, d["pid"], "baseline.pid")
    if "smc" in d:
        kw["smc"] = _numeric(SmcGains, d["smc"], "baseline.smc")
    if "dob_bandwidth" in d:
        kw["dob_bandwidth"] = _number(d["dob_bandwidth"], "baseline.dob_bandwidth")
    return _build(BaselineParams, kw, "baseline")


def _parse_reference(doc: Any, where: str) -> Reference:
    d = dict(_section(doc, where, {"kind", "frequency", "amplitude", "duration"}))
    kw: dict[str, Any] = {}
    if "kind" in d:
        kind = d.pop("kind")
        if not isinstance(kind, str):
            raise ConfigError(f"{where}.kind: expected a string")
        kw["kind"] = kind
    kw.update({k: _number(v, f"{where}.{k}") for k, v in d.items()})
    return _build(Reference, kw, where)


def _parse_memory(doc: Any) -> MemoryLength:
    d = dict(_section(doc, "memory", {"value", "unit"}))
    kw: dict[str, Any] = {}
    if "unit" in d:
        kw["unit"] = d["unit"]
    if "value" in d:
        kw["value"] = _number(d["value"], "memory.value")
    return _build(MemoryLength, kw, "memory")


def _parse_sweep(doc: Any) -> SweepSettings:
    d = _section(doc, "sweep", {"lengths", "case", "reference"})
    kw: dict[str, Any] = {}
    if "lengths" in d:
        if not isinstance(d["lengths"], list):
            raise ConfigError("sweep.lengths: expected a list")
        kw["lengths"] = tuple(_number(v, "sweep.lengths") for v in d["lengths"])
    for k in ("case", "reference"):
        if k in d:
            if isinstance(d[k], bool) or not isinstance(d[k], int):
                raise ConfigError(f"sweep.{k}: expected an integer")
            kw[k] = d[k]
    return _build(SweepSettings, kw, "sweep")


def _parse_output(doc: Any) -> OutputPaths:
    d = _section(doc, "output", {"trace", "sweep", "figures"})
    for k, v in d.items():
        if v is not None and not isinstance(v, str):
            raise ConfigError(f"output.{k}: expected a path string or null")
    return OutputPaths(**d)


_TOP_KEYS = {"plant", "uncertainty", "afosmc", "memory", "compensator", "baseline",
             "references", "simulation", "sweep", "output"}


def parse_config(text: str) -> Config:
    """Parse and validate a JSON config document.

    Raises
    ------
    ConfigError
        On malformed JSON, unknown keys or any parameter violating its invariants.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    doc = _section(doc, "config", _TOP_KEYS)
    kw: dict[str, Any] = {}

    plant_doc = _section(doc.get("plant"), "plant", {"m_bar", "b_bar", "c_bar", "g_bar"})
    plant_vals = {k: _number(v, f"plant.{k}") for k, v in plant_doc.items()}
    bare = _build(PlantParams, plant_vals, "plant")
    unc = _parse_uncertainty(doc.get("uncertainty"))
    if unc is None:
        unc = default_uncertainty(bare)
    kw["plant"] = _build(PlantParams, {**plant_vals, "uncertainty": unc}, "uncertainty")

    if isinstance(doc.get("afosmc"), dict) and "memory_L" in doc["afosmc"]:
        raise ConfigError("afosmc.memory_L: set the memory length in the 'memory' section")
    kw["afosmc"] = _numeric(AfosmcParams, doc.get("afosmc"), "afosmc",
                            {"lambda": "lam"})
    kw["memory"] = _parse_memory(doc.get("memory"))
    kw["compensator"] = _parse_compensator(doc.get("compensator"))
    kw["baseline"] = _parse_baseline(doc.get("baseline"))
    if "references" in doc:
        refs = doc["references"]
        if not isinstance(refs, list):
            raise ConfigError("references: expected a list")
        kw["references"] = tuple(_parse_reference(r, f"references[{i}]")
                                 for i, r in enumerate(refs))

    sim = dict(_section(doc.get("simulation"), "simulation",
                        {"step", "settle_skip", "quantization", "velocity_estimate"}))
    if "velocity_estimate" in sim:
        v = sim.pop("velocity_estimate")
        if v not in VELOCITY_ESTIMATES:
            raise ConfigError(f"simulation.velocity_estimate: must be one of {VELOCITY_ESTIMATES}")
        kw["velocity_estimate"] = v
    if sim.get("settle_skip", 0) is None:
        kw["settle_skip"] = sim.pop("settle_skip")
    kw.update({k: _number(v, f"simulation.{k}") for k, v in sim.items()})

    kw["sweep"] = _parse_sweep(doc.get("sweep"))
    kw["output"] = _parse_output(doc.get("output"))
    return _build(Config, kw, "config")


def load_config(path: str | Path) -> Config:
    """Read and parse a config file. ``OSError`` propagates unchanged."""
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# serialization

def _plain(obj, skip: tuple[str, ...] = (), rename: dict[str, str] | None = None) -> dict:
    rename = rename or {}
    return {rename.get(f.name, f.name): getattr(obj, f.name)
            for f in fields(obj) if f.name not in skip}


def _uncertainty_dict(u: UncertaintyModel) -> dict:
    out = {k: _plain(getattr(u, k)) for k in ("dm", "db", "dc", "dg")}
    out["friction"] = _plain(u.friction)
    return out


def config_to_dict(cfg: Config) -> dict:
    c = cfg.compensator
    return {
        "plant": _plain(cfg.plant, skip=("uncertainty",)),
        "uncertainty": _uncertainty_dict(cfg.plant.uncertainty),
        "afosmc": _plain(cfg.afosmc, skip=("memory_L",), rename={"lam": "lambda"}),
        "memory": _plain(cfg.memory),
        "compensator": {"lambda1": c.lambda1, "lambda2": c.lambda2, "lambda3": c.lambda3,
                        "Q": c.Q.tolist(), "R": c.R, "kappa": c.kappa, "n_c": c.n_c},
        "baseline": {"pid": _plain(cfg.baseline.pid), "smc": _plain(cfg.baseline.smc),
                     "dob_bandwidth": cfg.baseline.dob_bandwidth},
        "references": [_plain(r) for r in cfg.references],
        "simulation": {"step": cfg.step, "settle_skip": cfg.settle_skip,
                       "quantization": cfg.quantization,
                       "velocity_estimate": cfg.velocity_estimate},
        "sweep": {"lengths": list(cfg.sweep.lengths), "case": cfg.sweep.case,
                  "reference": cfg.sweep.reference},
        "output": _plain(cfg.output),
    }


def dump_config(cfg: Config) -> str:
    """Serialize to JSON; floats are written with round-trip precision."""
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"
