"""Experiment configuration: one flat dataclass, INI files with sections,
named presets.

Precedence when resolving a run: dataclass defaults, then preset, then
config file, then command-line flags.
"""
from __future__ import annotations

import configparser
import dataclasses
import enum
import math
from dataclasses import dataclass
from pathlib import Path

from .coupled_system import Fixed, Growing, Policy
from .errors import ConfigError
from .hamiltonian import RampSchedule, Variant
from .oscillator_basis import GridSpec, OscillatorModel


class Solver(str, enum.Enum):
    GROWING = "growing"
    FIXED = "fixed"
    GRID = "grid"
    GAUSSIAN = "gaussian"

    @property
    def is_expansion(self) -> bool:
        return self in (Solver.GROWING, Solver.FIXED)


@dataclass(frozen=True)
class ExperimentConfig:
    # schedule
    eta: float = 1.0
    T: float = 1.0
    variant: Variant = Variant.RAMP_UP
    plateau: bool = False
    # model
    m: float = 1.0
    k: float = 1.0
    hbar: float = 1.0
    # solver
    solver: Solver = Solver.GROWING
    fixed_size: int = 512
    h: float = 0.001
    end_time: float = 3.0
    precision: str = "double"
    abort_ceiling: float = 1e6
    grid_half_width: float = 16.0
    grid_points: int = 4096
    grid_dt: float = 1e-4
    project_n_max: int = 150
    # recording
    record_interval: float = 0.001
    compare_n_max: int = 100
    threshold: float = 0.1
    output: str = "run.csv"

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
            object.__setattr__(self, "solver", Solver(self.solver))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        positive = ("T", "m", "k", "hbar", "h", "grid_half_width", "grid_dt",
                    "record_interval", "threshold", "abort_ceiling")
        for name in positive:
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        if not math.isfinite(self.eta):
            raise ConfigError("eta must be finite")
        if self.end_time < 0 or not math.isfinite(self.end_time):
            raise ConfigError("end_time must be non-negative and finite")
        for name in ("fixed_size", "grid_points", "project_n_max", "compare_n_max"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.precision not in ("double", "extended"):
            raise ConfigError("precision must be 'double' or 'extended'")
        if self.steps_between(self.record_interval, self.h) is None:
            raise ConfigError("record_interval must be a whole number of steps h")
        if self.steps_between(self.record_interval, self.grid_dt) is None:
            raise ConfigError("record_interval must be a whole number of steps grid_dt")
        if self.steps_between(self.end_time, self.h) is None:
            raise ConfigError("end_time must be a whole number of steps h")

    @staticmethod
    def steps_between(span: float, h: float) -> int | None:
        n = round(span / h)
        return n if math.isclose(n * h, span, rel_tol=1e-9, abs_tol=1e-12) else None

    @property
    def schedule(self) -> RampSchedule:
        return RampSchedule(self.eta, self.T, self.variant, self.plateau)

    @property
    def model(self) -> OscillatorModel:
        return OscillatorModel(self.m, self.k, self.hbar)

    @property
    def policy(self) -> Policy:
        return Fixed(self.fixed_size) if self.solver is Solver.FIXED else Growing()

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.grid_half_width, self.grid_points)

    @property
    def steps(self) -> int:
        return self.steps_between(self.end_time, self.h)

    @property
    def record_every(self) -> int:
        return self.steps_between(self.record_interval, self.h)

    def replace(self, **changes) -> "ExperimentConfig":
        unknown = set(changes) - FIELD_NAMES
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["variant"] = self.variant.value
        out["solver"] = self.solver.value
        return out


FIELD_NAMES = frozenset(f.name for f in dataclasses.fields(ExperimentConfig))

# INI layout: which keys live in which section
SECTIONS = {
    "schedule": ("eta", "T", "variant", "plateau"),
    "model": ("m", "k", "hbar"),
    "solver": ("solver", "fixed_size", "h", "end_time", "precision", "abort_ceiling",
               "grid_half_width", "grid_points", "grid_dt", "project_n_max"),
    "output": ("record_interval", "compare_n_max", "threshold", "output"),
}

PRESETS = {
    "fig1": dict(solver=Solver.GROWING, end_time=3.2, abort_ceiling=1e8, output="fig1.csv"),
    "fig2": dict(solver=Solver.GROWING, end_time=3.2, abort_ceiling=1e8, output="fig2.csv"),
    "ramp-down": dict(variant=Variant.RAMP_DOWN, solver=Solver.GRID, end_time=1.0,
                      output="ramp_down.csv"),
    "oracle-check": dict(solver=Solver.FIXED, end_time=1.0, output="oracle_check.csv"),
    "series-growth": dict(output="series_growth.csv"),
}


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}[name]
    text = raw.strip()
    try:
        if kind == "bool":
            lowered = text.lower()
            if lowered not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(text)
            return lowered in ("true", "yes", "1", "on")
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot read {raw!r} as {kind}") from None
    return text


def parse_ini(text: str) -> dict:
    """Read a sectioned key = value file into field overrides.

    Unknown sections, unknown keys and keys in the wrong section are errors.
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str  # keep 'T' distinct from 't'
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    overrides = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                home = next((s for s, keys in SECTIONS.items() if key in keys), None)
                hint = f" (belongs in [{home}])" if home else ""
                raise ConfigError(f"unknown key {key!r} in [{section}]{hint}")
            overrides[key] = _coerce(key, raw)
    return overrides


def to_ini(config: ExperimentConfig) -> str:
    values = config.as_dict()
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {values[key]}" for key in keys)
        lines.append("")
    return "\n".join(lines)


def resolve(preset: str | None = None, path: str | Path | None = None,
            overrides: dict | None = None) -> ExperimentConfig:
    config = ExperimentConfig()
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        config = config.replace(**PRESETS[preset])
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        config = config.replace(**parse_ini(text))
    if overrides:
        config = config.replace(**{k: v for k, v in overrides.items() if v is not None})
    return config


def default_ini() -> str:
    """Full schema with defaults, suitable as a starting config file."""
    return to_ini(ExperimentConfig())


__all__ = ["ExperimentConfig", "Solver", "PRESETS", "SECTIONS", "parse_ini", "to_ini",
           "resolve", "default_ini"]
