from __future__ import annotations

import json
import os
import re
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.core.errors import ConfigError


BUILTIN_METRICS = ("minkowski", "polar_flat_2d", "frw_1p1", "rindler_1p1")
OUTPUT_KINDS = ("norm", "expectation_p", "trajectory")


class MetricConfig(BaseModel):
    name: str = "minkowski"
    dim: int = Field(default=2, ge=1, le=4)
    kind: Literal["builtin", "table"] = "builtin"
    params: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_kind(self) -> "MetricConfig":
        if self.kind == "builtin" and self.name not in BUILTIN_METRICS:
            raise ValueError(f"unknown builtin metric {self.name!r}; choose from {', '.join(BUILTIN_METRICS)}")
        if self.kind == "table":
            g = self.params.get("g")
            if g is None:
                raise ValueError("table metric needs params.g")
            if len(g) != self.dim or any(len(row) != self.dim for row in g):
                raise ValueError(f"params.g must be {self.dim}x{self.dim}")
        return self


_SCALAR_RE = re.compile(r"^scalar:\s*\{?\s*([-+0-9.eE]+)\s*\}?$")
_RANDOM_RE = re.compile(r"^random_smooth:\s*\{?\s*([0-9]+)\s*,\s*([-+0-9.eE]+)\s*\}?$")


class TrivializationConfig(BaseModel):
    kind: Literal["identity", "scalar", "random_smooth"] = "identity"
    c: float = 1.0
    seed: int = 0
    amplitude: float = Field(default=0.2, ge=0.0, lt=0.5)

    @model_validator(mode="before")
    @classmethod
    def _parse_shorthand(cls, data: Any) -> Any:
        if not isinstance(data, str):
            return data
        text = data.strip()
        if text == "identity":
            return {"kind": "identity"}
        match = _SCALAR_RE.match(text)
        if match:
            return {"kind": "scalar", "c": float(match.group(1))}
        match = _RANDOM_RE.match(text)
        if match:
            return {"kind": "random_smooth", "seed": int(match.group(1)), "amplitude": float(match.group(2))}
        raise ValueError(f"unrecognized trivialization shorthand {text!r}")

    @field_validator("c")
    @classmethod
    def _nonzero_scale(cls, value: float) -> float:
        if value == 0.0:
            raise ValueError("scalar trivialization needs c != 0")
        return value


class LatticeConfig(BaseModel):
    n: int = Field(default=128, ge=3)
    dx: float = Field(default=0.1, gt=0.0)

    @property
    def length(self) -> float:
        return self.n * self.dx

    def coordinates(self) -> list[float]:
        return [i * self.dx for i in range(self.n)]


class EvolutionConfig(BaseModel):
    dt: float = Field(default=0.01, gt=0.0)
    steps: int = Field(default=100, ge=1)
    hbar: float = Field(default=1.0, gt=0.0)
    c: float = Field(default=1.0, gt=0.0)
    m: float = Field(default=0.0, ge=0.0)
    e: float = 0.0
    a0: list[float] | None = None
    a1: list[float] | None = None


class InitialConfig(BaseModel):
    kind: Literal["gaussian", "planewave", "rest"] = "gaussian"
    center: float | None = None
    width: float = Field(default=1.0, gt=0.0)
    k: float = 0.0
    amplitude: float = 1.0
    chirality: Literal["right", "left", "none"] = "right"


class ExperimentConfig(BaseModel):
    engine: Literal["dirac1p1", "schrodinger", "kg"] = "dirac1p1"
    lattice: LatticeConfig = Field(default_factory=LatticeConfig)
    cfg: EvolutionConfig = Field(default_factory=EvolutionConfig)
    initial: InitialConfig = Field(default_factory=InitialConfig)
    trivialization: TrivializationConfig = Field(default_factory=TrivializationConfig)
    metric: MetricConfig = Field(default_factory=MetricConfig)
    outputs: list[str] = Field(default_factory=lambda: ["norm", "expectation_p"])
    cross_check: bool = False

    @field_validator("outputs")
    @classmethod
    def _known_outputs(cls, value: list[str]) -> list[str]:
        unknown = [item for item in value if item not in OUTPUT_KINDS]
        if unknown:
            raise ValueError(f"unknown outputs {unknown}; allowed {list(OUTPUT_KINDS)}")
        return value

    @model_validator(mode="after")
    def _potentials_fit_lattice(self) -> "ExperimentConfig":
        for name in ("a0", "a1"):
            values = getattr(self.cfg, name)
            if values is not None and len(values) != self.lattice.n:
                raise ValueError(f"cfg.{name} has {len(values)} samples, lattice has {self.lattice.n}")
        if self.engine == "kg" and self.cfg.m <= 0.0:
            raise ValueError("kg engine needs cfg.m > 0")
        if self.engine == "schrodinger" and self.cfg.m <= 0.0:
            raise ValueError("schrodinger engine needs cfg.m > 0")
        flat = self.metric.kind == "builtin" and self.metric.name == "minkowski"
        if self.engine != "dirac1p1" and not flat:
            raise ValueError(f"metric {self.metric.name!r} applies to the dirac1p1 engine only")
        return self


class GridSpec(BaseModel):
    shape: list[int]
    lo: list[float]
    hi: list[float]

    @model_validator(mode="after")
    def _consistent(self) -> "GridSpec":
        if not (len(self.shape) == len(self.lo) == len(self.hi)):
            raise ValueError("grid shape, lo and hi must have the same length")
        if any(n < 1 for n in self.shape):
            raise ValueError("grid shape entries must be >= 1")
        return self


class GeometryRequest(BaseModel):
    metric: MetricConfig
    points: list[list[float]] = Field(default_factory=list)
    grid: GridSpec | None = None
    h: float = Field(default=1e-4, gt=0.0)

    @model_validator(mode="after")
    def _points_match_dim(self) -> "GeometryRequest":
        for point in self.points:
            if len(point) != self.metric.dim:
                raise ValueError(f"point {point} does not have {self.metric.dim} coordinates")
        if self.grid is not None and len(self.grid.shape) != self.metric.dim:
            raise ValueError(f"grid must have {self.metric.dim} axes")
        return self


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(item) for item in err.get("loc", ())) or "<root>"
        parts.append(f"field {loc}: {err.get('msg', 'invalid')}")
    return "; ".join(parts)


def parse_json_text(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def validate_model(model: type[BaseModel], data: Any) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(exc)) from exc


def _load(model: type[BaseModel], path: Path | str) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return validate_model(model, parse_json_text(text))


def load_experiment_config(path: Path | str) -> ExperimentConfig:
    return _load(ExperimentConfig, path)


def load_metric_config(path: Path | str) -> MetricConfig:
    return _load(MetricConfig, path)


def load_geometry_request(path: Path | str) -> GeometryRequest:
    """Accept either a full request or a bare metric config."""
    path = Path(path)
    try:
        data = parse_json_text(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    if isinstance(data, dict) and "metric" not in data:
        data = {"metric": data}
    return validate_model(GeometryRequest, data)


def thread_cap(default: int | None = None) -> int:
    raw = os.environ.get("CLIFFBUNDLE_THREADS", "")
    fallback = default if default is not None else min(8, os.cpu_count() or 1)
    if not raw.strip():
        return max(1, fallback)
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"CLIFFBUNDLE_THREADS must be an integer, got {raw!r}") from exc
