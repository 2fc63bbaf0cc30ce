from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.errors import ConfigurationError
from app.services.lattice.graph import LatticeGraph
from app.services.lattice.presets import ConfigPreset, CustomGraph, PhysicalParameters, Variant, preset_for
from app.services.spectral.sweep import make_grid


Analysis = Literal["spectrum", "sweep", "find-zero", "analyze", "reproduce"]
Figure = Literal["fig1", "fig2a", "fig2c", "fig3", "fig4"]

SCHEMA_VERSION = 1


class ParameterOverrides(BaseModel):
    """Physical parameters in units of t; unset fields keep the preset defaults."""

    model_config = ConfigDict(extra="forbid")

    t: Optional[float] = Field(None, gt=0)
    t_A: Optional[float] = Field(None, gt=0)
    t_B: Optional[float] = Field(None, gt=0)
    kappa0: Optional[float] = Field(None, ge=0)
    gamma: Optional[float] = Field(None, ge=0)
    t_prime: Optional[float] = None
    n_system: Optional[int] = Field(None, gt=0)
    n_reservoir: Optional[int] = Field(None, gt=0)
    n_tail: Optional[int] = Field(None, gt=0)
    system2_loss: Optional[bool] = None
    uniform_loss: Optional[float] = Field(None, ge=0)

    def values(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


class GridRange(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lo: float
    hi: float
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "GridRange":
        if self.hi <= self.lo:
            raise ValueError(f"grid hi ({self.hi}) must exceed lo ({self.lo})")
        return self

    def values(self) -> np.ndarray:
        return make_grid(self.lo, self.hi, self.step)


class Tolerances(BaseModel):
    """Per-run overrides of the numerical defaults in `Settings`."""

    model_config = ConfigDict(extra="forbid")

    zero: Optional[float] = Field(None, gt=0)
    axis: Optional[float] = Field(None, gt=0)
    nhph: Optional[float] = Field(None, gt=0)
    diagnostic: Optional[float] = Field(None, gt=0)
    ep_gap: Optional[float] = Field(None, gt=0)
    ep_overlap: Optional[float] = Field(None, gt=0, le=1)
    overlap_floor: Optional[float] = Field(None, gt=0, le=1)

    def settings_values(self) -> Dict[str, Any]:
        return {
            "ZERO_TOL": self.zero,
            "AXIS_TOL": self.axis,
            "NHPH_TOL": self.nhph,
            "DIAGNOSTIC_TOL": self.diagnostic,
            "EP_GAP_TOL": self.ep_gap,
            "EP_OVERLAP_MIN": self.ep_overlap,
            "TRACK_OVERLAP_FLOOR": self.overlap_floor,
        }


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: Literal[1]
    preset: Optional[str] = None
    parameters: ParameterOverrides = Field(default_factory=ParameterOverrides)
    graph: Optional[CustomGraph] = None
    sweep_grid: Optional[List[float] | GridRange] = None
    bracket: Optional[Tuple[float, float]] = None
    target_energy: Tuple[float, float] = (0.0, 0.0)
    analyses: List[Analysis] = Field(default_factory=lambda: ["spectrum"], min_length=1)
    figure: Optional[Figure] = None
    output_dir: Optional[str] = None
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("sweep_grid")
    @classmethod
    def _increasing(cls, value):
        if isinstance(value, list):
            if len(value) < 2:
                raise ValueError("sweep grid needs at least two values")
            if any(b <= a for a, b in zip(value, value[1:])):
                raise ValueError("sweep grid must be strictly increasing")
        return value

    @field_validator("bracket")
    @classmethod
    def _bracket(cls, value):
        if value is not None and not value[0] < value[1]:
            raise ValueError(f"bracket must satisfy lo < hi, got {list(value)}")
        return value

    @model_validator(mode="after")
    def _source(self) -> "ScenarioConfig":
        if self.graph is not None and self.preset not in (None, Variant.CUSTOM.value):
            raise ValueError("give either a preset or a custom graph, not both")
        if self.graph is None and self.preset is None and "reproduce" not in self.analyses:
            raise ValueError("a preset or a custom graph is required")
        if "reproduce" in self.analyses and self.figure is None:
            raise ValueError("reproduce needs a figure (fig1, fig2a, fig2c, fig3 or fig4)")
        # custom graphs never inherit a preset t'
        tuned = self.graph is not None and any(isinstance(b.amplitude, str) for b in self.graph.bonds)
        if tuned and self.parameters.t_prime is None:
            raise ConfigurationError("custom graph with a t_prime bond needs parameters.t_prime", key="parameters.t_prime")
        return self

    def to_preset(self) -> ConfigPreset:
        if self.graph is not None:
            params = PhysicalParameters(**self.parameters.values())
            return ConfigPreset(variant=Variant.CUSTOM, graph=self.graph, parameters=params)
        return preset_for(self.preset or self.figure, **self.parameters.values())

    def lattice(self, t_prime: Optional[float] = None) -> LatticeGraph:
        return self.to_preset().build(t_prime)

    def grid(self) -> np.ndarray:
        if self.sweep_grid is None:
            return make_grid()
        if isinstance(self.sweep_grid, GridRange):
            return self.sweep_grid.values()
        return np.asarray(self.sweep_grid, dtype=float)

    @property
    def t_prime(self) -> float:
        return self.to_preset().parameters.t_prime

    @property
    def target(self) -> complex:
        return complex(*self.target_energy)


def _key(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<root>"


def parse_config(text: str | bytes) -> ScenarioConfig:
    """Strict JSON scenario document; syntax errors carry line/column, semantic ones the key."""
    try:
        data = orjson.loads(text)
    except orjson.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be a JSON object", key="<root>")
    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigurationError(f"{_key(first)}: {first['msg']}", key=_key(first)) from exc

    # builds the lattice once so graph-level errors (duplicate bonds, bad sites) surface here
    try:
        config.lattice()
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigurationError(f"graph: {first['msg']}", key="graph") from exc
    return config
