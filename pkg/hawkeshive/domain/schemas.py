"""
Pydantic schemas for run-level parameter objects.

This module defines the configuration models shared by the services and the CLI.
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.settings import settings


class SimulationAlgorithm(str, Enum):
    """Available simulation algorithms."""

    THINNING = "thinning"
    TIME_CHANGE = "time_change"
    CLUSTER = "cluster"


class TruncationPolicy(str, Enum):
    """History truncation in thinning."""

    SUPPORT = "support"
    NONE = "none"


class GridStyle(str, Enum):
    LINEAR = "linear"
    LOG = "log"
    AUTO = "auto"


class InputFormat(str, Enum):
    CSV = "csv"
    NDJSON = "ndjson"


class TiePolicy(str, Enum):
    STABLE = "stable"
    JITTER = "jitter"


class SimConfig(BaseModel):
    """Simulation run configuration."""

    seed: int = Field(0, ge=0, lt=2**64, description="64-bit master seed")
    horizon: float = Field(..., gt=0, description="Length of the retained window")
    burn_in: float = Field(0.0, ge=0, description="Discarded warm-up duration")
    algorithm: SimulationAlgorithm = Field(SimulationAlgorithm.THINNING, description="Sampling algorithm")
    truncation: TruncationPolicy = Field(TruncationPolicy.SUPPORT, description="History truncation policy")
    max_events: int = Field(default_factory=lambda: settings.max_events, gt=0, description="Explosion cap")
    stream: int = Field(0, ge=0, description="Path index mixed into the seed")

    def for_path(self, index: int) -> "SimConfig":
        return self.model_copy(update={"stream": index})


class QuadratureConfig(BaseModel):
    """Discretization of the Wiener-Hopf system and conditional-intensity estimation."""

    n_nodes: int = Field(64, ge=8, description="Number of quadrature nodes")
    support: float = Field(..., gt=0, description="Kernel support bound")
    grid: GridStyle = Field(GridStyle.AUTO, description="Node placement")
    bandwidth: Optional[float] = Field(None, gt=0, description="Density bandwidth; Silverman rule if unset")
    log_floor: Optional[float] = Field(None, gt=0, description="Smallest positive node of the log grid")


class IngestConfig(BaseModel):
    """Event file ingestion parameters."""

    path: str = Field(..., description="Input file path")
    format: InputFormat = Field(InputFormat.CSV, description="File format")
    time_scale: float = Field(1.0, gt=0, description="Multiplier converting file time units to seconds")
    component_map: Optional[Dict[str, int]] = Field(None, description="Label to component index")
    tie_policy: TiePolicy = Field(TiePolicy.STABLE, description="Duplicate timestamp handling")
    jitter_amplitude: float = Field(0.0, ge=0, description="Jitter half-width")
    resolution: Optional[float] = Field(None, gt=0, description="Minimum admissible inter-event resolution")
    session: Optional[Tuple[float, float]] = Field(None, description="Kept clock window [start, end]")
    dejitter: bool = Field(False, description="Spread throttled bursts uniformly within their resolution bin")
    seed: int = Field(0, ge=0, description="Seed for jitter draws")
    horizon: Optional[float] = Field(None, gt=0, description="Record length; last event time if unset")

    @field_validator("component_map")
    @classmethod
    def validate_component_map(cls, v: Optional[Dict[str, int]]) -> Optional[Dict[str, int]]:
        if v is not None and sorted(v.values()) != list(range(len(v))):
            raise ValueError("component map must assign indices 0..D-1 exactly once")
        return v

    @field_validator("session")
    @classmethod
    def validate_session(cls, v: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if v is not None and v[1] <= v[0]:
            raise ValueError("session end must follow session start")
        return v

    @model_validator(mode="after")
    def validate_jitter(self) -> "IngestConfig":
        if self.tie_policy is TiePolicy.JITTER:
            if self.jitter_amplitude <= 0:
                raise ValueError("jitter policy needs a positive amplitude")
            if self.resolution is not None and self.jitter_amplitude >= self.resolution:
                raise ValueError("jitter amplitude must be below the time resolution")
        if self.dejitter and self.resolution is None:
            raise ValueError("dejitter needs a resolution")
        return self


class MetaOrderProfile(BaseModel):
    """Piecewise-constant trading schedule r(t) on [0, T_exec]."""

    breakpoints: List[float] = Field(..., description="Increasing times starting at 0; last one is T_exec")
    rates: List[float] = Field(..., description="Trading rate on each segment")

    @model_validator(mode="after")
    def validate_schedule(self) -> "MetaOrderProfile":
        if len(self.breakpoints) != len(self.rates) + 1:
            raise ValueError("need one more breakpoint than rates")
        if self.breakpoints[0] != 0 or any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if any(r < 0 for r in self.rates):
            raise ValueError("trading rates must be non-negative")
        return self

    @classmethod
    def constant(cls, rate: float, duration: float) -> "MetaOrderProfile":
        return cls(breakpoints=[0.0, duration], rates=[rate])

    @property
    def execution_horizon(self) -> float:
        return self.breakpoints[-1]


class HimConfig(BaseModel):
    """Hawkes impact model parameters.

    The mean-reversion kernel is given in model-spec notation, e.g.
    ``"power_law alpha=0.4 beta=1 gamma=0.5"``.
    """

    kernel: str = Field(..., description="Mean-reversion kernel φ(s)")
    mu: float = Field(..., ge=0, description="Baseline rate of both components")
    contrarian_ratio: float = Field(..., ge=0, le=1, description="C in [0, 1]")
    impact_scale: float = Field(1.0, gt=0, description="k in f(v) = k v^a")
    impact_exponent: float = Field(1.0, gt=0, description="a in f(v) = k v^a")


class RunManifest(BaseModel):
    """Reproducibility record written by every CLI run."""

    command: str
    config_hash: str
    seed: Optional[int] = None
    library_version: str
    input_digest: Optional[str] = None
    outputs: List[str] = Field(default_factory=list)
