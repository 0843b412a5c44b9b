"""
Application configuration using Pydantic BaseSettings.

This module provides centralized configuration management with environment
variable support. Every field can be overridden with a ``HAWKESHIVE_`` prefixed
environment variable or through a ``.env`` file in the working directory.
"""

from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from hawkeshive import __version__


class Settings(BaseSettings):
    """Library and CLI settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="HAWKESHIVE_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "HawkesHive"
    APP_VERSION: str = __version__
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = False

    # Simulation
    max_events: int = Field(default=5_000_000, description="Explosion cap on simulated events")
    max_workers: int = Field(default=4, description="Thread pool size for Monte Carlo ensembles")

    # Kernels and stability
    support_tolerance: float = Field(
        default=1e-6, description="Tail mass fraction defining the effective kernel support"
    )
    power_iteration_tol: float = Field(default=1e-12, description="Power iteration residual tolerance")
    power_iteration_max_iter: int = Field(default=10_000, description="Power iteration budget")
    near_critical_margin: float = Field(
        default=1e-6, description="Models with spectral radius above 1 - margin are refused"
    )
    criticality_threshold: float = Field(
        default=0.95, description="Branching ratio above which reports flag criticality"
    )

    # Analytics
    fourier_cutoff_ratio: float = Field(
        default=1e-6, description="Relative spectrum level defining the inversion cutoff"
    )
    fourier_max_points: int = Field(
        default=2**18, description="Largest FFT grid allowed for covariance inversion"
    )

    # Estimation
    condition_number_limit: float = Field(
        default=1e12, description="Condition number above which linear solves are refused"
    )
    pair_chunk_size: int = Field(
        default=2_000_000, description="Event pairs materialized at once by lag scans"
    )
    edge_window_fraction: float = Field(
        default=0.1, description="Largest share of a record kept as history-only edge window"
    )

    # Observability
    metrics_enabled: bool = Field(default=False, description="Enable Prometheus metrics")

    @field_validator(
        "support_tolerance",
        "power_iteration_tol",
        "near_critical_margin",
        "fourier_cutoff_ratio",
        "condition_number_limit",
        "edge_window_fraction",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be strictly positive")
        return v

    @field_validator("max_events", "max_workers", "power_iteration_max_iter", "fourier_max_points", "pair_chunk_size")
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_level(cls, v: Any) -> str:
        return str(v).upper()


# Global settings instance
settings = Settings()
