"""
Pytest configuration.

This module provides shared models, simulated records and housekeeping
fixtures for the hawkeshive test suite.
"""

from typing import Callable

import numpy as np
import pytest

from hawkeshive.core.metrics import metrics_collector
from hawkeshive.core.observability import setup_structured_logging
from hawkeshive.domain.events import EventSequence
from hawkeshive.domain.kernels import ExponentialKernel, PowerLawKernel, ZeroKernel
from hawkeshive.domain.model import HawkesModel
from hawkeshive.domain.schemas import SimConfig, SimulationAlgorithm
from hawkeshive.services.simulation import simulate

EXAMPLE_ONE_SPEC = """\
# symmetric bivariate model with Λ0 = 2
dimension = 2
mu = 1.0, 1.0
transfer = identity
kernel.0.0 = exponential alpha=0.2 beta=1.0
kernel.0.1 = exponential alpha=0.3 beta=1.0
kernel.1.0 = exponential alpha=0.3 beta=1.0
kernel.1.1 = exponential alpha=0.2 beta=1.0
"""


@pytest.fixture(scope="session", autouse=True)
def configure_logging() -> None:
    """Quiet console logging for the whole session."""
    setup_structured_logging(level="WARNING", json=False)


@pytest.fixture(autouse=True)
def metrics_disabled(monkeypatch):
    """Keep the process-wide collector off unless a test turns it on."""
    monkeypatch.setattr(metrics_collector, "enabled", False)


@pytest.fixture
def example_one_model() -> HawkesModel:
    """μ0 = 1, α_self = 0.2, α_cross = 0.3, β = 1."""
    return HawkesModel.symmetric_bivariate(1.0, ExponentialKernel(0.2, 1.0), ExponentialKernel(0.3, 1.0))


@pytest.fixture
def exponential_model() -> HawkesModel:
    return HawkesModel.exponential_1d(1.0, 0.5, 1.0)


@pytest.fixture
def power_law_model() -> HawkesModel:
    return HawkesModel.create([1.0], [[PowerLawKernel(0.25, 1.0, 0.5)]])


@pytest.fixture
def mean_reverting_model() -> HawkesModel:
    """Price model with cross excitation only: up moves trigger down moves and back."""
    return HawkesModel.symmetric_bivariate(1.0, ZeroKernel(), ExponentialKernel(0.5, 1.0))


@pytest.fixture
def simulate_events() -> Callable[..., EventSequence]:
    """Factory simulating a model with a fixed seed."""

    def _simulate(
        model: HawkesModel,
        horizon: float,
        seed: int = 7,
        algorithm: SimulationAlgorithm = SimulationAlgorithm.THINNING,
        burn_in: float = 0.0,
    ) -> EventSequence:
        cfg = SimConfig(seed=seed, horizon=horizon, algorithm=algorithm, burn_in=burn_in)
        return simulate(model, cfg).events

    return _simulate


@pytest.fixture
def poisson_events(simulate_events) -> EventSequence:
    return simulate_events(HawkesModel.poisson([2.0]), 5_000.0, seed=11)


@pytest.fixture
def tiny_events() -> EventSequence:
    return EventSequence.from_arrays([1.0, 2.0], [0, 0], horizon=10.0, dimension=1)


@pytest.fixture
def example_one_spec(tmp_path):
    path = tmp_path / "example_one.model"
    path.write_text(EXAMPLE_ONE_SPEC, encoding="utf-8")
    return path


def assert_within_band(value: float, target: float, stderr: float, n_sigma: float = 4.0) -> None:
    assert abs(value - target) <= n_sigma * stderr, f"{value} not within {n_sigma}σ of {target} (σ={stderr})"


@pytest.fixture
def within_band():
    return assert_within_band


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)
