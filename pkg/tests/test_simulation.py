"""
Tests for the simulation algorithms.
"""

import numpy as np
import pytest
from scipy import stats

from hawkeshive.core.errors import ExplosionException, ModelSpecException, UnsupportedFamilyException
from hawkeshive.core.metrics import metrics_collector
from hawkeshive.domain.kernels import ExponentialKernel, PowerLawKernel
from hawkeshive.domain.model import HawkesModel, MarkImpact, MarkImpactKind, MarkLaw
from hawkeshive.domain.schemas import SimConfig, SimulationAlgorithm
from hawkeshive.services.analytics import causality_rates
from hawkeshive.services.simulation import (
    ensemble_counts,
    genealogy_tables,
    sample_cluster_sizes,
    simulate,
    simulate_cluster,
    simulate_marked,
    simulate_paths,
    simulate_thinning,
    simulate_time_change,
)


def _config(**overrides) -> SimConfig:
    params = {"seed": 5, "horizon": 1_000.0}
    params.update(overrides)
    return SimConfig(**params)


class TestPoisson:
    @pytest.mark.parametrize("algorithm", list(SimulationAlgorithm))
    def test_count_matches_rate(self, algorithm):
        events = simulate(HawkesModel.poisson([2.0]), _config(algorithm=algorithm)).events
        assert abs(len(events) - 2_000) <= 4 * np.sqrt(2_000)

    def test_zero_baseline_is_empty(self):
        model = HawkesModel.exponential_1d(0.0, 0.5, 1.0)
        for algorithm in SimulationAlgorithm:
            assert len(simulate(model, _config(algorithm=algorithm)).events) == 0


class TestDeterminism:
    def test_same_seed_same_events(self, exponential_model):
        first = simulate_thinning(exponential_model, _config())
        second = simulate_thinning(exponential_model, _config())
        assert np.array_equal(first.times, second.times)
        assert np.array_equal(first.components, second.components)

    def test_different_streams_differ(self, exponential_model):
        first = simulate_thinning(exponential_model, _config(stream=0))
        second = simulate_thinning(exponential_model, _config(stream=1))
        assert not np.array_equal(first.times, second.times)

    def test_parallel_paths_match_sequential(self, exponential_model):
        cfg = _config(horizon=200.0)
        results = simulate_paths(exponential_model, cfg, 4)
        for p, result in enumerate(results):
            expected = simulate(exponential_model, cfg.for_path(p)).events
            assert np.array_equal(result.events.times, expected.times)
        assert ensemble_counts(results).shape == (4, 1)


class TestStationaryRate:
    """Long runs reproduce Λ = μ / (1 − ||φ||)."""

    @pytest.mark.parametrize(
        "algorithm", [SimulationAlgorithm.THINNING, SimulationAlgorithm.TIME_CHANGE, SimulationAlgorithm.CLUSTER]
    )
    def test_exponential(self, exponential_model, algorithm):
        events = simulate(exponential_model, _config(horizon=20_000.0, burn_in=50.0, algorithm=algorithm)).events
        assert len(events) / events.horizon == pytest.approx(2.0, rel=0.05)

    @pytest.mark.slow
    def test_power_law(self, power_law_model):
        events = simulate_thinning(power_law_model, _config(horizon=5_000.0, burn_in=100.0))
        assert len(events) / events.horizon == pytest.approx(2.0, rel=0.1)

    def test_marked(self):
        model = HawkesModel.create(
            [1.0],
            [[ExponentialKernel(0.4, 1.0)]],
            mark_law=MarkLaw.create("exponential", mean=1.5),
            mark_impact=[[MarkImpact(MarkImpactKind.LINEAR)]],
        )
        events = simulate_marked(model, _config(horizon=20_000.0, burn_in=50.0))
        assert events.has_marks
        assert len(events) / events.horizon == pytest.approx(2.5, rel=0.05)

    def test_marked_needs_law(self, exponential_model):
        with pytest.raises(ModelSpecException):
            simulate_marked(exponential_model, _config())


@pytest.mark.slow
def test_thinning_and_time_change_agree(exponential_model):
    """Inter-event gaps of both samplers come from the same law."""
    gaps = []
    for algorithm in (SimulationAlgorithm.THINNING, SimulationAlgorithm.TIME_CHANGE):
        events = simulate(exponential_model, _config(horizon=5_000.0, algorithm=algorithm, seed=17)).events
        gaps.append(np.diff(events.times))
    assert stats.ks_2samp(*gaps).pvalue > 1e-3


class TestClusters:
    def test_mean_cluster_size(self, exponential_model):
        sizes = sample_cluster_sizes(exponential_model, 100_000, seed=3)
        assert sizes.min() >= 1
        assert sizes.mean() == pytest.approx(2.0, rel=0.02)

    def test_poisson_genealogy_is_flat(self):
        events, genealogy = simulate_cluster(HawkesModel.poisson([1.0]), _config(horizon=100.0))
        assert len(genealogy) == len(events)
        assert np.all(genealogy.parent == -1)
        assert np.all(genealogy.generation == 0)

    def test_parents_precede_children(self, example_one_model):
        events, genealogy = simulate_cluster(example_one_model, _config(horizon=500.0, burn_in=20.0))
        children = np.flatnonzero(genealogy.parent >= 0)
        assert children.size > 0
        assert np.all(genealogy.parent[children] < children)
        assert np.all(events.times[genealogy.parent[children]] <= events.times[children])
        assert np.all(genealogy.generation[children] == genealogy.generation[genealogy.parent[children]] + 1)

    @pytest.mark.slow
    def test_genealogy_matches_causality(self, example_one_model):
        result = simulate(
            example_one_model, _config(horizon=20_000.0, burn_in=50.0, algorithm=SimulationAlgorithm.CLUSTER)
        )
        empirical = genealogy_tables(result.events, result.genealogy)
        expected = causality_rates(example_one_model)
        assert empirical.direct == pytest.approx(expected.direct, rel=0.1)
        assert empirical.exogenous == pytest.approx(expected.exogenous, rel=0.1)

    def test_supercritical_refused(self):
        model = HawkesModel.exponential_1d(1.0, 1.5, 1.0)
        with pytest.raises(ExplosionException):
            simulate_cluster(model, _config())
        with pytest.raises(ExplosionException):
            sample_cluster_sizes(model, 10, seed=0)


class TestGuards:
    def test_thinning_explosion_cap(self):
        model = HawkesModel.exponential_1d(1.0, 1.5, 1.0)
        with pytest.raises(ExplosionException):
            simulate_thinning(model, _config(max_events=1_000))

    def test_time_change_needs_exponential(self, power_law_model):
        with pytest.raises(UnsupportedFamilyException):
            simulate_time_change(power_law_model, _config())

    def test_burn_in_shifts_window(self, exponential_model):
        events = simulate_thinning(exponential_model, _config(horizon=100.0, burn_in=30.0))
        assert events.horizon == 100.0
        assert len(events) == 0 or events.times.max() <= 100.0


def test_metrics_recorded(monkeypatch, exponential_model):
    monkeypatch.setattr(metrics_collector, "enabled", True)
    calls = []
    monkeypatch.setattr(metrics_collector, "record_simulation", lambda algorithm, n: calls.append((algorithm, n)))
    events = simulate_thinning(exponential_model, _config(horizon=50.0))
    assert calls == [("thinning", len(events))]


def test_power_law_lags_heavy_tail():
    rng = np.random.default_rng(9)
    lags = PowerLawKernel(0.25, 1.0, 0.5).sample_lags(rng, 200_000)
    # P(lag > t) = (1 + t)^{-γ}
    assert np.mean(lags > 99.0) == pytest.approx(0.1, rel=0.05)
