"""
Tests for the analytic statistics of linear Hawkes models.
"""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from hawkeshive.core.errors import ModelSpecException, NearCriticalityException, StabilityException
from hawkeshive.domain.events import EventSequence
from hawkeshive.domain.kernels import ExponentialKernel, PiecewiseConstantKernel, PowerLawKernel, ZeroKernel
from hawkeshive.domain.model import HawkesModel, Transfer
from hawkeshive.services.analytics import (
    asymptotic_count_covariance,
    causality_rates,
    correlation_laplace,
    correlation_time_domain,
    diffusion_coefficients,
    mean_intensity,
    predict_intensity,
    require_stable,
    resolvent_norms,
    summarize,
)


class TestMeanIntensity:
    def test_example_one(self, example_one_model):
        assert mean_intensity(example_one_model) == pytest.approx([2.0, 2.0])

    def test_power_law(self, power_law_model):
        assert mean_intensity(power_law_model) == pytest.approx([2.0])

    def test_poisson(self):
        assert mean_intensity(HawkesModel.poisson([0.5, 3.0])) == pytest.approx([0.5, 3.0])

    def test_resolvent_identity(self, example_one_model):
        """Λ = (I + Ψ̂(0)) μ."""
        lam = mean_intensity(example_one_model)
        psi = resolvent_norms(example_one_model)
        assert (np.eye(2) + psi) @ example_one_model.baseline == pytest.approx(lam)

    def test_unstable_refused(self):
        with pytest.raises(StabilityException):
            mean_intensity(HawkesModel.exponential_1d(1.0, 1.2, 1.0))

    def test_near_critical_refused(self):
        with pytest.raises(NearCriticalityException):
            require_stable(HawkesModel.exponential_1d(1.0, 1.0 - 1e-8, 1.0))

    def test_positive_part_transfer_refused(self):
        model = HawkesModel.create(
            [1.0], [[PiecewiseConstantKernel((0.0, 1.0), (-0.2,))]], transfer=Transfer.POSITIVE_PART
        )
        with pytest.raises(ModelSpecException):
            mean_intensity(model)


class TestCorrelation:
    def test_laplace_at_zero(self, exponential_model):
        assert correlation_laplace(exponential_model, 0.0)[0, 0].real == pytest.approx(8.0)

    def test_laplace_poisson_is_diagonal(self):
        value = correlation_laplace(HawkesModel.poisson([1.0, 2.0]), 0.3j)
        assert value.real == pytest.approx(np.diag([1.0, 2.0]))
        assert value.imag == pytest.approx(np.zeros((2, 2)))

    def test_symmetric_modes(self, example_one_model):
        value = correlation_laplace(example_one_model, 0.0).real
        assert value[0, 0] + value[0, 1] == pytest.approx(2.0 / 0.5**2)
        assert value[0, 0] - value[0, 1] == pytest.approx(2.0 / 1.1**2)

    def test_closed_form_cross_only(self):
        model = HawkesModel.symmetric_bivariate(1.0, ZeroKernel(), ExponentialKernel(0.1, 1.0))
        lags = np.linspace(0.1, 5.0, 20)
        estimate = correlation_time_domain(model, lags)
        assert estimate.method == "closed_form"
        c_plus = estimate.values[:, 0, 0] + estimate.values[:, 0, 1]
        assert c_plus == pytest.approx(0.117284 * np.exp(-0.9 * lags), rel=1e-5)

    def test_fourier_matches_closed_form(self, exponential_model):
        lags = np.array([0.5, 1.0, 2.0, 5.0])
        closed = correlation_time_domain(exponential_model, lags)
        fourier = correlation_time_domain(exponential_model, lags, method="fourier")
        assert closed.method == "closed_form" and fourier.method == "fourier"
        assert fourier.values[:, 0, 0] == pytest.approx(closed.values[:, 0, 0], rel=1e-2)
        assert closed.values[:, 0, 0] == pytest.approx(1.5 * np.exp(-0.5 * lags))

    @pytest.mark.parametrize("model_name", ["exponential_model", "example_one_model"])
    def test_fourier_integral_matches_laplace_at_zero(self, model_name, request):
        model = request.getfixturevalue(model_name)
        lags = np.linspace(-40.0, 40.0, 8001)
        estimate = correlation_time_domain(model, lags, method="fourier")
        total = trapezoid(estimate.values, lags, axis=0) + np.diag(estimate.atoms)
        assert total == pytest.approx(correlation_laplace(model, 0.0).real, rel=1e-2)

    def test_atoms_are_mean_intensity(self, example_one_model):
        estimate = correlation_time_domain(example_one_model, [1.0])
        assert estimate.atoms == pytest.approx([2.0, 2.0])

    def test_heavy_tail_stays_in_laplace_domain(self):
        model = HawkesModel.create([1.0], [[PowerLawKernel(0.1, 1.0, 0.3)]])
        estimate = correlation_time_domain(model, [1.0, 10.0])
        assert estimate.values is None
        assert estimate.method == "laplace_only"
        assert estimate.laplace_values.shape == (estimate.frequencies.size, 1, 1)

    def test_closed_form_refused_for_power_law(self, power_law_model):
        with pytest.raises(ModelSpecException):
            correlation_time_domain(power_law_model, [1.0], method="closed_form")


class TestCausality:
    def test_poisson_has_no_endogenous_events(self):
        tables = causality_rates(HawkesModel.poisson([1.5]))
        assert tables.exogenous == pytest.approx([1.5])
        assert tables.direct == pytest.approx([[0.0]])

    def test_endogenous_fraction(self, exponential_model):
        tables = causality_rates(exponential_model)
        lam = mean_intensity(exponential_model)
        assert tables.direct.sum() / lam.sum() == pytest.approx(0.5)

    def test_tables_sum_to_mean_intensity(self, example_one_model):
        tables = causality_rates(example_one_model)
        lam = mean_intensity(example_one_model)
        assert tables.exogenous + tables.direct.sum(axis=1) == pytest.approx(lam)
        assert tables.exogenous + tables.ancestor.sum(axis=1) == pytest.approx(lam)


class TestPrediction:
    def test_no_excitation_is_baseline(self):
        history = EventSequence.from_arrays([0.2, 0.7], [0, 0], horizon=1.0)
        model = HawkesModel.poisson([1.3])
        path = predict_intensity(model, history, 1.0, [1.0, 2.0, 5.0])
        assert path.values[:, 0] == pytest.approx([1.3, 1.3, 1.3])

    def test_exponential_relaxation(self, exponential_model):
        history = EventSequence.from_arrays([0.9], [0], horizon=1.0)
        grid = np.array([1.0, 1.5, 3.0, 10.0])
        path = predict_intensity(exponential_model, history, 1.0, grid)
        start = 1.0 + 0.5 * np.exp(-0.1)
        expected = 2.0 + (start - 2.0) * np.exp(-0.5 * (grid - 1.0))
        assert path.values[:, 0] == pytest.approx(expected, rel=1e-8)

    def test_power_law_rises_towards_mean(self, power_law_model):
        history = EventSequence.empty(horizon=0.0)
        path = predict_intensity(power_law_model, history, 0.0, np.linspace(0.0, 20.0, 41))
        values = path.values[:, 0]
        assert values[0] == pytest.approx(1.0)
        assert np.all(np.diff(values) >= -1e-9)
        assert values[-1] < 2.0


class TestDiffusion:
    def test_poisson(self):
        assert diffusion_coefficients(HawkesModel.poisson([4.0, 9.0])) == pytest.approx(np.diag([2.0, 3.0]))

    def test_symmetric_closed_form(self, example_one_model):
        expected = np.array([[0.8, 0.3], [0.3, 0.8]]) / 0.55 * np.sqrt(2.0)
        assert diffusion_coefficients(example_one_model) == pytest.approx(expected)

    def test_count_covariance_matches_laplace(self, example_one_model):
        """Cov(N_T)/T tends to ĉ(0)."""
        expected = correlation_laplace(example_one_model, 0.0).real
        assert asymptotic_count_covariance(example_one_model) == pytest.approx(expected)


def test_summarize(example_one_model):
    result = summarize(example_one_model)
    assert result.mean_intensity == pytest.approx([2.0, 2.0])
    assert result.stability.spectral_radius == pytest.approx(0.5)
    assert result.causality.exogenous == pytest.approx([1.0, 1.0])
