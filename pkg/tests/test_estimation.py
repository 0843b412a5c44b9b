"""
Tests for the estimators: maximum likelihood, EM, moments, nonparametric
kernels, branching ratio and goodness of fit.
"""

import numpy as np
import pytest

from hawkeshive.core.errors import (
    DegenerateDataException,
    IdentifiabilityException,
    InputException,
    InsufficientDataException,
    UnsupportedFamilyException,
)
from hawkeshive.domain.events import EventSequence
from hawkeshive.domain.kernels import ExponentialKernel, ZeroKernel
from hawkeshive.domain.model import HawkesModel
from hawkeshive.domain.schemas import QuadratureConfig
from hawkeshive.services.estimation import (
    branching_ratio_estimate,
    estimate_conditional_intensity,
    fit_contrast,
    fit_em_nonparametric,
    fit_em_parametric,
    fit_mle,
    fit_moments,
    fit_moments_from_statistics,
    fit_wiener_hopf,
    goodness_of_fit,
    log_likelihood,
    model_count_moments,
)
from hawkeshive.services.estimation.families import ExponentialFamily, edge_start
from hawkeshive.services.estimation.nonparametric import kernel_l2_distance


@pytest.fixture
def exponential_record(simulate_events):
    """μ = 1, α = 0.5, β = 2 observed for 10⁴ time units."""
    return simulate_events(HawkesModel.exponential_1d(1.0, 0.5, 2.0), 10_000.0, seed=21, burn_in=20.0)


class TestMaximumLikelihood:
    def test_recovers_parameters(self, exponential_record, within_band):
        result = fit_mle(exponential_record)
        assert result.method == "mle_exponential"
        assert set(result.parameters) == {"mu.0", "alpha.0.0", "beta.0.0"}
        for name, truth in (("mu.0", 1.0), ("alpha.0.0", 0.5), ("beta.0.0", 2.0)):
            within_band(result.parameters[name], truth, result.standard_errors[name])
        assert result.stability.stable

    def test_best_iterate_beats_start(self, exponential_record):
        result = fit_mle(exponential_record, compute_standard_errors=False)
        assert result.standard_errors is None
        assert result.diagnostics["log_likelihood"] >= result.objective_trace[0] - 1e-9

    def test_default_start_skips_edge_window(self, exponential_record):
        family = ExponentialFamily(1)
        window = family.support(family.initial(exponential_record))
        default = fit_mle(exponential_record, compute_standard_errors=False)
        explicit = fit_mle(exponential_record, start=window, compute_standard_errors=False)
        everything = fit_mle(exponential_record, start=0.0, compute_standard_errors=False)
        assert 0.0 < window < exponential_record.horizon
        assert default.diagnostics["start"] == pytest.approx(window)
        assert default.parameters == explicit.parameters
        assert default.diagnostics["log_likelihood"] != everything.diagnostics["log_likelihood"]

    def test_empty_record_refused(self):
        with pytest.raises(DegenerateDataException):
            fit_mle(EventSequence.empty(horizon=10.0))

    def test_unknown_family(self, exponential_record):
        with pytest.raises(UnsupportedFamilyException):
            fit_mle(exponential_record, family="gaussian")

    @pytest.mark.slow
    def test_bivariate_shared_beta(self, example_one_model, simulate_events):
        events = simulate_events(example_one_model, 5_000.0, seed=4, burn_in=20.0)
        result = fit_mle(events, shared_beta=True)
        assert "beta" in result.parameters
        assert result.stability.spectral_radius == pytest.approx(0.5, abs=0.1)


class TestExpectationMaximization:
    def test_trace_is_non_decreasing(self, exponential_record):
        result = fit_em_parametric(exponential_record, max_iter=200)
        trace = result.objective_trace
        assert np.all(np.diff(trace) >= -1e-8 * np.abs(trace[:-1]))

    def test_close_to_mle(self, exponential_record):
        mle = fit_mle(exponential_record, compute_standard_errors=False)
        em = fit_em_parametric(exponential_record, max_iter=2_000)
        ll_mle = log_likelihood(mle.model, exponential_record)
        ll_em = log_likelihood(em.model, exponential_record)
        assert ll_em <= ll_mle + 1e-2
        assert ll_em >= ll_mle - 1.0

    def test_fixed_beta(self, exponential_record):
        init = np.array([0.5, 0.2, 3.0])
        result = fit_em_parametric(exponential_record, init=init, max_iter=50, fix_beta=True)
        assert result.parameters["beta.0.0"] == pytest.approx(3.0)

    @pytest.mark.slow
    def test_nonparametric_norm(self, simulate_events):
        events = simulate_events(HawkesModel.exponential_1d(1.0, 0.5, 1.0), 50_000.0, seed=8, burn_in=20.0)
        result = fit_em_nonparametric(events, np.linspace(0.0, 10.0, 21), max_iter=500)
        assert result.model.kernels[0, 0].l1_norm() == pytest.approx(0.5, abs=0.05)
        assert np.all(np.diff(result.objective_trace) >= -1e-8 * np.abs(result.objective_trace[:-1]))

    def test_nonparametric_levels_non_negative(self, exponential_record):
        result = fit_em_nonparametric(exponential_record, np.linspace(0.0, 3.0, 7), penalty=1.0, max_iter=100)
        assert result.model.kernels[0, 0].is_non_negative

    def test_nonparametric_needs_univariate(self, example_one_model, simulate_events):
        events = simulate_events(example_one_model, 100.0)
        with pytest.raises(UnsupportedFamilyException):
            fit_em_nonparametric(events, np.linspace(0.0, 3.0, 7))

    def test_nonparametric_grid_must_start_at_zero(self, exponential_record):
        with pytest.raises(InputException):
            fit_em_nonparametric(exponential_record, np.array([0.5, 1.0, 2.0]))


class TestMoments:
    def test_exact_moments_recover_1d(self):
        model = HawkesModel.exponential_1d(0.7, 0.3, 2.5)
        moments = model_count_moments(model, tau=2.0)
        result = fit_moments_from_statistics(moments.mean_rate, moments.tau, moments.lags, moments.covariances)
        assert result.parameters["mu"] == pytest.approx(0.7, rel=1e-5)
        assert result.parameters["alpha"] == pytest.approx(0.3, rel=1e-5)
        assert result.parameters["beta"] == pytest.approx(2.5, rel=1e-5)

    def test_exact_moments_recover_bivariate(self, example_one_model):
        moments = model_count_moments(example_one_model, tau=1.0)
        result = fit_moments_from_statistics(
            moments.mean_rate, moments.tau, moments.lags, moments.covariances, dimension=2
        )
        assert result.parameters["alpha_self"] == pytest.approx(0.2, rel=1e-5)
        assert result.parameters["alpha_cross"] == pytest.approx(0.3, rel=1e-5)
        assert result.parameters["beta"] == pytest.approx(1.0, rel=1e-5)

    def test_too_few_conditions(self):
        model = HawkesModel.exponential_1d(1.0, 0.5, 1.0)
        moments = model_count_moments(model, tau=1.0, lags=[0])
        with pytest.raises(IdentifiabilityException):
            fit_moments_from_statistics(moments.mean_rate, moments.tau, moments.lags, moments.covariances)

    def test_power_law_model_unsupported(self, power_law_model):
        with pytest.raises(UnsupportedFamilyException):
            model_count_moments(power_law_model, tau=1.0)

    def test_simulated_record(self, exponential_record):
        result = fit_moments(exponential_record, tau=2.0)
        assert result.stability.spectral_radius == pytest.approx(0.5, abs=0.15)


class TestNonparametricKernels:
    def test_poisson_conditional_intensity_is_flat(self, poisson_events):
        estimate = estimate_conditional_intensity(poisson_events, QuadratureConfig(support=5.0))
        assert np.abs(estimate.values).mean() < 0.2
        assert estimate.mean_intensity == pytest.approx([2.0], rel=0.05)

    def test_support_longer_than_record(self, tiny_events):
        with pytest.raises(InputException):
            estimate_conditional_intensity(tiny_events, QuadratureConfig(support=20.0))

    @pytest.mark.slow
    def test_wiener_hopf_norm(self, simulate_events):
        events = simulate_events(HawkesModel.exponential_1d(1.0, 0.5, 1.0), 50_000.0, seed=12, burn_in=20.0)
        result = fit_wiener_hopf(events, QuadratureConfig(support=10.0, n_nodes=32))
        assert result.model.kernels.signed_norm_matrix()[0, 0] == pytest.approx(0.5, abs=0.1)
        assert result.model.baseline[0] == pytest.approx(1.0, rel=0.25)

    def test_contrast_on_poisson(self, poisson_events):
        result = fit_contrast(poisson_events, support=5.0, n_bins=5)
        assert result.model.baseline[0] == pytest.approx(2.0, rel=0.15)
        assert abs(result.model.kernels.signed_norm_matrix()[0, 0]) < 0.15

    @pytest.mark.slow
    def test_contrast_norm(self, simulate_events):
        events = simulate_events(HawkesModel.exponential_1d(1.0, 0.5, 1.0), 50_000.0, seed=13, burn_in=20.0)
        result = fit_contrast(events, support=10.0, n_bins=20)
        assert result.model.kernels.signed_norm_matrix()[0, 0] == pytest.approx(0.5, abs=0.1)

    @pytest.mark.slow
    def test_wiener_hopf_and_contrast_agree(self, simulate_events):
        events = simulate_events(HawkesModel.exponential_1d(1.0, 0.5, 1.0), 50_000.0, seed=14, burn_in=20.0)
        wiener_hopf = fit_wiener_hopf(events, QuadratureConfig(support=10.0, n_nodes=32))
        contrast = fit_contrast(events, support=10.0, n_bins=20)
        wh_norm = wiener_hopf.model.kernels.signed_norm_matrix()[0, 0]
        contrast_norm = contrast.model.kernels.signed_norm_matrix()[0, 0]
        assert wh_norm == pytest.approx(contrast_norm, abs=0.15)
        assert wiener_hopf.model.baseline[0] == pytest.approx(contrast.model.baseline[0], rel=0.3)

    def test_contrast_penalty_shrinks(self, poisson_events):
        plain = fit_contrast(poisson_events, support=5.0, n_bins=5)
        sparse = fit_contrast(poisson_events, support=5.0, n_bins=5, penalty=10.0)
        assert sparse.model.kernels.norm_matrix()[0, 0] <= plain.model.kernels.norm_matrix()[0, 0] + 1e-9

    def test_contrast_rejects_bad_basis(self, poisson_events):
        with pytest.raises(InputException):
            fit_contrast(poisson_events, support=0.0, n_bins=5)

    def test_l2_distance(self):
        kernel = ExponentialKernel(0.5, 2.0)
        assert kernel_l2_distance(kernel, kernel, 20.0) == 0.0
        assert kernel_l2_distance(kernel, ZeroKernel(), 20.0) == pytest.approx(0.5, rel=1e-3)


class TestBranchingRatio:
    def test_poisson_near_zero(self, poisson_events):
        estimate = branching_ratio_estimate(poisson_events, n_windows=1_000)
        assert estimate.estimate < 0.08
        assert 0.0 <= estimate.lower <= estimate.estimate <= estimate.upper <= 1.0

    def test_periodic_is_clamped(self):
        events = EventSequence.from_arrays(np.arange(0.5, 1_000.0), horizon=1_000.0)
        estimate = branching_ratio_estimate(events, n_windows=100)
        assert estimate.raw == float("-inf")
        assert estimate.estimate == 0.0
        assert estimate.clamped

    @pytest.mark.slow
    def test_exponential(self, simulate_events):
        events = simulate_events(HawkesModel.exponential_1d(1.0, 0.5, 1.0), 100_000.0, seed=2, burn_in=20.0)
        estimate = branching_ratio_estimate(events, window=100.0)
        assert estimate.n_windows == 1_000
        assert estimate.estimate == pytest.approx(0.5, abs=0.05)

    def test_single_window_refused(self, poisson_events):
        with pytest.raises(InsufficientDataException):
            branching_ratio_estimate(poisson_events, n_windows=1)

    def test_multivariate_refused(self, example_one_model, simulate_events):
        with pytest.raises(InputException):
            branching_ratio_estimate(simulate_events(example_one_model, 100.0))


class TestGoodnessOfFit:
    def test_true_model_accepted(self, exponential_model, simulate_events):
        events = simulate_events(exponential_model, 2_000.0, seed=31, burn_in=20.0)
        report = goodness_of_fit(exponential_model, events)
        assert report.pooled_p_value > 1e-3
        assert report.components[0].n_residuals == len(events)

    def test_poisson_rejected_on_clustered_data(self, simulate_events):
        events = simulate_events(HawkesModel.exponential_1d(0.4, 0.8, 1.0), 2_000.0, seed=32, burn_in=50.0)
        rate = len(events) / events.horizon
        report = goodness_of_fit(HawkesModel.poisson([rate]), events)
        assert report.pooled_p_value < 1e-3

    def test_empty_component_skipped(self):
        events = EventSequence.from_arrays([1.0, 2.0, 4.0], [0, 0, 0], horizon=5.0, dimension=2)
        report = goodness_of_fit(HawkesModel.poisson([1.0, 1.0]), events)
        assert report.components[1].skipped
        assert not report.components[0].skipped

    def test_no_events_refused(self):
        with pytest.raises(DegenerateDataException):
            goodness_of_fit(HawkesModel.poisson([1.0]), EventSequence.empty(horizon=5.0))


class TestEdgeWindow:
    def test_window_is_one_support(self, poisson_events):
        assert edge_start(poisson_events, 5.0) == 5.0

    def test_window_is_capped(self, tiny_events):
        assert edge_start(tiny_events, 1e9) == pytest.approx(1.0)

    def test_em_defaults(self, exponential_record):
        parametric = fit_em_parametric(exponential_record, max_iter=5)
        family = ExponentialFamily(1)
        assert parametric.diagnostics["start"] == pytest.approx(family.support(family.initial(exponential_record)))
        histogram = fit_em_nonparametric(exponential_record, np.linspace(0.0, 3.0, 7), max_iter=5)
        assert histogram.diagnostics["start"] == 3.0

    def test_contrast_defaults_to_support(self, poisson_events):
        default = fit_contrast(poisson_events, support=5.0, n_bins=5)
        explicit = fit_contrast(poisson_events, support=5.0, n_bins=5, start=5.0)
        assert default.diagnostics["start"] == 5.0
        assert np.array_equal(default.model.baseline, explicit.model.baseline)
