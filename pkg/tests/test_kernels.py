"""
Tests for kernel families, kernel matrices and stability analysis.
"""

import numpy as np
import pytest
from scipy import integrate

from hawkeshive.core.errors import DomainException, ModelSpecException, NonIntegrableKernelException
from hawkeshive.domain.kernels import (
    ExponentialKernel,
    KernelFactory,
    KernelFamily,
    KernelMatrix,
    PiecewiseConstantKernel,
    PowerLawKernel,
    SumExponentialKernel,
    ZeroKernel,
    critical_crossover_time,
    eval_kernel,
    l1_norm,
    laplace,
    spectral_radius,
    stability,
)


class TestKernelValues:
    """Point evaluation and integrals of every family."""

    def test_exponential_at_origin(self):
        assert ExponentialKernel(0.5, 2.0).value(0.0) == pytest.approx(1.0)

    def test_power_law_value(self):
        assert PowerLawKernel(0.25, 1.0, 0.5).value(3.0) == pytest.approx(0.03125)

    def test_causal(self):
        """Kernels vanish on negative lags."""
        for kernel in (ExponentialKernel(0.5, 2.0), PowerLawKernel(0.25, 1.0, 0.5), ZeroKernel()):
            assert np.all(kernel.value(np.array([-2.0, -1e-9])) == 0.0)

    def test_l1_norms(self):
        assert ExponentialKernel(0.5, 2.0).l1_norm() == pytest.approx(0.5)
        assert PowerLawKernel(0.25, 1.0, 0.5).l1_norm() == pytest.approx(0.5)
        assert SumExponentialKernel(((0.1, 1.0), (0.2, 5.0))).l1_norm() == pytest.approx(0.3)
        assert ZeroKernel().l1_norm() == 0.0

    def test_piecewise_signed_integral_differs_from_norm(self):
        kernel = PiecewiseConstantKernel((0.0, 1.0, 2.0, 3.0), (0.1, 0.3, -0.2))
        assert kernel.l1_norm() == pytest.approx(0.6)
        assert kernel.signed_integral() == pytest.approx(0.2)
        assert not kernel.is_non_negative

    def test_integral_converges_to_norm(self):
        kernel = ExponentialKernel(0.4, 3.0)
        assert kernel.integral(100.0) == pytest.approx(0.4)
        assert kernel.integral(0.0) == pytest.approx(0.0)

    def test_power_law_integral_matches_quadrature(self):
        kernel = PowerLawKernel(0.25, 1.0, 0.5)
        expected, _ = integrate.quad(lambda t: float(kernel.value(t)), 0.0, 7.0)
        assert kernel.integral(7.0) == pytest.approx(expected, rel=1e-8)

    def test_piecewise_envelope_dominates(self):
        kernel = PiecewiseConstantKernel((0.0, 1.0, 2.0, 3.0), (0.1, 0.3, -0.2))
        grid = np.linspace(0.0, 3.5, 50)
        assert np.all(kernel.envelope(grid) >= kernel.value(grid))
        assert kernel.envelope(0.5) == pytest.approx(0.3)


class TestLaplace:
    def test_exponential(self):
        assert ExponentialKernel(0.5, 2.0).laplace(-2.0) == pytest.approx(0.25)

    def test_exponential_domain(self):
        with pytest.raises(DomainException):
            ExponentialKernel(0.5, 2.0).laplace(3.0)

    def test_power_law_at_zero_is_norm(self):
        assert PowerLawKernel(0.25, 1.0, 0.5).laplace(0.0) == pytest.approx(0.5)

    def test_power_law_matches_quadrature(self):
        kernel = PowerLawKernel(0.25, 1.0, 0.5)
        expected, _ = integrate.quad(lambda t: float(kernel.value(t)) * np.exp(-t), 0.0, np.inf, limit=200)
        assert complex(kernel.laplace(-1.0)).real == pytest.approx(expected, rel=1e-6)

    def test_power_law_on_imaginary_axis_bounded_by_norm(self):
        kernel = PowerLawKernel(0.25, 1.0, 0.5)
        values = kernel.laplace(1j * np.array([0.1, 1.0, 10.0]))
        assert np.all(np.abs(values) <= kernel.l1_norm() + 1e-9)

    def test_piecewise_at_zero_is_signed_integral(self):
        kernel = PiecewiseConstantKernel((0.0, 1.0, 2.0), (0.4, -0.1))
        assert complex(kernel.laplace(0.0)).real == pytest.approx(0.3)


class TestValidation:
    def test_negative_alpha_rejected(self):
        with pytest.raises(ModelSpecException):
            ExponentialKernel(-0.1, 1.0)

    def test_non_integrable_power_law(self):
        with pytest.raises(NonIntegrableKernelException):
            PowerLawKernel(0.25, 1.0, 0.0).l1_norm()

    def test_piecewise_shape(self):
        with pytest.raises(ModelSpecException):
            PiecewiseConstantKernel((0.0, 1.0), (0.1, 0.2))

    def test_factory(self):
        kernel = KernelFactory.create("exponential", alpha=0.5, beta=2.0)
        assert kernel == ExponentialKernel(0.5, 2.0)
        assert KernelFactory.create(KernelFamily.POWER_LAW, alpha=0.1, beta=1.0, gamma=0.5).l1_norm() == pytest.approx(0.2)

    @pytest.mark.parametrize(
        "family, params, norm",
        [
            ("sum_exponential", {"alpha": [0.2, 0.1], "beta": [1.0, 2.0]}, 0.3),
            ("piecewise", {"breakpoints": [0.0, 1.0, 3.0], "levels": [0.2, 0.05]}, 0.3),
            ("zero", {}, 0.0),
        ],
    )
    def test_factory_builds_every_family(self, family, params, norm):
        assert KernelFactory.create(family, **params).l1_norm() == pytest.approx(norm)

    def test_factory_rejects_unknown_family(self):
        with pytest.raises(ModelSpecException):
            KernelFactory.create("gaussian", alpha=1.0)


class TestSampling:
    def test_exponential_lag_mean(self):
        rng = np.random.default_rng(3)
        lags = ExponentialKernel(0.5, 2.0).sample_lags(rng, 100_000)
        assert lags.mean() == pytest.approx(0.5, rel=0.02)

    def test_zero_kernel_samples_nothing(self):
        assert ZeroKernel().sample_lags(np.random.default_rng(0), 10).size == 0

    def test_piecewise_lags_stay_in_support(self):
        kernel = PiecewiseConstantKernel((0.5, 1.0, 2.0), (0.2, 0.1))
        lags = kernel.sample_lags(np.random.default_rng(1), 1000)
        assert lags.min() >= 0.5 and lags.max() < 2.0


class TestStability:
    def test_symmetric_radius(self, example_one_model):
        report = example_one_model.stability()
        assert report.spectral_radius == pytest.approx(0.5)
        assert report.stable

    def test_diagonal_radius(self):
        km = KernelMatrix.from_nested(
            [[ExponentialKernel(0.5, 1.0), ZeroKernel()], [ZeroKernel(), ExponentialKernel(0.3, 1.0)]]
        )
        assert stability(km).spectral_radius == pytest.approx(0.5)

    def test_power_iteration_matches_eigvals(self, rng):
        matrix = rng.uniform(0.0, 0.3, size=(3, 3))
        radius, _ = spectral_radius(matrix)
        assert radius == pytest.approx(np.max(np.abs(np.linalg.eigvals(matrix))), rel=1e-9)

    def test_unstable(self):
        report = stability(KernelMatrix.single(ExponentialKernel(1.2, 1.0)))
        assert not report.stable
        assert report.spectral_radius == pytest.approx(1.2)

    def test_zero_matrix(self):
        assert stability(KernelMatrix.zeros(2)).spectral_radius == 0.0


def test_exponential_components():
    km = KernelMatrix.from_nested(
        [[ExponentialKernel(0.2, 1.0), ExponentialKernel(0.3, 1.0)], [ZeroKernel(), ExponentialKernel(0.1, 1.0)]]
    )
    assert km.is_exponential
    assert km.norm_matrix() == pytest.approx(np.array([[0.2, 0.3], [0.0, 0.1]]))


def test_critical_crossover_time():
    assert np.isnan(critical_crossover_time(PowerLawKernel(0.6, 1.0, 0.5)))
    assert critical_crossover_time(PowerLawKernel(0.45, 1.0, 0.5)) > 0


def test_module_level_operations():
    kernel = ExponentialKernel(0.5, 7.0)
    assert eval_kernel(kernel, -1.0) == 0.0
    assert l1_norm(kernel) == pytest.approx(0.5)
    assert laplace(kernel, 0.0) == pytest.approx(l1_norm(kernel), abs=1e-9)
    assert l1_norm(ZeroKernel()) == 0.0
