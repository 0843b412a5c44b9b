"""
Result types shared by the estimators.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ...domain.kernels import StabilityReport
from ...domain.model import HawkesModel


@dataclass(frozen=True)
class EstimationResult:
    """Fitted model with its objective trace and convergence diagnostics.

    ``objective_trace`` holds one value per iteration (log-likelihood for MLE and
    EM, contrast for least squares); ``gradient_norms`` is aligned with it when
    the method is gradient based. ``at_stability_boundary`` flags fits whose
    spectral radius reached the stationarity limit.
    """

    model: HawkesModel
    method: str
    objective_trace: np.ndarray
    converged: bool
    iterations: int
    stability: StabilityReport
    parameters: Dict[str, float] = field(default_factory=dict)
    standard_errors: Optional[Dict[str, float]] = None
    gradient_norms: Optional[np.ndarray] = None
    at_stability_boundary: bool = False
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def branching_ratio(self) -> float:
        return self.stability.spectral_radius


@dataclass(frozen=True)
class ConditionalIntensityEstimate:
    """Estimated g^{ij}(t) on a positive lag grid.

    ``evaluate`` extends the estimate to negative lags through the stationarity
    relation Λ^i g^{ji}(-t) = Λ^j g^{ij}(t) and to zero beyond the grid.
    """

    lags: np.ndarray
    values: np.ndarray
    bandwidth: float
    mean_intensity: np.ndarray

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = self.mean_intensity.size
        out = np.zeros(t.shape + (d, d))
        abs_t = np.abs(t)
        lam = self.mean_intensity
        for i in range(d):
            for j in range(d):
                forward = np.interp(abs_t, self.lags, self.values[:, i, j], right=0.0)
                # g^{ij}(-s) = Λ^i g^{ji}(s) / Λ^j
                backward = np.interp(abs_t, self.lags, self.values[:, j, i], right=0.0) * lam[i] / lam[j]
                out[..., i, j] = np.where(t >= 0, forward, backward)
        return out


@dataclass(frozen=True)
class BranchingRatioEstimate:
    """Variance/mean branching ratio with a jackknife confidence band."""

    estimate: float
    raw: float
    clamped: bool
    lower: float
    upper: float
    standard_error: float
    window: float
    n_windows: int


@dataclass(frozen=True)
class ComponentFit:
    component: int
    n_residuals: int
    ks_statistic: float
    p_value: float
    skipped: bool = False


@dataclass(frozen=True)
class GoodnessOfFit:
    """Time-change residuals and Kolmogorov-Smirnov tests against Exp(1)."""

    residuals: List[np.ndarray]
    pooled_statistic: float
    pooled_p_value: float
    components: List[ComponentFit]
