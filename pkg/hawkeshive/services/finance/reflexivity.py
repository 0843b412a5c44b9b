"""
Side-by-side branching ratio estimates of a univariate event stream.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Union

import numpy as np

from ...core.errors import InputException
from ...core.observability import get_logger, log_duration
from ...core.settings import settings
from ...domain.events import EventSequence
from ...domain.schemas import QuadratureConfig
from ..estimation import branching_ratio_estimate, fit_mle, fit_wiener_hopf
from ..estimation.results import EstimationResult

logger = get_logger(__name__)

Z_95 = 1.96
WIENER_HOPF_SUPPORT_GAPS = 50.0

EXPONENTIAL_BIAS_NOTE = (
    "a single exponential underestimates the norm when the true memory decays as a power law"
)


class ReflexivityMethod(str, Enum):
    MLE_EXPONENTIAL = "mle_exponential"
    MLE_POWER_LAW = "mle_power_law"
    WIENER_HOPF = "wiener_hopf"
    VARIANCE_RATIO = "variance_ratio"


ALL_METHODS = tuple(ReflexivityMethod)


@dataclass(frozen=True)
class ReflexivityRow:
    method: ReflexivityMethod
    estimate: float
    lower: float
    upper: float
    note: str = ""


@dataclass(frozen=True)
class ReflexivityReport:
    """Estimates of the endogenous fraction with a flag for proximity to criticality."""

    rows: List[ReflexivityRow]
    threshold: float
    near_critical: bool
    notes: List[str] = field(default_factory=list)

    def estimate(self, method: Union[str, ReflexivityMethod]) -> float:
        wanted = ReflexivityMethod(method)
        for row in self.rows:
            if row.method is wanted:
                return row.estimate
        raise KeyError(wanted.value)


def _band(estimate: float, se: Optional[float]) -> tuple:
    if se is None or not np.isfinite(se):
        return float("nan"), float("nan")
    return max(estimate - Z_95 * se, 0.0), estimate + Z_95 * se


def _mle_exponential(events: EventSequence) -> ReflexivityRow:
    result = fit_mle(events, "exponential")
    alpha = result.parameters.get("alpha.0.0", 0.0)
    se = (result.standard_errors or {}).get("alpha.0.0")
    lower, upper = _band(alpha, se)
    return ReflexivityRow(ReflexivityMethod.MLE_EXPONENTIAL, alpha, lower, upper, EXPONENTIAL_BIAS_NOTE)


def _mle_power_law(events: EventSequence) -> ReflexivityRow:
    result: EstimationResult = fit_mle(events, "power_law")
    alpha = result.parameters["alpha.0.0"]
    gamma = result.parameters["gamma.0.0"]
    norm = alpha / gamma
    ses = result.standard_errors or {}
    se = None
    if "alpha.0.0" in ses and "gamma.0.0" in ses:
        # first-order propagation, covariance term ignored
        se = norm * float(np.hypot(ses["alpha.0.0"] / alpha, ses["gamma.0.0"] / gamma))
    lower, upper = _band(norm, se)
    return ReflexivityRow(ReflexivityMethod.MLE_POWER_LAW, norm, lower, upper)


def _wiener_hopf(events: EventSequence) -> ReflexivityRow:
    gap = events.horizon / len(events)
    cfg = QuadratureConfig(support=WIENER_HOPF_SUPPORT_GAPS * gap)
    result = fit_wiener_hopf(events, cfg)
    norm = float(result.model.kernels[0, 0].signed_integral())
    return ReflexivityRow(
        ReflexivityMethod.WIENER_HOPF, norm, float("nan"), float("nan"), f"support={cfg.support:.6g}"
    )


def _variance_ratio(events: EventSequence, n_windows: int) -> ReflexivityRow:
    est = branching_ratio_estimate(events, n_windows=n_windows)
    note = f"clamped from {est.raw:.6g}" if est.clamped else ""
    return ReflexivityRow(ReflexivityMethod.VARIANCE_RATIO, est.estimate, est.lower, est.upper, note)


@log_duration("reflexivity_report")
def reflexivity_report(
    events: EventSequence,
    methods: Sequence[Union[str, ReflexivityMethod]] = ALL_METHODS,
    n_windows: int = 1000,
) -> ReflexivityReport:
    """Run the selected branching ratio estimators on a univariate stream.

    Estimator errors propagate. Every estimate is dimensionless, so the report
    does not change when all times are rescaled by a constant.

    Args:
        events: Univariate record
        methods: Any subset of ``ReflexivityMethod`` values
        n_windows: Window count of the variance-ratio estimate

    Returns:
        ReflexivityReport: one row per method, in the order requested
    """
    if events.dimension != 1:
        raise InputException("reflexivity needs a univariate record", {"dimension": events.dimension})
    if len(events) == 0:
        raise InputException("reflexivity needs at least one event")
    rows = []
    for method in map(ReflexivityMethod, methods):
        if method is ReflexivityMethod.MLE_EXPONENTIAL:
            rows.append(_mle_exponential(events))
        elif method is ReflexivityMethod.MLE_POWER_LAW:
            rows.append(_mle_power_law(events))
        elif method is ReflexivityMethod.WIENER_HOPF:
            rows.append(_wiener_hopf(events))
        else:
            rows.append(_variance_ratio(events, n_windows))

    threshold = settings.criticality_threshold
    near = [row.method.value for row in rows if row.estimate > threshold]
    notes = []
    if near:
        logger.warning("estimates close to criticality", methods=near, threshold=threshold)
        notes.append(f"near criticality: {', '.join(near)} above {threshold:g}")
    for row in rows:
        logger.info("branching ratio", method=row.method.value, estimate=row.estimate, lower=row.lower, upper=row.upper)
    return ReflexivityReport(rows=rows, threshold=threshold, near_critical=bool(near), notes=notes)
