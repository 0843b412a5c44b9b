"""
Model-free branching ratio estimate from windowed counts.

For a stationary univariate Hawkes process Var(N_W)/E[N_W] tends to
1/(1 − ||φ||)² once W is long compared to the kernel, hence
||φ|| ≈ 1 − (E[N_W]/Var(N_W))^{1/2}.
"""

from typing import Optional

import numpy as np

from ...core.errors import InputException, InsufficientDataException
from ...core.observability import get_logger
from ...domain.events import EventSequence
from .results import BranchingRatioEstimate

logger = get_logger(__name__)

DEFAULT_WINDOWS = 1000
RECOMMENDED_WINDOWS = 50
Z_95 = 1.96


def _ratio(mean: np.ndarray, var: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(var > 0, 1.0 - np.sqrt(mean / np.where(var > 0, var, 1.0)), -np.inf)


def window_counts(events: EventSequence, window: float, n_windows: int, start: float = 0.0) -> np.ndarray:
    """Event counts in ``n_windows`` consecutive windows from ``start``."""
    keep = (events.times >= start) & (events.times < start + n_windows * window)
    idx = ((events.times[keep] - start) // window).astype(np.int64)
    return np.bincount(np.minimum(idx, n_windows - 1), minlength=n_windows).astype(float)


def branching_ratio_estimate(
    events: EventSequence,
    window: Optional[float] = None,
    n_windows: Optional[int] = None,
    start: float = 0.0,
) -> BranchingRatioEstimate:
    """Variance-to-mean branching ratio with a leave-one-window-out jackknife band.

    The raw value is 1 − sqrt(mean / variance) of the window counts. Windows
    with zero count variance (a periodic record) give −∞, which is clamped to
    0 and flagged; more regular than Poisson means no self-excitation.

    Args:
        events: Univariate record
        window: Window length; ``(T − start)/n_windows`` when omitted
        n_windows: Number of windows; as many as fit when ``window`` is given,
            1000 when neither is
        start: Beginning of the first window

    Returns:
        BranchingRatioEstimate: estimate clamped to [0, 1], raw value, clamp
            flag and a 95% band

    Raises:
        InsufficientDataException: With fewer than two windows or no events
    """
    if events.dimension != 1:
        raise InputException("branching ratio estimate needs a univariate record", {"dimension": events.dimension})
    span = events.horizon - start
    if window is None:
        n_windows = n_windows or DEFAULT_WINDOWS
        window = span / n_windows
    elif n_windows is None:
        n_windows = int(span // window)
    if n_windows < 2 or window <= 0 or n_windows * window > span * (1 + 1e-12):
        raise InsufficientDataException(
            "need at least two windows inside the record", {"windows": n_windows, "window": window}
        )
    if n_windows < RECOMMENDED_WINDOWS:
        logger.warning("few windows for the variance ratio", windows=n_windows, recommended=RECOMMENDED_WINDOWS)

    counts = window_counts(events, window, n_windows, start)
    total = counts.sum()
    if total == 0:
        raise InsufficientDataException("no events inside the windows")
    mean = counts.mean()
    var = counts.var(ddof=1)
    raw = float(_ratio(np.array(mean), np.array(var)))

    centered = counts - mean
    if var > 0:
        autocorr = float(np.sum(centered[1:] * centered[:-1]) / np.sum(centered**2))
        if autocorr > 2.0 / np.sqrt(n_windows):
            logger.warning(
                "window counts are correlated; windows may be shorter than the kernel support",
                lag_one_autocorrelation=autocorr,
                window=window,
            )

    se = float("nan")
    if n_windows >= 3:
        n = n_windows
        loo_mean = (total - counts) / (n - 1)
        loo_ss = np.sum(counts**2) - counts**2 - (n - 1) * loo_mean**2
        loo = _ratio(loo_mean, loo_ss / (n - 2))
        if np.all(np.isfinite(loo)):
            se = float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))

    estimate = float(np.clip(raw, 0.0, 1.0))
    clamped = estimate != raw
    if clamped:
        logger.warning("branching ratio estimate clamped", raw=raw, estimate=estimate)
    half = Z_95 * se if np.isfinite(se) else 0.0
    lower = float(np.clip(raw - half, 0.0, 1.0)) if np.isfinite(raw) else 0.0
    upper = float(np.clip(raw + half, 0.0, 1.0)) if np.isfinite(raw) else 0.0
    return BranchingRatioEstimate(
        estimate=estimate,
        raw=raw,
        clamped=clamped,
        lower=lower,
        upper=upper,
        standard_error=se,
        window=float(window),
        n_windows=int(n_windows),
    )
