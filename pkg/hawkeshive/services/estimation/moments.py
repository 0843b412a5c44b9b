"""
Generalized method of moments for exponential kernels.

The mean rate and the covariances of binned counts have closed forms for the
univariate exponential model and for the symmetric bivariate model with a
common decay rate (through its sum and difference modes N± = N¹ ± N²). The fit
matches them to their empirical values by least squares on scaled residuals.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from ...core.errors import IdentifiabilityException, InputException, UnsupportedFamilyException
from ...core.metrics import metrics_collector
from ...core.observability import get_logger, log_duration
from ...domain.events import EventSequence
from ...domain.kernels import ExponentialKernel, ZeroKernel, stability
from ...domain.model import HawkesModel
from .mle import require_events
from .results import EstimationResult

logger = get_logger(__name__)

DEFAULT_LAGS = tuple(range(0, 11))
DEFAULT_BIN_EVENTS = 10.0


@dataclass(frozen=True)
class CountMoments:
    """Mean rate per component and count covariances of bins of width ``tau``.

    ``covariances`` has one row per mode: the single component in 1D, the
    modes N¹ + N² and N¹ − N² in the bivariate case. Column l is the
    covariance between bins l apart (l = 0 is the variance).
    """

    mean_rate: float
    tau: float
    lags: np.ndarray
    covariances: np.ndarray


def _mode_covariance(atom: float, a: float, beta: float, tau: float, lags: np.ndarray) -> np.ndarray:
    """Binned covariances of a mode with c(t) = atom δ(t) + K e^{-κ|t|}."""
    K = atom * a * beta * (2.0 - a) / (2.0 * (1.0 - a))
    kappa = beta * (1.0 - a)
    x = kappa * tau
    # (1 − e^{−x})/κ² and τ/κ − (1 − e^{−x})/κ² with cancellation-free forms
    one_minus = -np.expm1(-x)
    var = atom * tau + 2.0 * K * (tau / kappa - one_minus / kappa**2)
    cov = K * one_minus**2 * np.exp(-x * (lags - 1.0)) / kappa**2
    return np.where(lags == 0, var, cov)


def model_count_moments(model: HawkesModel, tau: float, lags: Sequence[int] = DEFAULT_LAGS) -> CountMoments:
    """Closed-form binned count moments of a supported exponential model.

    Raises:
        UnsupportedFamilyException: Unless the model is a 1D exponential or a
            symmetric bivariate exponential model with one decay rate
    """
    lag_arr = np.asarray(lags, dtype=float)
    mu, a_self, a_cross, beta = _unpack(model)
    if model.dimension == 1:
        lam = mu / (1.0 - a_self)
        return CountMoments(lam, tau, lag_arr, _mode_covariance(lam, a_self, beta, tau, lag_arr)[None, :])
    lam0 = mu / (1.0 - a_self - a_cross)
    plus = _mode_covariance(2.0 * lam0, a_self + a_cross, beta, tau, lag_arr)
    minus = _mode_covariance(2.0 * lam0, a_self - a_cross, beta, tau, lag_arr)
    return CountMoments(lam0, tau, lag_arr, np.vstack([plus, minus]))


def _entry(kernel) -> Tuple[float, Optional[float]]:
    if isinstance(kernel, ZeroKernel):
        return 0.0, None
    if isinstance(kernel, ExponentialKernel):
        return kernel.alpha, kernel.beta
    raise UnsupportedFamilyException("moment closed forms need exponential kernels")


def _unpack(model: HawkesModel) -> Tuple[float, float, float, float]:
    d = model.dimension
    if d == 1:
        a, b = _entry(model.kernels[0, 0])
        return float(model.baseline[0]), a, 0.0, b or 1.0
    if d != 2:
        raise UnsupportedFamilyException("moment closed forms cover dimensions 1 and 2 only")
    a_s, b_s = _entry(model.kernels[0, 0])
    a_s2, b_s2 = _entry(model.kernels[1, 1])
    a_c, b_c = _entry(model.kernels[0, 1])
    a_c2, b_c2 = _entry(model.kernels[1, 0])
    betas = {b for b in (b_s, b_s2, b_c, b_c2) if b is not None}
    if a_s != a_s2 or a_c != a_c2 or model.baseline[0] != model.baseline[1] or len(betas) > 1:
        raise UnsupportedFamilyException("bivariate moments need a symmetric model with one decay rate")
    return float(model.baseline[0]), a_s, a_c, betas.pop() if betas else 1.0


def empirical_count_moments(
    events: EventSequence, tau: float, lags: Sequence[int] = DEFAULT_LAGS, start: float = 0.0
) -> CountMoments:
    """Sample mean rate and binned count covariances, in the layout of ``model_count_moments``."""
    if events.dimension not in (1, 2):
        raise UnsupportedFamilyException("moment fits cover dimensions 1 and 2 only")
    lag_arr = np.asarray(lags, dtype=int)
    n_bins = int((events.horizon - start) // tau)
    if n_bins <= int(lag_arr.max()) + 1:
        raise InputException("record too short for the requested bins and lags", {"bins": n_bins})
    keep = (events.times >= start) & (events.times < start + n_bins * tau)
    idx = ((events.times[keep] - start) // tau).astype(np.int64)
    comps = events.components[keep]
    counts = np.zeros((events.dimension, n_bins))
    np.add.at(counts, (comps, np.minimum(idx, n_bins - 1)), 1.0)
    modes = counts if events.dimension == 1 else np.vstack([counts[0] + counts[1], counts[0] - counts[1]])
    centered = modes - modes.mean(axis=1, keepdims=True)
    cov = np.empty((modes.shape[0], lag_arr.size))
    for col, lag in enumerate(lag_arr):
        cov[:, col] = np.mean(centered[:, : n_bins - lag] * centered[:, lag:], axis=1)
    mean_rate = float(counts.sum() / (events.dimension * n_bins * tau))
    return CountMoments(mean_rate, tau, lag_arr.astype(float), cov)


def _build(x: np.ndarray, dimension: int) -> Tuple[float, float, float, float]:
    """Unconstrained vector to (μ, α_self, α_cross, β) inside the stationarity region."""
    mu, beta = np.exp(x[0]), np.exp(x[-1])
    if dimension == 1:
        return mu, float(special.expit(x[1])), 0.0, beta
    total = float(special.expit(x[1]))
    split = float(special.expit(x[2]))
    return mu, total * split, total * (1.0 - split), beta


def _to_model(mu: float, a_self: float, a_cross: float, beta: float, dimension: int) -> HawkesModel:
    def kernel(a: float):
        return ExponentialKernel(a, beta) if a > 0 else ZeroKernel()

    if dimension == 1:
        return HawkesModel.exponential_1d(mu, a_self, beta)
    return HawkesModel.symmetric_bivariate(mu, kernel(a_self), kernel(a_cross))


def _solve(target: CountMoments, dimension: int, x0: Optional[np.ndarray]) -> Tuple[HawkesModel, optimize.OptimizeResult]:
    n_params = 3 if dimension == 1 else 4
    n_conditions = 1 + target.covariances.size
    if n_conditions < n_params:
        raise IdentifiabilityException(
            "fewer moment conditions than parameters", {"conditions": n_conditions, "parameters": n_params}
        )
    scales = np.abs(target.covariances[:, :1])
    scales = np.where(scales > 0, scales, 1.0)

    def residuals(x: np.ndarray) -> np.ndarray:
        mu, a_s, a_c, beta = _build(x, dimension)
        if dimension == 1:
            lam = mu / (1.0 - a_s)
            cov = _mode_covariance(lam, a_s, beta, target.tau, target.lags)[None, :]
        else:
            lam = mu / (1.0 - a_s - a_c)
            cov = np.vstack(
                [
                    _mode_covariance(2.0 * lam, a_s + a_c, beta, target.tau, target.lags),
                    _mode_covariance(2.0 * lam, a_s - a_c, beta, target.tau, target.lags),
                ]
            )
        return np.concatenate([[(lam - target.mean_rate) / target.mean_rate], ((cov - target.covariances) / scales).ravel()])

    if x0 is None:
        rate = target.mean_rate
        head = [np.log(0.5 * rate), 0.0] + ([0.0] if dimension == 2 else [])
        x0 = np.array(head + [np.log(1.0 / target.tau)])
    res = optimize.least_squares(residuals, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20_000)
    mu, a_s, a_c, beta = _build(res.x, dimension)
    return _to_model(mu, a_s, a_c, beta, dimension), res


def _result(model: HawkesModel, res: optimize.OptimizeResult, target: CountMoments) -> EstimationResult:
    report = stability(model.kernels)
    mu, a_s, a_c, beta = _unpack(model)
    params = {"mu": mu, "alpha": a_s, "beta": beta} if model.dimension == 1 else {
        "mu": mu,
        "alpha_self": a_s,
        "alpha_cross": a_c,
        "beta": beta,
    }
    metrics_collector.record_fit("moments", bool(res.success))
    logger.info("moment fit finished", converged=bool(res.success), cost=float(res.cost), **params)
    return EstimationResult(
        model=model,
        method="moments",
        objective_trace=np.array([float(res.cost)]),
        converged=bool(res.success),
        iterations=int(res.nfev),
        stability=report,
        parameters=params,
        diagnostics={"tau": target.tau, "lags": target.lags.tolist(), "message": str(res.message)},
    )


def fit_moments_from_statistics(
    mean_rate: float,
    tau: float,
    lags: Sequence[int],
    covariances: np.ndarray,
    dimension: int = 1,
    family: str = "exponential",
    init: Optional[np.ndarray] = None,
) -> EstimationResult:
    """Fit the exponential family to given moments (mean rate per component and mode covariances)."""
    if family != "exponential":
        raise UnsupportedFamilyException(f"moment fits support the exponential family only, got {family}")
    cov = np.atleast_2d(np.asarray(covariances, dtype=float))
    target = CountMoments(float(mean_rate), float(tau), np.asarray(lags, dtype=float), cov)
    model, res = _solve(target, dimension, init)
    return _result(model, res, target)


@log_duration("fit_moments")
def fit_moments(
    events: EventSequence,
    family: str = "exponential",
    tau: Optional[float] = None,
    lags: Sequence[int] = DEFAULT_LAGS,
    start: float = 0.0,
) -> EstimationResult:
    """Moment fit of a 1D or symmetric bivariate exponential model.

    Args:
        events: Observed record, one or two components
        family: Only ``exponential`` is supported
        tau: Bin width; about ten events per bin when omitted
        lags: Bin lags whose covariances are matched; 0 is the variance
        start: Events before this time are ignored

    Raises:
        IdentifiabilityException: If there are fewer conditions than parameters
    """
    require_events(events)
    if family != "exponential":
        raise UnsupportedFamilyException(f"moment fits support the exponential family only, got {family}")
    if tau is None:
        tau = DEFAULT_BIN_EVENTS * (events.horizon - start) / max(len(events), 1)
    target = empirical_count_moments(events, tau, lags, start)
    model, res = _solve(target, events.dimension, None)
    return _result(model, res, target)
