"""
Analytic first and second order statistics of linear Hawkes models.

This module computes the stationary mean intensity, the resolvent, the
Laplace-domain and time-domain covariance density, the causality decomposition,
intensity forecasts and the diffusion-limit coefficients of a HawkesModel.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from ..core.errors import (
    InputException,
    ModelSpecException,
    NearCriticalityException,
    ResolutionException,
    StabilityException,
)
from ..core.observability import get_logger, log_duration
from ..core.settings import settings
from ..domain.events import EventSequence
from ..domain.kernels import (
    ExponentialKernel,
    PowerLawKernel,
    StabilityReport,
    ZeroKernel,
    critical_crossover_time,
)
from ..domain.model import HawkesModel, Transfer

logger = get_logger(__name__)

_FFT_POINTS_PER_SUPPORT = 512
_HEAVY_TAIL_PERIOD_FACTOR = 64
_LIGHT_TAIL_PERIOD_FACTOR = 8


@dataclass(frozen=True)
class CausalityTables:
    """Average event rates split by direct parent and by oldest ancestor."""

    exogenous: np.ndarray
    direct: np.ndarray
    ancestor: np.ndarray


@dataclass(frozen=True)
class AnalyticsResult:
    mean_intensity: np.ndarray
    resolvent_norms: np.ndarray
    diffusion: np.ndarray
    causality: CausalityTables
    stability: StabilityReport


@dataclass(frozen=True)
class CorrelationEstimate:
    """Covariance density c^{ij}(t) = Cov(dN^i_s, dN^j_{s+t})/(ds dt) on a lag grid.

    ``values`` excludes the t=0 atoms, which are stored separately. For heavy
    tails where no time-domain inversion is attempted, ``values`` is None and
    the Laplace transform sampled on the imaginary axis is returned instead.
    """

    lags: np.ndarray
    values: Optional[np.ndarray]
    atoms: np.ndarray
    method: str
    grid_spacing: Optional[float] = None
    n_points: Optional[int] = None
    period: Optional[float] = None
    frequencies: Optional[np.ndarray] = None
    laplace_values: Optional[np.ndarray] = None


@dataclass(frozen=True)
class IntensityPath:
    times: np.ndarray
    values: np.ndarray


def require_stable(model: HawkesModel) -> StabilityReport:
    """Stability report of a model, raising when it is unstable or too close to criticality."""
    report = model.stability()
    radius = report.spectral_radius
    if not report.stable:
        raise StabilityException("model is not stationary", radius)
    if radius > 1.0 - settings.near_critical_margin:
        _log_crossover(model, radius)
        raise NearCriticalityException("model is too close to criticality", radius)
    if radius > settings.criticality_threshold:
        _log_crossover(model, radius)
    return report


def _log_crossover(model: HawkesModel, radius: float) -> None:
    if model.dimension == 1 and isinstance(model.kernels[0, 0], PowerLawKernel):
        logger.warning(
            "near-critical power-law model",
            spectral_radius=radius,
            crossover_time=critical_crossover_time(model.kernels[0, 0]),
        )
    else:
        logger.warning("near-critical model", spectral_radius=radius)


def _require_linear(model: HawkesModel, operation: str) -> None:
    if model.transfer is not Transfer.IDENTITY:
        raise ModelSpecException(f"{operation} requires the identity transfer", {"transfer": model.transfer.value})


def mean_intensity(model: HawkesModel) -> np.ndarray:
    """Stationary mean intensity Λ = (I − ||Φ||)^{-1} μ.

    Args:
        model: Linear Hawkes model

    Returns:
        np.ndarray: Λ per component

    Raises:
        StabilityException: If the spectral radius is not below one
    """
    _require_linear(model, "mean_intensity")
    require_stable(model)
    d = model.dimension
    return np.linalg.solve(np.eye(d) - model.kernels.signed_norm_matrix(), model.baseline)


def resolvent_norms(model: HawkesModel) -> np.ndarray:
    """Ψ̂(0) = (I − ||Φ||)^{-1} − I."""
    _require_linear(model, "resolvent_norms")
    require_stable(model)
    d = model.dimension
    return np.linalg.inv(np.eye(d) - model.kernels.signed_norm_matrix()) - np.eye(d)


def _inverse_transfer(model: HawkesModel, z: np.ndarray) -> np.ndarray:
    """(I − Φ̂(z))^{-1} = I + Ψ̂(z), batched over z."""
    d = model.dimension
    system = np.eye(d) - model.kernels.laplace(z)
    cond = np.linalg.cond(system)
    worst = float(np.max(cond)) if np.ndim(cond) else float(cond)
    if not np.isfinite(worst) or worst > settings.condition_number_limit:
        raise NearCriticalityException(
            "I - Φ̂(z) is numerically singular", model.stability().spectral_radius, {"condition_number": worst}
        )
    return np.linalg.inv(system)


def correlation_laplace(model: HawkesModel, z: complex) -> np.ndarray:
    """Laplace transform of the covariance density, ĉ(z) = (I + Ψ̂(−z)) Σ (I + Ψ̂ᵀ(z)).

    Accepts a scalar or an array of frequencies; the result has shape
    ``z.shape + (D, D)``.
    """
    lam = mean_intensity(model)
    zz = np.asarray(z, dtype=complex)
    left = _inverse_transfer(model, -zz)
    right = _inverse_transfer(model, zz)
    return (left * lam) @ np.swapaxes(right, -1, -2)


def _symmetric_exponential_params(model: HawkesModel):
    """(μ0, α_self, α_cross, β) for 1D or symmetric bivariate single-β exponential models."""
    km = model.kernels

    def unpack(kernel):
        if isinstance(kernel, ExponentialKernel):
            return kernel.alpha, kernel.beta
        if isinstance(kernel, ZeroKernel):
            return 0.0, None
        return None

    if model.dimension == 1:
        entry = unpack(km[0, 0])
        if entry is None or entry[1] is None:
            return None
        return model.mu[0], entry[0], 0.0, entry[1]
    if model.dimension != 2 or model.mu[0] != model.mu[1]:
        return None
    entries = [unpack(km[i, j]) for i in range(2) for j in range(2)]
    if any(e is None for e in entries):
        return None
    s11, s12, s21, s22 = entries
    if s11 != s22 or s12 != s21:
        return None
    betas = {b for _, b in (s11, s12) if b is not None}
    if len(betas) != 1:
        return None
    return model.mu[0], s11[0], s12[0], betas.pop()


def _closed_form_correlation(model: HawkesModel, lags: np.ndarray, params) -> CorrelationEstimate:
    mu0, a_self, a_cross, beta = params
    lam0 = mu0 / (1.0 - a_self - a_cross)
    abs_t = np.abs(lags)

    def mode(a: float) -> np.ndarray:
        return lam0 * a * beta * (2.0 - a) / (2.0 * (1.0 - a)) * np.exp(-beta * (1.0 - a) * abs_t)

    if model.dimension == 1:
        values = mode(a_self)[:, None, None]
    else:
        c_plus, c_minus = mode(a_self + a_cross), mode(a_self - a_cross)
        values = np.empty((lags.size, 2, 2))
        values[:, 0, 0] = values[:, 1, 1] = 0.5 * (c_plus + c_minus)
        values[:, 0, 1] = values[:, 1, 0] = 0.5 * (c_plus - c_minus)
    return CorrelationEstimate(
        lags=lags, values=values, atoms=np.full(model.dimension, lam0), method="closed_form"
    )


def _power_law_entries(model: HawkesModel) -> Sequence[PowerLawKernel]:
    return [k for _, _, k in model.kernels if isinstance(k, PowerLawKernel)]


def _smooth_laplace(model: HawkesModel, omega: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return correlation_laplace(model, 1j * omega) - np.diag(lam)


@log_duration("correlation_time_domain")
def correlation_time_domain(
    model: HawkesModel, lag_grid: Sequence[float], method: Optional[str] = None
) -> CorrelationEstimate:
    """Covariance density on a lag grid, with the t=0 atom separated.

    Symmetric bivariate (and 1D) single-β exponential models use the closed
    form; every other model is inverted numerically by sampling ĉ on the
    imaginary axis and applying a discrete inverse Fourier transform.

    Args:
        model: Linear, stable Hawkes model
        lag_grid: Lags at which to report c(t)
        method: Force ``"closed_form"`` or ``"fourier"``; chosen automatically when None

    Returns:
        CorrelationEstimate: values have shape (n_lags, D, D)

    Raises:
        ResolutionException: If the Fourier grid exceeds the configured maximum
    """
    lags = np.asarray(lag_grid, dtype=float)
    lam = mean_intensity(model)
    report = model.stability()
    params = _symmetric_exponential_params(model)
    if method == "closed_form" and params is None:
        raise ModelSpecException("closed form needs a 1D or symmetric bivariate single-beta exponential model")
    if params is not None and method != "fourier":
        return _closed_form_correlation(model, lags, params)

    power_laws = _power_law_entries(model)
    max_lag = float(np.max(np.abs(lags))) if lags.size else 0.0
    support = model.kernels.support()

    if any(k.gamma < 0.5 for k in power_laws):
        logger.warning(
            "heavy-tailed kernel, covariance returned in the Laplace domain only",
            gamma=min(k.gamma for k in power_laws),
        )
        scale = max_lag or 1.0
        omega = np.geomspace(2 * np.pi / (64 * scale), 2 * np.pi * _FFT_POINTS_PER_SUPPORT / scale, 256)
        return CorrelationEstimate(
            lags=lags,
            values=None,
            atoms=lam,
            method="laplace_only",
            frequencies=omega,
            laplace_values=_smooth_laplace(model, omega, lam) + np.diag(lam),
        )

    reach = max_lag if max_lag > 0 else support
    if power_laws:
        period = _HEAVY_TAIL_PERIOD_FACTOR * reach
        spacing_scale = reach
    else:
        # the covariance decays at the kernel rate slowed by the branching ratio
        correlation_support = support / max(1.0 - report.spectral_radius, settings.near_critical_margin)
        period = max(_LIGHT_TAIL_PERIOD_FACTOR * reach, 4.0 * correlation_support)
        spacing_scale = min(support, reach) if support > 0 else reach

    zero_level = float(np.max(np.abs(_smooth_laplace(model, np.zeros(1), lam))))
    if zero_level == 0.0:
        values = np.zeros((lags.size, model.dimension, model.dimension))
        return CorrelationEstimate(lags=lags, values=values, atoms=lam, method="fourier")

    cutoff = 2 * np.pi / spacing_scale
    for _ in range(64):
        level = float(np.max(np.abs(_smooth_laplace(model, np.array([cutoff]), lam))))
        if level < settings.fourier_cutoff_ratio * zero_level:
            break
        cutoff *= 2.0
    else:
        raise ResolutionException("no frequency cutoff found for the covariance transform")

    dt = min(np.pi / cutoff, spacing_scale / _FFT_POINTS_PER_SUPPORT)
    n_points = int(2 ** np.ceil(np.log2(max(period / dt, 2.0))))
    if n_points > settings.fourier_max_points:
        raise ResolutionException(
            "covariance inversion grid exceeds the configured maximum",
            {"required_points": n_points, "max_points": settings.fourier_max_points},
        )

    omega = 2 * np.pi * np.arange(n_points // 2 + 1) / (n_points * dt)
    spectrum = _smooth_laplace(model, omega, lam)
    # c_n = (1/dt) Σ_k ĉ(iω_k) e^{-iω_k t_n}; c is real so the sum is an irfft of the conjugate
    grid_values = np.fft.irfft(np.conj(spectrum), n=n_points, axis=0) / dt
    grid_values = np.fft.fftshift(grid_values, axes=0)
    grid_times = (np.arange(n_points) - n_points // 2) * dt

    d = model.dimension
    values = np.empty((lags.size, d, d))
    for i in range(d):
        for j in range(d):
            values[:, i, j] = np.interp(lags, grid_times, grid_values[:, i, j])
    logger.debug("covariance inverted", n_points=n_points, spacing=dt, period=n_points * dt)
    return CorrelationEstimate(
        lags=lags,
        values=values,
        atoms=lam,
        method="fourier",
        grid_spacing=dt,
        n_points=n_points,
        period=n_points * dt,
    )


def causality_rates(model: HawkesModel) -> CausalityTables:
    """Decompose Λ into exogenous events, events by direct-parent type and by oldest-ancestor type."""
    _require_linear(model, "causality_rates")
    lam = mean_intensity(model)
    direct = model.kernels.norm_matrix() * lam[None, :]
    ancestor = resolvent_norms(model) * model.baseline[None, :]
    return CausalityTables(exogenous=model.baseline.copy(), direct=direct, ancestor=ancestor)


def _exponential_prediction(model: HawkesModel, history: EventSequence, s: float, times: np.ndarray) -> np.ndarray:
    """Closed form through the linear ODE of the exponential Markov state."""
    rows, cols, alphas, betas = model.kernels.exponential_components()
    n = rows.size
    d = model.dimension
    mu = model.baseline
    if n == 0:
        return np.tile(mu, (times.size, 1))

    y0 = np.zeros(n)
    for r in range(n):
        past = history.times[history.components == cols[r]]
        y0[r] = np.sum(np.exp(-betas[r] * (s - past)))

    # λ = μ + W y, dE[y]/dt = -B y + S E[λ]
    weights = np.zeros((d, n))
    weights[rows, np.arange(n)] = alphas * betas
    selector = np.zeros((n, d))
    selector[np.arange(n), cols] = 1.0
    drift = -np.diag(betas) + selector @ weights
    forcing = selector @ mu

    generator = np.zeros((n + 1, n + 1))
    generator[:n, :n] = drift
    generator[:n, n] = forcing
    state = np.append(y0, 1.0)
    out = np.empty((times.size, d))
    for m, t in enumerate(times):
        y = (linalg.expm(generator * (t - s)) @ state)[:n]
        out[m] = mu + weights @ y
    return out


def _volterra_prediction(model: HawkesModel, history: EventSequence, s: float, times: np.ndarray) -> np.ndarray:
    """Trapezoidal stepping of m(t) = μ + h(t) + ∫_s^t Φ(t−u) m(u) du."""
    grid = np.unique(np.concatenate([[s], times]))
    d = model.dimension
    km = model.kernels
    mu = model.baseline
    m = np.empty((grid.size, d))
    phi0 = km.value(0.0)
    for n, t in enumerate(grid):
        drive = mu.copy()
        if len(history):
            lagged = km.value(t - history.times)
            drive += lagged[np.arange(len(history)), :, history.components].sum(axis=0)
        if n == 0:
            m[0] = drive
            continue
        widths = np.diff(grid[: n + 1])
        w = np.zeros(n + 1)
        w[:-1] += 0.5 * widths
        w[1:] += 0.5 * widths
        kernel_vals = km.value(t - grid[:n])
        drive += np.einsum("k,kij,kj->i", w[:n], kernel_vals, m[:n])
        m[n] = np.linalg.solve(np.eye(d) - w[n] * phi0, drive)
    idx = np.searchsorted(grid, times)
    return m[idx]


@log_duration("predict_intensity")
def predict_intensity(
    model: HawkesModel, history: EventSequence, s: float, horizon_grid: Sequence[float]
) -> IntensityPath:
    """Expected intensity E[λ_t | F_s] for t on ``horizon_grid``.

    Exponential families are propagated exactly through their Markov state;
    any other family solves the renewal equation by trapezoidal stepping.
    """
    _require_linear(model, "predict_intensity")
    require_stable(model)
    times = np.asarray(horizon_grid, dtype=float)
    if len(history) and history.times[-1] > s:
        raise InputException("history contains events after the prediction origin", {"s": s})
    if np.any(times < s):
        raise InputException("prediction times must not precede the origin", {"s": s})
    if model.kernels.is_exponential:
        values = _exponential_prediction(model, history, s, times)
    else:
        values = _volterra_prediction(model, history, s, times)
    return IntensityPath(times=times, values=values)


def diffusion_coefficients(model: HawkesModel) -> np.ndarray:
    """Diffusion-limit matrix (I + Ψ̂(0)) diag(Λ)^{1/2}."""
    for kernel in _power_law_entries(model):
        if kernel.gamma <= 0.5:
            logger.warning("kernel lacks a finite half moment, diffusion limit may not hold", gamma=kernel.gamma)
    lam = mean_intensity(model)
    d = model.dimension
    return (np.eye(d) + resolvent_norms(model)) * np.sqrt(lam)[None, :]


def asymptotic_count_covariance(model: HawkesModel) -> np.ndarray:
    """Limit of Cov(N_T)/T."""
    diffusion = diffusion_coefficients(model)
    return diffusion @ diffusion.T


def summarize(model: HawkesModel) -> AnalyticsResult:
    report = require_stable(model)
    return AnalyticsResult(
        mean_intensity=mean_intensity(model),
        resolvent_norms=resolvent_norms(model),
        diffusion=diffusion_coefficients(model),
        causality=causality_rates(model),
        stability=report,
    )
