"""
Signature plot and Epps covariation of event-driven prices.

The empirical signature at scale τ is C(τ) = (1/T) Σ_n (P_{(n+1)τ} − P_{nτ})²,
the realized variance per unit time of τ-returns. For a linear Hawkes model
the expected value follows from the covariance density:

    Var(vᵀN_τ)/τ = Σ_i v_i² Λ^i + 2 ∫₀^τ (1 − t/τ) vᵀc(t)v dt

with v the price loading of each component.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from ...core.errors import InputException, ResolutionException
from ...core.observability import get_logger, log_duration
from ...domain.model import HawkesModel
from ..analytics import asymptotic_count_covariance, correlation_time_domain, require_stable
from .price import PricePath

logger = get_logger(__name__)

MIN_HORIZON_RATIO = 100.0
_MODEL_GRID_POINTS = 4096


@dataclass(frozen=True)
class SignatureCurve:
    """Realized variance per unit time, in currency² per time, on a τ grid.

    ``stderr`` is the standard error of each value from the spread of the
    squared increments; it is None for model curves.
    """

    taus: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray] = None


@dataclass(frozen=True)
class EppsCurve:
    """Realized covariance per unit time of two prices and the matching correlation."""

    taus: np.ndarray
    covariation: np.ndarray
    correlation: np.ndarray
    stderr: Optional[np.ndarray] = None


def _check_grid(taus: Sequence[float], horizon: float) -> np.ndarray:
    grid = np.asarray(taus, dtype=float).ravel()
    if grid.size == 0 or np.any(grid <= 0):
        raise InputException("scales must be positive")
    if horizon <= 0 or np.any(grid > horizon):
        raise InputException("scale exceeds the record length", {"max_tau": float(grid.max()), "horizon": horizon})
    if horizon < MIN_HORIZON_RATIO * grid.max():
        logger.warning(
            "record is short for the largest scale",
            horizon=horizon,
            max_tau=float(grid.max()),
            recommended=MIN_HORIZON_RATIO * float(grid.max()),
        )
    return grid


def _increments(path: PricePath, tau: float, horizon: float) -> np.ndarray:
    return np.diff(path.sample(tau, horizon)).astype(float) * path.tick


def _realized(x: np.ndarray, y: np.ndarray, horizon: float) -> Tuple[float, float]:
    products = x * y
    value = float(products.sum() / horizon)
    spread = float(np.sqrt(products.size) * products.std(ddof=1) / horizon) if products.size > 1 else float("nan")
    return value, spread


def signature_plot(path: PricePath, taus: Sequence[float], horizon: float) -> SignatureCurve:
    """Empirical signature plot of a price path over [0, horizon].

    Raises:
        InputException: If a scale is not positive or exceeds ``horizon``
    """
    grid = _check_grid(taus, horizon)
    values = np.empty(grid.size)
    stderr = np.empty(grid.size)
    for k, tau in enumerate(grid):
        dp = _increments(path, tau, horizon)
        values[k], stderr[k] = _realized(dp, dp, horizon)
    return SignatureCurve(taus=grid, values=values, stderr=stderr)


def epps_covariation(first: PricePath, second: PricePath, taus: Sequence[float], horizon: float) -> EppsCurve:
    """Realized covariance per unit time of τ-returns of two prices on a common clock.

    Raises:
        InputException: If a scale is not positive or exceeds ``horizon``
    """
    grid = _check_grid(taus, horizon)
    cov = np.empty(grid.size)
    stderr = np.empty(grid.size)
    corr = np.empty(grid.size)
    for k, tau in enumerate(grid):
        da = _increments(first, tau, horizon)
        db = _increments(second, tau, horizon)
        cov[k], stderr[k] = _realized(da, db, horizon)
        norm = np.sqrt(np.sum(da * da) * np.sum(db * db))
        corr[k] = float(np.sum(da * db) / norm) if norm > 0 else 0.0
    return EppsCurve(taus=grid, covariation=cov, correlation=corr, stderr=stderr)


def _loading(dimension: int, up: int, down: int) -> np.ndarray:
    if not (0 <= up < dimension and 0 <= down < dimension) or up == down:
        raise InputException("price needs two distinct components", {"up": up, "down": down})
    v = np.zeros(dimension)
    v[up], v[down] = 1.0, -1.0
    return v


def price_diffusion_covariance(
    model: HawkesModel, first: Tuple[int, int] = (0, 1), second: Tuple[int, int] = (0, 1)
) -> float:
    """Large-scale limit of the covariance per unit time of two model prices, in ticks².

    Each price is given as an (up, down) pair of components.
    """
    require_stable(model)
    a = _loading(model.dimension, *first)
    b = _loading(model.dimension, *second)
    return float(a @ asymptotic_count_covariance(model) @ b)


def price_diffusion_variance(model: HawkesModel, up: int = 0, down: int = 1) -> float:
    """C(∞) of the price N^up − N^down, in ticks² per unit time."""
    return price_diffusion_covariance(model, (up, down), (up, down))


@log_duration("signature_from_model")
def signature_from_model(
    model: HawkesModel, taus: Sequence[float], up: int = 0, down: int = 1, tick: float = 1.0
) -> SignatureCurve:
    """Expected signature plot of a linear model by integrating its covariance density.

    Raises:
        ResolutionException: If the covariance is only available in the Laplace domain
    """
    grid = np.asarray(taus, dtype=float).ravel()
    if grid.size == 0 or np.any(grid <= 0):
        raise InputException("scales must be positive")
    require_stable(model)
    v = _loading(model.dimension, up, down)
    lags = np.concatenate([[0.0], np.geomspace(grid.min() * 1e-4, grid.max(), _MODEL_GRID_POINTS)])
    estimate = correlation_time_domain(model, lags)
    if estimate.values is None:
        raise ResolutionException("covariance density is not available in the time domain for this model")
    q = np.einsum("i,nij,j->n", v, estimate.values, v)
    first = integrate.cumulative_trapezoid(q, lags, initial=0.0)
    second = integrate.cumulative_trapezoid(q * lags, lags, initial=0.0)
    i0 = np.interp(grid, lags, first)
    i1 = np.interp(grid, lags, second)
    atom = float(np.sum(v**2 * estimate.atoms))
    values = (atom + 2.0 * (i0 - i1 / grid)) * tick**2
    return SignatureCurve(taus=grid, values=values)
