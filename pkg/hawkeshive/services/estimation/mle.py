"""
Maximum likelihood estimation of parametric Hawkes families.

Parameters are optimized on the log scale with L-BFGS-B. Exponential families
use the analytic gradient of the recursion; other families use central finite
differences. A soft barrier keeps iterates inside the stationarity region.
"""

from typing import List, Optional, Union

import numpy as np
from scipy import linalg, optimize

from ...core.errors import DegenerateDataException
from ...core.metrics import metrics_collector
from ...core.observability import get_logger, log_duration
from ...domain.events import EventSequence
from ...domain.kernels import spectral_radius, stability
from .families import ExponentialFamily, ParametricFamily, PowerLawFamily, edge_start, make_family
from .likelihood import evaluate_likelihood, exponential_loglik
from .results import EstimationResult

logger = get_logger(__name__)

BARRIER_RADIUS = 0.999
BARRIER_WEIGHT = 1e4
GRADIENT_TOLERANCE = 1e-6
FINITE_DIFFERENCE_STEP = 1e-6


def require_events(events: EventSequence) -> None:
    """Reject empty records and records with an empty component."""
    counts = events.counts()
    if len(events) == 0:
        raise DegenerateDataException("cannot fit an empty event sequence")
    if np.any(counts == 0):
        raise DegenerateDataException(
            "every component needs at least one event", {"empty_components": np.flatnonzero(counts == 0).tolist()}
        )


def _norm_matrix(family: ParametricFamily, theta: np.ndarray) -> np.ndarray:
    if isinstance(family, PowerLawFamily):
        _, alpha, _, gamma = family.split(theta)
        return alpha / gamma
    _, alpha, _ = family.split(theta)
    return alpha


def _perron_gradient(norms: np.ndarray) -> np.ndarray:
    """∂ρ/∂N = u vᵀ / (uᵀ v) with u, v the left and right Perron vectors."""
    vals, left, right = linalg.eig(norms, left=True, right=True)
    k = int(np.argmax(vals.real))
    u = np.abs(left[:, k].real)
    v = np.abs(right[:, k].real)
    denom = float(u @ v)
    if denom <= 0:
        return np.zeros_like(norms)
    return np.outer(u, v) / denom


class _Objective:
    """Negative mean log-likelihood plus barrier, evaluated on log-parameters."""

    def __init__(
        self,
        family: ParametricFamily,
        events: EventSequence,
        start: float,
        max_lag: Optional[float],
    ):
        self.family = family
        self.events = events
        self.start = start
        self.max_lag = max_lag
        self.scale = float(max(np.sum(events.times >= start), 1))
        self.values: List[float] = []
        self.gradient_norms: List[float] = []
        self.best_x: Optional[np.ndarray] = None
        self.best_value = np.inf
        self.latest = (np.inf, 0.0)
        if isinstance(family, ExponentialFamily):
            d = family.dimension
            self.rows = np.repeat(np.arange(d), d).astype(np.int64)
            self.cols = np.tile(np.arange(d), d).astype(np.int64)

    def barrier(self, theta: np.ndarray):
        norms = _norm_matrix(self.family, theta)
        radius, _ = spectral_radius(norms)
        if radius <= BARRIER_RADIUS:
            return 0.0, None, radius
        excess = radius - BARRIER_RADIUS
        return BARRIER_WEIGHT * excess**2, 2.0 * BARRIER_WEIGHT * excess * _perron_gradient(norms), radius

    def loglik(self, theta: np.ndarray) -> float:
        if isinstance(self.family, ExponentialFamily):
            mu, alpha, beta = self.family.split(theta)
            value, _ = exponential_loglik(
                mu, self.rows, self.cols, alpha.ravel(), beta.ravel(), self.events, self.start
            )
            return value
        model = self.family.to_model(theta)
        method = "direct" if isinstance(self.family, PowerLawFamily) else "auto"
        return evaluate_likelihood(model, self.events, self.start, method, self.max_lag).value

    def value(self, x: np.ndarray) -> float:
        theta = np.exp(x)
        loglik = self.loglik(theta)
        if not np.isfinite(loglik):
            return np.inf
        penalty, _, _ = self.barrier(theta)
        return -loglik / self.scale + penalty

    def value_and_gradient(self, x: np.ndarray):
        theta = np.exp(x)
        if isinstance(self.family, ExponentialFamily):
            f, grad = self._exponential(theta)
        else:
            f = self.value(x)
            grad = self._numeric_gradient(x)
        self._record(x, f, grad)
        return f, grad

    def _exponential(self, theta: np.ndarray):
        family = self.family
        mu, alpha, beta = family.split(theta)
        value, _, (d_mu, d_alpha, d_beta) = exponential_loglik(
            mu, self.rows, self.cols, alpha.ravel(), beta.ravel(), self.events, self.start, with_gradient=True
        )
        if not np.isfinite(value):
            return np.inf, np.zeros_like(theta)
        d_alpha = d_alpha.reshape(alpha.shape)
        d_beta = d_beta.reshape(beta.shape)
        penalty, barrier_grad, _ = self.barrier(theta)
        if barrier_grad is not None:
            d_alpha = d_alpha - self.scale * barrier_grad
        if family.shared_beta:
            d_beta_flat = np.array([d_beta.sum()])
        else:
            d_beta_flat = d_beta.ravel()
        grad_theta = -np.concatenate([d_mu, d_alpha.ravel(), d_beta_flat]) / self.scale
        return -value / self.scale + penalty, grad_theta * theta

    def _numeric_gradient(self, x: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(x)
        for k in range(x.size):
            h = FINITE_DIFFERENCE_STEP * max(1.0, abs(x[k]))
            up, down = x.copy(), x.copy()
            up[k] += h
            down[k] -= h
            grad[k] = (self.value(up) - self.value(down)) / (2.0 * h)
        return grad

    def _record(self, x: np.ndarray, f: float, grad: np.ndarray) -> None:
        if f < self.best_value:
            self.best_value = f
            self.best_x = x.copy()
        self.latest = (f, float(np.max(np.abs(grad))) if grad.size else 0.0)

    def callback(self, x: np.ndarray) -> None:
        f, g = self.latest
        self.values.append(-f * self.scale)
        self.gradient_norms.append(g)


def _standard_errors(objective: _Objective, x: np.ndarray) -> Optional[np.ndarray]:
    """Observed-information standard errors of the positive parameters."""
    n = x.size
    hessian = np.zeros((n, n))
    for k in range(n):
        h = 1e-4 * max(1.0, abs(x[k]))
        up, down = x.copy(), x.copy()
        up[k] += h
        down[k] -= h
        _, g_up = objective.value_and_gradient(up)
        _, g_down = objective.value_and_gradient(down)
        hessian[:, k] = (g_up - g_down) / (2.0 * h)
    hessian = 0.5 * (hessian + hessian.T) * objective.scale
    try:
        cov_x = np.linalg.inv(hessian)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(cov_x)
    if np.any(~np.isfinite(diag)) or np.any(diag < 0):
        return None
    # delta method from log-parameters back to parameters
    return np.exp(x) * np.sqrt(diag)


@log_duration("fit_mle")
def fit_mle(
    events: EventSequence,
    family: Union[str, ParametricFamily] = "exponential",
    init: Optional[np.ndarray] = None,
    max_iter: int = 500,
    start: Optional[float] = None,
    max_lag: Optional[float] = None,
    shared_beta: bool = False,
    compute_standard_errors: bool = True,
) -> EstimationResult:
    """Fit a parametric family by maximizing the log-likelihood.

    Args:
        events: Observed record
        family: Family name (``exponential`` or ``power_law``) or instance
        init: Starting parameters in natural scale; data-driven when omitted
        max_iter: Optimizer iteration budget
        start: Events before this time are history only; one support of the
            initial kernels when omitted
        max_lag: History truncation for non-exponential families
        shared_beta: Share one decay rate across entries (exponential only)
        compute_standard_errors: Estimate observed-information standard errors

    Returns:
        EstimationResult: Best iterate with its trace and diagnostics

    Raises:
        DegenerateDataException: If the record or one of its components is empty
    """
    require_events(events)
    if isinstance(family, str):
        family = make_family(family, events.dimension, shared_beta)
    theta0 = family.initial(events) if init is None else np.asarray(init, dtype=float)
    if start is None:
        start = edge_start(events, family.support(theta0))
    n_retained = int(np.sum(events.times >= start))
    floor = events.dimension * family.n_params * 10
    if n_retained < floor:
        logger.warning("few events for the number of parameters", events=n_retained, recommended=floor)

    objective = _Objective(family, events, start, max_lag)
    x0 = np.log(np.maximum(theta0, 1e-12))
    logger.info("mle started", family=family.name, dimension=events.dimension, events=len(events))

    res = optimize.minimize(
        objective.value_and_gradient,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=objective.callback,
        options={"maxiter": max_iter, "gtol": GRADIENT_TOLERANCE},
    )
    x_best = objective.best_x if objective.best_x is not None else res.x
    theta = np.exp(x_best)
    model = family.to_model(theta)
    report = stability(model.kernels)
    converged = bool(res.success)
    if not converged:
        logger.warning("mle did not converge", message=str(res.message), iterations=int(res.nit))

    errors = _standard_errors(objective, x_best) if compute_standard_errors else None
    names = family.parameter_names()
    trace = np.asarray(objective.values) if objective.values else np.array([-objective.best_value * objective.scale])
    metrics_collector.record_fit("mle", converged)
    logger.info("mle finished", converged=converged, iterations=int(res.nit), branching_ratio=report.spectral_radius)
    return EstimationResult(
        model=model,
        method=f"mle_{family.name}",
        objective_trace=trace,
        converged=converged,
        iterations=int(res.nit),
        stability=report,
        parameters=family.describe(theta),
        standard_errors=dict(zip(names, map(float, errors))) if errors is not None else None,
        gradient_norms=np.asarray(objective.gradient_norms),
        at_stability_boundary=report.spectral_radius >= BARRIER_RADIUS,
        diagnostics={"message": str(res.message), "log_likelihood": objective.loglik(theta), "start": start},
    )
