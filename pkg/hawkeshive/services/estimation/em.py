"""
Expectation-maximization estimators.

Both estimators alternate between the branching probabilities of every event
(immigrant versus offspring of an earlier event) and closed-form updates of the
baseline and the kernel. The parametric version works on exponential kernels
through the recursion sums; the nonparametric one re-estimates a histogram
kernel on a fixed lag grid.
"""

from typing import Optional

import numpy as np
from scipy import optimize

from ...core.errors import InputException, UnsupportedFamilyException
from ...core.metrics import metrics_collector
from ...core.observability import get_logger, log_duration
from ...domain.events import EventSequence, iter_pairs
from ...domain.kernels import PiecewiseConstantKernel, stability
from ...domain.model import HawkesModel
from .families import ExponentialFamily, edge_start
from .likelihood import exponential_terms, exposure
from .mle import require_events
from .results import EstimationResult

logger = get_logger(__name__)

DEFAULT_MAX_ITER = 1000
DEFAULT_TOLERANCE = 1e-8
# β search interval around the current value, in log-space
BETA_SEARCH_DECADES = 2.0


def _profile_q(S: np.ndarray, L: np.ndarray, G: np.ndarray, beta: np.ndarray) -> float:
    """Expected complete log-likelihood of the kernel part with α profiled out."""
    live = S > 0
    s, g, b, l = S[live], G[live], beta[live], L[live]
    return float(np.sum(s * np.log(s / g) + s * np.log(b) - b * l - s))


def _update_beta(
    events: EventSequence,
    cols: np.ndarray,
    S: np.ndarray,
    L: np.ndarray,
    beta: np.ndarray,
    start: float,
    shared: bool,
) -> np.ndarray:
    """Bounded search for the β maximizing the profiled objective, kept only if it improves."""
    G, _ = exposure(events, cols, beta, start)
    current = _profile_q(S, L, G, beta)

    def search(select: np.ndarray, b0: float) -> float:
        def negative(log_b: float) -> float:
            trial = np.full(select.sum(), np.exp(log_b))
            g, _ = exposure(events, cols[select], trial, start)
            return -_profile_q(S[select], L[select], g, trial)

        span = BETA_SEARCH_DECADES * np.log(10.0)
        res = optimize.minimize_scalar(
            negative, bounds=(np.log(b0) - span, np.log(b0) + span), method="bounded"
        )
        return float(np.exp(res.x))

    proposal = beta.copy()
    if shared:
        proposal[:] = search(np.ones(beta.size, dtype=bool), float(beta[0]))
    else:
        for r in range(beta.size):
            select = np.zeros(beta.size, dtype=bool)
            select[r] = True
            proposal[r] = search(select, float(beta[r]))
    G_new, _ = exposure(events, cols, proposal, start)
    if _profile_q(S, L, G_new, proposal) > current:
        return proposal
    return beta


@log_duration("fit_em_parametric")
def fit_em_parametric(
    events: EventSequence,
    init: Optional[np.ndarray] = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOLERANCE,
    start: Optional[float] = None,
    shared_beta: bool = False,
    fix_beta: bool = False,
) -> EstimationResult:
    """EM for multivariate exponential kernels.

    E-step: event m is an immigrant with probability μ/λ(t_m) and the offspring
    of an earlier event n with probability φ(t_m − t_n)/λ(t_m). M-step: μ and α
    are closed form; β is updated by a bounded scalar search on the expected
    complete log-likelihood, accepted only when it increases it, so the
    log-likelihood trace is non-decreasing.

    Args:
        events: Observed record
        init: Starting parameters of ``ExponentialFamily`` in natural scale
        max_iter: Iteration cap
        tol: Relative log-likelihood increase below which the run stops
        start: Events before this time are history only; one support of the
            initial kernels when omitted
        shared_beta: One decay rate for every entry
        fix_beta: Keep the decay rates at their initial values

    Returns:
        EstimationResult: Fitted exponential model with the log-likelihood trace
    """
    require_events(events)
    family = ExponentialFamily(events.dimension, shared_beta)
    theta = family.initial(events) if init is None else np.asarray(init, dtype=float)
    if start is None:
        start = edge_start(events, family.support(theta))
    mu, alpha, beta = (np.array(p, dtype=float) for p in family.split(theta))
    d = events.dimension
    rows = np.repeat(np.arange(d), d).astype(np.int64)
    cols = np.tile(np.arange(d), d).astype(np.int64)
    a, b = alpha.ravel().copy(), beta.ravel().copy()

    keep = events.times >= start
    comps = events.components[keep]
    window = events.horizon - start
    trace = []
    converged = False
    immigrant_fraction = 1.0
    iteration = 0
    for iteration in range(1, max_iter + 1):
        terms = exponential_terms(mu, rows, cols, a, b, events)
        lam = terms.intensities[keep]
        G, _ = exposure(events, cols, b, start)
        loglik = float(np.sum(np.log(lam)) - np.sum(mu) * window - np.sum(a * G))
        trace.append(loglik)
        if len(trace) > 1 and trace[-1] - trace[-2] <= tol * max(abs(trace[-2]), 1.0):
            converged = True
            break

        inv = 1.0 / lam
        immigrants = np.bincount(comps, weights=mu[comps] * inv, minlength=d)
        A = terms.A[keep] * terms.mask[keep]
        B = terms.B[keep] * terms.mask[keep]
        S = a * b * (inv @ A)
        L = a * b * (inv @ B)
        immigrant_fraction = float(immigrants.sum() / max(lam.size, 1))

        mu = immigrants / window
        if not fix_beta:
            b = _update_beta(events, cols, S, L, b, start, shared_beta)
        G, _ = exposure(events, cols, b, start)
        a = np.where(G > 0, S / np.where(G > 0, G, 1.0), 0.0)

    if not converged:
        logger.warning(
            "em reached the iteration cap; convergence is slow when events overlap strongly",
            iterations=iteration,
            last_increase=trace[-1] - trace[-2] if len(trace) > 1 else None,
        )

    theta = family.join(mu, a.reshape(d, d), b.reshape(d, d))
    model = family.to_model(theta)
    report = stability(model.kernels)
    metrics_collector.record_fit("em_parametric", converged)
    logger.info("em finished", converged=converged, iterations=iteration, branching_ratio=report.spectral_radius)
    return EstimationResult(
        model=model,
        method="em_parametric",
        objective_trace=np.asarray(trace),
        converged=converged,
        iterations=iteration,
        stability=report,
        parameters=family.describe(theta),
        at_stability_boundary=report.spectral_radius >= 1.0,
        diagnostics={"immigrant_fraction": immigrant_fraction, "start": start},
    )


def _bin_exposure(times: np.ndarray, edges: np.ndarray, start: float, horizon: float) -> np.ndarray:
    """X_k = Σ_n |[t_n + e_k, t_n + e_{k+1}) ∩ [start, T]|."""
    lo = np.clip(np.add.outer(times, edges[:-1]), start, horizon)
    hi = np.clip(np.add.outer(times, edges[1:]), start, horizon)
    return np.sum(hi - lo, axis=0)


def _smoothed_levels(S: np.ndarray, X: np.ndarray, h0: np.ndarray, penalty: float) -> np.ndarray:
    """argmax Σ S_k log h_k − h_k X_k − penalty Σ (h_{k+1} − h_k)² over h ≥ 0."""
    tiny = np.finfo(float).tiny

    def objective(h: np.ndarray):
        safe = np.maximum(h, tiny)
        diff = np.diff(h)
        value = -np.sum(S * np.log(safe) - h * X) + penalty * np.sum(diff**2)
        grad = -(S / safe - X)
        grad[:-1] -= 2.0 * penalty * diff
        grad[1:] += 2.0 * penalty * diff
        return value, grad

    res = optimize.minimize(objective, np.maximum(h0, 1e-12), jac=True, method="L-BFGS-B", bounds=[(0, None)] * h0.size)
    return np.maximum(res.x, 0.0)


@log_duration("fit_em_nonparametric")
def fit_em_nonparametric(
    events: EventSequence,
    lag_grid: np.ndarray,
    penalty: float = 0.0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOLERANCE,
    start: Optional[float] = None,
) -> EstimationResult:
    """Histogram EM for a univariate kernel on a fixed lag grid.

    The kernel is piecewise constant on the bins of ``lag_grid`` (edges starting
    at 0). Each M-step sets a level to the expected number of offspring falling
    in its bin divided by the bin exposure; levels are non-negative by
    construction. A positive ``penalty`` adds an L2 roughness term on successive
    level differences.

    Events within one grid span of the record start are history only unless
    ``start`` says otherwise.

    Raises:
        UnsupportedFamilyException: If the record is not univariate
        InputException: If the grid is not strictly increasing from 0
    """
    if events.dimension != 1:
        raise UnsupportedFamilyException("nonparametric EM supports univariate records only")
    require_events(events)
    edges = np.asarray(lag_grid, dtype=float)
    if edges.size < 2 or edges[0] != 0 or np.any(np.diff(edges) <= 0):
        raise InputException("lag grid must start at 0 and increase strictly", {"size": int(edges.size)})
    if penalty < 0:
        raise InputException("penalty must be non-negative", {"penalty": penalty})
    if start is None:
        start = edge_start(events, edges[-1])

    times = events.times
    horizon = events.horizon
    window = horizon - start
    K = edges.size - 1
    dst_parts, bin_parts = [], []
    for _, dst, lags in iter_pairs(times, times, 0.0, edges[-1]):
        sel = (times[dst] >= start) & (lags < edges[-1])
        dst_parts.append(dst[sel])
        bin_parts.append(np.searchsorted(edges, lags[sel], side="right") - 1)
    dst = np.concatenate(dst_parts) if dst_parts else np.empty(0, dtype=np.int64)
    bins = np.concatenate(bin_parts) if bin_parts else np.empty(0, dtype=np.int64)

    keep = times >= start
    n_kept = int(keep.sum())
    X = _bin_exposure(times, edges, start, horizon)
    mu = 0.5 * n_kept / window
    h = np.where(X > 0, 0.5 * n_kept / np.maximum(X.sum(), np.finfo(float).tiny), 0.0) * np.ones(K)

    trace = []
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        lam = np.full(times.size, mu)
        np.add.at(lam, dst, h[bins])
        lam_kept = lam[keep]
        penalized = penalty * float(np.sum(np.diff(h) ** 2))
        loglik = float(np.sum(np.log(lam_kept)) - mu * window - np.sum(h * X)) - penalized
        trace.append(loglik)
        if len(trace) > 1 and trace[-1] - trace[-2] <= tol * max(abs(trace[-2]), 1.0):
            converged = True
            break

        p = h[bins] / lam[dst]
        S = np.bincount(bins, weights=p, minlength=K)
        mu = float(np.sum(mu / lam_kept)) / window
        if penalty > 0:
            h = _smoothed_levels(S, X, h, penalty)
        else:
            h = np.where(X > 0, S / np.where(X > 0, X, 1.0), 0.0)

    if not converged:
        logger.warning(
            "nonparametric em reached the iteration cap; slowly decaying kernels converge slowly",
            iterations=iteration,
        )

    kernel = PiecewiseConstantKernel(tuple(float(e) for e in edges), tuple(float(v) for v in h))
    model = HawkesModel.create([mu], [[kernel]])
    report = stability(model.kernels)
    metrics_collector.record_fit("em_nonparametric", converged)
    logger.info("nonparametric em finished", converged=converged, iterations=iteration, norm=report.spectral_radius)
    return EstimationResult(
        model=model,
        method="em_nonparametric",
        objective_trace=np.asarray(trace),
        converged=converged,
        iterations=iteration,
        stability=report,
        parameters={"mu.0": mu, **{f"level.{k}": float(v) for k, v in enumerate(h)}},
        at_stability_boundary=report.spectral_radius >= 1.0,
        diagnostics={"penalty": penalty, "pairs": int(bins.size), "start": start},
    )
