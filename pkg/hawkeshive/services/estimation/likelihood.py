"""
Log-likelihood and compensator of linear Hawkes models.

Exponential and sum-of-exponential models use an O(M·R) recursion over the
Markov state; every other family sums kernel values over event pairs within the
effective support. Events before ``start`` are kept as history but excluded from
the sums.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ...core.errors import InputException, UnsupportedFamilyException
from ...core.observability import get_logger
from ...domain.events import EventSequence, iter_pairs
from ...domain.kernels import PowerLawKernel
from ...domain.model import HawkesModel, Transfer
from ._recursions import exponential_sums, power_law_intensity

logger = get_logger(__name__)

# Tail mass dropped by the direct path; far below double precision of the sums
DIRECT_TAIL_TOLERANCE = 1e-15


@dataclass(frozen=True)
class LikelihoodEvaluation:
    """Log-likelihood with the intensities at the retained events.

    ``value`` is -inf when the intensity vanishes at an event; the first such
    event index is reported in ``offending_index``.
    """

    value: float
    intensities: np.ndarray
    compensator: float
    offending_index: Optional[int] = None


@dataclass(frozen=True)
class ExponentialTerms:
    """Recursion arrays of an exponential model on a fixed event sequence."""

    rows: np.ndarray
    cols: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    mask: np.ndarray
    intensities: np.ndarray


def _check_model(model: HawkesModel, events: EventSequence) -> None:
    if model.dimension != events.dimension:
        raise InputException(
            "model and events differ in dimension", {"model": model.dimension, "events": events.dimension}
        )
    if model.transfer is not Transfer.IDENTITY or model.is_marked:
        raise UnsupportedFamilyException("likelihoods are defined for unmarked linear models only")


def exponential_terms(
    mu: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    alphas: np.ndarray,
    betas: np.ndarray,
    events: EventSequence,
) -> ExponentialTerms:
    """Intensity at every event through the exponential recursion."""
    A, B, C = exponential_sums(events.times, events.components, cols, betas)
    mask = rows[None, :] == events.components[:, None]
    lam = mu[events.components] + np.sum(A * (alphas * betas) * mask, axis=1)
    return ExponentialTerms(rows, cols, alphas, betas, A, B, C, mask, lam)


def exposure(events: EventSequence, cols: np.ndarray, betas: np.ndarray, start: float) -> Tuple[np.ndarray, np.ndarray]:
    """G_r = Σ_{n: k_n = cols[r]} [e^{-β_r a_n} − e^{-β_r b_n}] and its derivative in β_r.

    a_n = max(start − t_n, 0) and b_n = T − t_n bound the part of each kernel
    lying inside the observation window.
    """
    G = np.empty(betas.size)
    dG = np.empty(betas.size)
    for r in range(betas.size):
        t = events.times[events.components == cols[r]]
        a = np.maximum(start - t, 0.0)
        b = events.horizon - t
        ea, eb = np.exp(-betas[r] * a), np.exp(-betas[r] * b)
        G[r] = np.sum(ea - eb)
        dG[r] = np.sum(-a * ea + b * eb)
    return G, dG


def exponential_loglik(
    mu: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    alphas: np.ndarray,
    betas: np.ndarray,
    events: EventSequence,
    start: float = 0.0,
    with_gradient: bool = False,
):
    """Log-likelihood of an exponential model, optionally with its analytic gradient.

    Returns ``(value, terms)`` or ``(value, terms, (d_mu, d_alpha, d_beta))``.
    """
    terms = exponential_terms(mu, rows, cols, alphas, betas, events)
    keep = events.times >= start
    lam = terms.intensities[keep]
    G, dG = exposure(events, cols, betas, start)
    window = events.horizon - start
    compensator = float(np.sum(mu) * window + np.sum(alphas * G))
    with np.errstate(divide="ignore"):
        value = float(np.sum(np.log(lam)) - compensator)
    if not with_gradient:
        return value, terms
    inv = 1.0 / lam
    A = terms.A[keep] * terms.mask[keep]
    B = terms.B[keep] * terms.mask[keep]
    comps = events.components[keep]
    d_mu = np.bincount(comps, weights=inv, minlength=mu.size) - window
    d_alpha = betas * (inv @ A) - G
    d_beta = alphas * (inv @ A - betas * (inv @ B)) - alphas * dG
    return value, terms, (d_mu, d_alpha, d_beta)


def _direct_reach(model: HawkesModel, max_lag: Optional[float], horizon: float) -> float:
    reach = max((k.support(DIRECT_TAIL_TOLERANCE) for _, _, k in model.kernels), default=0.0)
    if max_lag is not None:
        reach = min(reach, max_lag)
    return min(reach, horizon)


def direct_intensities(model: HawkesModel, events: EventSequence, max_lag: Optional[float] = None) -> np.ndarray:
    """λ_{k_m}(t_m) by summation over event pairs within the kernel reach."""
    reach = _direct_reach(model, max_lag, events.horizon)
    km = model.kernels
    if all(isinstance(k, PowerLawKernel) for _, _, k in km):
        params = np.array([[[km[i, j].alpha, km[i, j].beta, km[i, j].gamma] for j in range(model.dimension)]
                           for i in range(model.dimension)])
        return power_law_intensity(
            events.times,
            events.components,
            model.baseline,
            np.ascontiguousarray(params[..., 0]),
            np.ascontiguousarray(params[..., 1]),
            np.ascontiguousarray(params[..., 2]),
            reach,
        )
    lam = model.baseline[events.components].astype(float)
    comps = events.components
    for src, dst, lags in iter_pairs(events.times, events.times, 0.0, reach):
        ki, kj = comps[dst], comps[src]
        vals = np.zeros(lags.size)
        for i, j, kernel in km:
            sel = (ki == i) & (kj == j)
            if np.any(sel):
                vals[sel] = kernel.value(lags[sel])
        lam += np.bincount(dst, weights=vals, minlength=lam.size)
    return lam


def direct_compensator(model: HawkesModel, events: EventSequence, start: float, max_lag: Optional[float] = None) -> float:
    reach = _direct_reach(model, max_lag, events.horizon)
    total = float(np.sum(model.baseline)) * (events.horizon - start)
    for j in range(model.dimension):
        t = events.component_times(j)
        upper = np.minimum(events.horizon - t, reach)
        lower = np.clip(start - t, 0.0, reach)
        for i in range(model.dimension):
            kernel = model.kernels[i, j]
            total += float(np.sum(kernel.integral(upper) - kernel.integral(lower)))
    return total


def evaluate_likelihood(
    model: HawkesModel,
    events: EventSequence,
    start: float = 0.0,
    method: str = "auto",
    max_lag: Optional[float] = None,
) -> LikelihoodEvaluation:
    """Log-likelihood -Σ_i ∫λ^i + Σ_m log λ^{k_m}(t_m) over [start, T].

    Args:
        model: Unmarked linear model
        events: Observed events on [0, T]
        start: Events before this time act as history only
        method: ``"recursive"`` (exponential families), ``"direct"`` or ``"auto"``
        max_lag: Optional history truncation of the direct path

    Returns:
        LikelihoodEvaluation: value, intensities and compensator
    """
    _check_model(model, events)
    use_recursion = model.kernels.is_exponential if method == "auto" else method == "recursive"
    keep = events.times >= start
    if use_recursion:
        rows, cols, alphas, betas = model.kernels.exponential_components()
        terms = exponential_terms(model.baseline, rows, cols, alphas, betas, events)
        lam = terms.intensities[keep]
        G, _ = exposure(events, cols, betas, start)
        compensator = float(np.sum(model.baseline) * (events.horizon - start) + np.sum(alphas * G))
    else:
        lam = direct_intensities(model, events, max_lag)[keep]
        compensator = direct_compensator(model, events, start, max_lag)
    zero = np.flatnonzero(lam <= 0.0)
    if zero.size:
        index = int(np.flatnonzero(keep)[zero[0]])
        logger.warning("intensity vanishes at an event", index=index)
        return LikelihoodEvaluation(float("-inf"), lam, compensator, index)
    return LikelihoodEvaluation(float(np.sum(np.log(lam)) - compensator), lam, compensator)


def log_likelihood(model: HawkesModel, events: EventSequence, start: float = 0.0, method: str = "auto") -> float:
    return evaluate_likelihood(model, events, start, method).value


def compensator_at_events(model: HawkesModel, events: EventSequence) -> np.ndarray:
    """Λ^{k_m}(t_m) = ∫_0^{t_m} λ^{k_m} for every event."""
    _check_model(model, events)
    comps = events.components
    base = model.baseline[comps] * events.times
    if model.kernels.is_exponential:
        rows, cols, alphas, betas = model.kernels.exponential_components()
        A, _, C = exponential_sums(events.times, comps, cols, betas)
        mask = rows[None, :] == comps[:, None]
        return base + np.sum((C - A) * alphas * mask, axis=1)
    reach = _direct_reach(model, None, events.horizon)
    out = base.astype(float)
    km = model.kernels
    # sources older than the reach contribute their full truncated mass
    for j in range(model.dimension):
        t_j = events.component_times(j)
        n_old = np.searchsorted(t_j, events.times - reach, side="right")
        for i in range(model.dimension):
            sel = comps == i
            out[sel] += n_old[sel] * float(km[i, j].integral(reach))
    for src, dst, lags in iter_pairs(events.times, events.times, 0.0, reach):
        ki, kj = comps[dst], comps[src]
        vals = np.zeros(lags.size)
        for i, j, kernel in km:
            sel = (ki == i) & (kj == j) & (lags < reach)
            if np.any(sel):
                vals[sel] = kernel.integral(lags[sel])
        out += np.bincount(dst, weights=vals, minlength=out.size)
    return out


def compensator_increments(model: HawkesModel, events: EventSequence, start: float = 0.0) -> List[np.ndarray]:
    """Per-component compensator increments between consecutive events after ``start``.

    Under the true model each list entry is an i.i.d. unit-exponential sample.
    """
    at_events = compensator_at_events(model, events)
    at_start = np.zeros(model.dimension)
    if start > 0:
        markers = _with_start_markers(events, start)
        values = compensator_at_events(model, markers)
        at_start = values[markers.times == start][np.argsort(markers.components[markers.times == start])]
    out = []
    for i in range(model.dimension):
        sel = (events.components == i) & (events.times >= start)
        out.append(np.diff(np.concatenate([[at_start[i]], at_events[sel]])))
    return out


def _with_start_markers(events: EventSequence, start: float) -> EventSequence:
    """Events strictly before ``start`` followed by one marker per component at ``start``."""
    keep = events.times < start
    return EventSequence.from_arrays(
        np.concatenate([events.times[keep], np.full(events.dimension, start)]),
        np.concatenate([events.components[keep], np.arange(events.dimension)]),
        horizon=events.horizon,
        dimension=events.dimension,
    )
