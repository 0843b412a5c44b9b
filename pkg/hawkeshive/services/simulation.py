"""
Exact sampling of Hawkes event streams.

Three algorithms are provided: Ogata-style thinning (every kernel family through
its non-increasing envelope, marks, positive-part transfer), time change by
inversion of the compensator (exponential families) and the immigrant/offspring
cluster construction (non-negative kernels, optional genealogy). Ensembles run
over a thread pool with one counter-based random stream per path.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..core.errors import ExplosionException, ModelSpecException, UnsupportedFamilyException
from ..core.metrics import metrics_collector
from ..core.observability import get_logger, log_duration
from ..core.rng import make_rng
from ..core.settings import settings
from ..domain.events import EventSequence, Genealogy
from ..domain.kernels import KernelMatrix, spectral_radius
from ..domain.model import HawkesModel, Transfer
from ..domain.schemas import SimConfig, SimulationAlgorithm, TruncationPolicy
from .analytics import CausalityTables

logger = get_logger(__name__)


@dataclass(frozen=True)
class SimulationResult:
    events: EventSequence
    genealogy: Optional[Genealogy] = None


class _EventLog:
    """Growable arrays of accepted events."""

    def __init__(self, dimension: int, marked: bool, capacity: int = 1024):
        self.n = 0
        self.times = np.empty(capacity)
        self.components = np.empty(capacity, dtype=np.int64)
        self.boosts = np.empty((capacity, dimension))
        self.marks = np.empty(capacity) if marked else None

    def append(self, t: float, k: int, boost: np.ndarray, mark: Optional[float]) -> None:
        if self.n == self.times.size:
            grow = self.times.size
            self.times = np.concatenate([self.times, np.empty(grow)])
            self.components = np.concatenate([self.components, np.empty(grow, dtype=np.int64)])
            self.boosts = np.concatenate([self.boosts, np.empty((grow, self.boosts.shape[1]))])
            if self.marks is not None:
                self.marks = np.concatenate([self.marks, np.empty(grow)])
        self.times[self.n] = t
        self.components[self.n] = k
        self.boosts[self.n] = boost
        if self.marks is not None:
            self.marks[self.n] = mark
        self.n += 1


class _ExponentialState:
    """Markov state S_r = Σ_m χ_m e^{-β_r (t - t_m)} per exponential component r."""

    def __init__(self, model: HawkesModel):
        self.mu = model.baseline
        self.d = model.dimension
        self.rows, self.cols, alphas, self.betas = model.kernels.exponential_components()
        self.weights = alphas * self.betas
        self.state = np.zeros(self.rows.size)
        self.t = 0.0

    def advance(self, t: float) -> None:
        self.state *= np.exp(-self.betas * (t - self.t))
        self.t = t

    def intensity(self, t: float) -> np.ndarray:
        self.advance(t)
        return self.mu + np.bincount(self.rows, self.weights * self.state, minlength=self.d)

    def bound(self, t: float) -> float:
        return float(self.intensity(t).sum())

    def add(self, t: float, k: int, boost: np.ndarray) -> None:
        self.advance(t)
        mask = self.cols == k
        self.state[mask] += boost[self.rows[mask]]


class _HistoryState:
    """Direct summation over the (truncated) event history."""

    def __init__(self, model: HawkesModel, log: _EventLog, truncation: TruncationPolicy):
        self.model = model
        self.km = model.kernels
        self.d = model.dimension
        self.log = log
        self.reach = self.km.support() if truncation is TruncationPolicy.SUPPORT else np.inf
        self.positive_part = model.transfer is Transfer.POSITIVE_PART

    def _evaluate(self, t: float, envelope: bool) -> np.ndarray:
        log = self.log
        start = int(np.searchsorted(log.times[: log.n], t - self.reach, side="left")) if log.n else 0
        lags = t - log.times[start : log.n]
        comps = log.components[start : log.n]
        boosts = log.boosts[start : log.n]
        out = self.model.baseline.copy()
        for j in range(self.d):
            sel = comps == j
            if not np.any(sel):
                continue
            lag_j = lags[sel]
            boost_j = boosts[sel]
            for i in range(self.d):
                kernel = self.km[i, j]
                vals = kernel.envelope(lag_j) if envelope else kernel.value(lag_j)
                out[i] += vals @ boost_j[:, i]
        return out

    def intensity(self, t: float) -> np.ndarray:
        linear = self._evaluate(t, envelope=False)
        return np.maximum(linear, 0.0) if self.positive_part else linear

    def bound(self, t: float) -> float:
        return float(self._evaluate(t, envelope=True).sum())

    def add(self, t: float, k: int, boost: np.ndarray) -> None:
        """History lives in the shared event log."""


def _check_explosion(count: int, cap: int) -> None:
    if count > cap:
        raise ExplosionException("simulation exceeded the event cap", count, {"max_events": cap})


def _mark_boost(model: HawkesModel, rng: np.random.Generator, k: int) -> Tuple[np.ndarray, Optional[float]]:
    if model.mark_law is None:
        return np.ones(model.dimension), None
    xi = float(model.mark_law.sample(rng, 1)[0])
    impacts = model.impact_matrix()
    return np.array([float(impacts[i][k](xi)) for i in range(model.dimension)]), xi


def _warn_marked_criticality(model: HawkesModel) -> None:
    if model.is_marked:
        radius, _ = spectral_radius(model.effective_norm_matrix())
        if radius >= 1.0:
            logger.warning("effective branching ratio of the marked model is not below one", spectral_radius=radius)


def _finalize(
    model: HawkesModel, cfg: SimConfig, times: np.ndarray, comps: np.ndarray, marks: Optional[np.ndarray]
) -> EventSequence:
    keep = times >= cfg.burn_in
    return EventSequence.from_arrays(
        times[keep] - cfg.burn_in,
        comps[keep],
        horizon=cfg.horizon,
        dimension=model.dimension,
        marks=None if marks is None else marks[keep],
    )


def simulate_thinning(model: HawkesModel, cfg: SimConfig) -> EventSequence:
    """Thinning with the kernel envelopes as dominating intensity.

    The candidate is drawn from an exponential with the current total bound,
    accepted with probability Σλ/bound and assigned to the first component whose
    cumulative intensity exceeds the uniform draw.
    """
    _warn_marked_criticality(model)
    rng = make_rng(cfg.seed, cfg.stream)
    log = _EventLog(model.dimension, model.is_marked)
    state = (
        _ExponentialState(model)
        if model.kernels.is_exponential
        else _HistoryState(model, log, cfg.truncation)
    )
    total = cfg.burn_in + cfg.horizon
    t = 0.0
    while True:
        bound = state.bound(t)
        if bound <= 0.0:
            break
        t += rng.exponential(1.0 / bound)
        if t > total:
            break
        cum = np.cumsum(state.intensity(t))
        u = rng.random() * bound
        if u < cum[-1]:
            k = int(np.searchsorted(cum, u, side="right"))
            boost, mark = _mark_boost(model, rng, k)
            state.add(t, k, boost)
            log.append(t, k, boost, mark)
            _check_explosion(log.n, cfg.max_events)
    events = _finalize(
        model,
        cfg,
        log.times[: log.n],
        log.components[: log.n],
        None if log.marks is None else log.marks[: log.n],
    )
    metrics_collector.record_simulation(SimulationAlgorithm.THINNING.value, len(events))
    return events


def simulate_marked(model: HawkesModel, cfg: SimConfig) -> EventSequence:
    """Thinning of a marked model; every accepted event carries its mark."""
    if model.mark_law is None:
        raise ModelSpecException("marked simulation requires a mark law")
    return simulate_thinning(model, cfg)


def simulate_time_change(model: HawkesModel, cfg: SimConfig) -> EventSequence:
    """Inversion of the compensator between events for exponential kernels.

    Given the Markov state after the last event, the compensator increment
    μ u + Σ_r (c_r/β_r)(1 − e^{−β_r u}) is matched to a unit exponential draw.
    """
    if not model.kernels.is_exponential:
        raise UnsupportedFamilyException("time change needs exponential or sum-of-exponential kernels")
    if model.transfer is not Transfer.IDENTITY or model.is_marked:
        raise UnsupportedFamilyException("time change supports unmarked linear models only")
    rng = make_rng(cfg.seed, cfg.stream)
    state = _ExponentialState(model)
    mu_total = float(model.baseline.sum())
    total = cfg.burn_in + cfg.horizon
    times: List[float] = []
    comps: List[int] = []
    t = 0.0
    ones = np.ones(model.dimension)
    while True:
        state.advance(t)
        coeffs = state.weights * state.state
        betas = state.betas

        def compensator(u: float) -> float:
            return mu_total * u + float(np.sum(coeffs / betas * -np.expm1(-betas * u)))

        target = rng.exponential()
        remaining = float(np.sum(coeffs / betas))
        if mu_total == 0.0 and target >= remaining:
            break
        if mu_total > 0.0:
            upper = target / mu_total
        else:
            upper = 1.0 / betas.min()
            while compensator(upper) < target:
                upper *= 2.0
        u = optimize.brentq(lambda x: compensator(x) - target, 0.0, upper, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        t += u
        if t > total:
            break
        cum = np.cumsum(state.intensity(t))
        k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        state.add(t, k, ones)
        times.append(t)
        comps.append(k)
        _check_explosion(len(times), cfg.max_events)
    events = _finalize(model, cfg, np.asarray(times), np.asarray(comps, dtype=np.int64), None)
    metrics_collector.record_simulation(SimulationAlgorithm.TIME_CHANGE.value, len(events))
    return events


def grow_clusters(
    kernels: KernelMatrix,
    immigrant_times: np.ndarray,
    immigrant_components: np.ndarray,
    horizon: float,
    rng: np.random.Generator,
    max_events: Optional[int] = None,
    model: Optional[HawkesModel] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """Branch every immigrant into its cluster, generation by generation.

    An event of type j at time s has Poisson(||Φ^{ij}||·χ^{ij}) children of
    type i at times s + lag, lag drawn from Φ^{ij}/||Φ^{ij}||. Children after
    ``horizon`` are discarded together with their descendants.

    Returns unsorted ``(times, components, parent, generation, marks)``.
    """
    cap = max_events or settings.max_events
    d = kernels.dimension
    norms = kernels.norm_matrix()
    marked = model is not None and model.is_marked
    impacts = model.impact_matrix() if marked else None

    def draw_marks(count: int) -> Optional[np.ndarray]:
        if not marked:
            return None
        return model.mark_law.sample(rng, count)  # type: ignore[union-attr]

    times = [np.asarray(immigrant_times, dtype=float)]
    comps = [np.asarray(immigrant_components, dtype=np.int64)]
    parents = [np.full(times[0].size, -1, dtype=np.int64)]
    generations = [np.zeros(times[0].size, dtype=np.int64)]
    marks = [draw_marks(times[0].size)]
    offset = 0
    total = times[0].size
    _check_explosion(total, cap)
    gen = 0
    while times[-1].size:
        cur_t, cur_k, cur_m = times[-1], comps[-1], marks[-1]
        new_t, new_k, new_p = [], [], []
        for i in range(d):
            for j in range(d):
                if norms[i, j] == 0.0:
                    continue
                src = np.flatnonzero(cur_k == j)
                if src.size == 0:
                    continue
                mean = np.full(src.size, norms[i, j])
                if marked:
                    mean = mean * impacts[i][j](cur_m[src])  # type: ignore[index]
                n_children = rng.poisson(mean)
                count = int(n_children.sum())
                if count == 0:
                    continue
                parent_idx = np.repeat(src, n_children)
                child_t = cur_t[parent_idx] + kernels[i, j].sample_lags(rng, count)
                inside = child_t <= horizon
                new_t.append(child_t[inside])
                new_k.append(np.full(int(inside.sum()), i, dtype=np.int64))
                new_p.append(parent_idx[inside] + offset)
        offset += cur_t.size
        gen += 1
        child_times = np.concatenate(new_t) if new_t else np.empty(0)
        times.append(child_times)
        comps.append(np.concatenate(new_k) if new_k else np.empty(0, dtype=np.int64))
        parents.append(np.concatenate(new_p) if new_p else np.empty(0, dtype=np.int64))
        generations.append(np.full(child_times.size, gen, dtype=np.int64))
        marks.append(draw_marks(child_times.size))
        total += child_times.size
        _check_explosion(total, cap)
    all_marks = np.concatenate(marks) if marked else None
    return (
        np.concatenate(times),
        np.concatenate(comps),
        np.concatenate(parents),
        np.concatenate(generations),
        all_marks,
    )


def sort_with_genealogy(
    times: np.ndarray, comps: np.ndarray, parents: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Time-sort order and parent indices remapped into that order."""
    order = np.lexsort((np.arange(times.size), comps, times))
    position = np.empty_like(order)
    position[order] = np.arange(order.size)
    sorted_parents = parents[order]
    remapped = np.where(sorted_parents >= 0, position[np.maximum(sorted_parents, 0)], -1)
    return order, remapped


def _rebase_generations(parent: np.ndarray) -> np.ndarray:
    generation = np.zeros(parent.size, dtype=np.int64)
    for idx in np.flatnonzero(parent >= 0):
        generation[idx] = generation[parent[idx]] + 1
    return generation


def simulate_cluster(model: HawkesModel, cfg: SimConfig) -> Tuple[EventSequence, Genealogy]:
    """Cluster construction: Poisson immigrants plus Galton-Watson offspring.

    Events whose parent falls in the burn-in window become roots of the
    retained window; generations are counted from those roots.
    """
    if model.transfer is not Transfer.IDENTITY or not model.kernels.is_non_negative:
        raise UnsupportedFamilyException("cluster simulation needs a linear model with non-negative kernels")
    radius, _ = spectral_radius(model.effective_norm_matrix())
    if radius >= 1.0:
        raise ExplosionException("cluster simulation of a non-stationary model", 0, {"spectral_radius": radius})
    rng = make_rng(cfg.seed, cfg.stream)
    total = cfg.burn_in + cfg.horizon
    counts = rng.poisson(model.baseline * total)
    imm_k = np.repeat(np.arange(model.dimension), counts)
    imm_t = rng.uniform(0.0, total, size=imm_k.size)
    times, comps, parents, _, marks = grow_clusters(
        model.kernels, imm_t, imm_k, total, rng, cfg.max_events, model
    )
    order, parent = sort_with_genealogy(times, comps, parents)
    times, comps = times[order], comps[order]
    marks = None if marks is None else marks[order]

    keep = times >= cfg.burn_in
    new_index = np.cumsum(keep) - 1
    kept_parent = parent[keep]
    safe = np.maximum(kept_parent, 0)
    kept_parent = np.where((kept_parent >= 0) & keep[safe], new_index[safe], -1)
    genealogy = Genealogy(parent=kept_parent, generation=_rebase_generations(kept_parent))
    events = EventSequence(
        times=times[keep] - cfg.burn_in,
        components=comps[keep],
        horizon=cfg.horizon,
        dimension=model.dimension,
        marks=None if marks is None else marks[keep],
    )
    metrics_collector.record_simulation(SimulationAlgorithm.CLUSTER.value, len(events))
    return events, genealogy


@log_duration("simulate")
def simulate(model: HawkesModel, cfg: SimConfig) -> SimulationResult:
    """Dispatch on the configured algorithm."""
    logger.debug("simulating", algorithm=cfg.algorithm.value, horizon=cfg.horizon, seed=cfg.seed, stream=cfg.stream)
    if cfg.algorithm is SimulationAlgorithm.CLUSTER:
        events, genealogy = simulate_cluster(model, cfg)
        return SimulationResult(events, genealogy)
    if cfg.algorithm is SimulationAlgorithm.TIME_CHANGE:
        return SimulationResult(simulate_time_change(model, cfg))
    return SimulationResult(simulate_thinning(model, cfg))


def simulate_paths(model: HawkesModel, cfg: SimConfig, n_paths: int) -> List[SimulationResult]:
    """Independent paths; path p uses the random stream (seed, p)."""
    configs = [cfg.for_path(p) for p in range(n_paths)]
    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        return list(pool.map(lambda c: simulate(model, c), configs))


def sample_cluster_sizes(model: HawkesModel, n_clusters: int, seed: int, root: int = 0) -> np.ndarray:
    """Total progeny (immigrant included) of ``n_clusters`` independent clusters rooted at ``root``."""
    norms = model.effective_norm_matrix()
    radius, _ = spectral_radius(norms)
    if radius >= 1.0:
        raise ExplosionException("cluster sizes are infinite with positive probability", 0, {"spectral_radius": radius})
    rng = make_rng(seed, 0)
    alive = np.zeros((n_clusters, model.dimension), dtype=np.int64)
    alive[:, root] = 1
    sizes = np.ones(n_clusters, dtype=np.int64)
    while alive.any():
        alive = rng.poisson(alive @ norms.T)
        sizes += alive.sum(axis=1)
        _check_explosion(int(sizes.sum()), settings.max_events)
    return sizes


def genealogy_tables(events: EventSequence, genealogy: Genealogy) -> CausalityTables:
    """Empirical causality rates from a simulated genealogy.

    ``direct[i, j]`` counts type-i events with a type-j parent and
    ``ancestor[i, j]`` type-i offspring whose oldest ancestor is of type j,
    both per unit time.
    """
    genealogy.validate(events)
    d = events.dimension
    comps = events.components
    immigrant = genealogy.is_immigrant
    exogenous = np.bincount(comps[immigrant], minlength=d).astype(float)
    direct = np.zeros((d, d))
    ancestor = np.zeros((d, d))
    children = np.flatnonzero(~immigrant)
    roots = genealogy.roots()
    np.add.at(direct, (comps[children], comps[genealogy.parent[children]]), 1.0)
    np.add.at(ancestor, (comps[children], comps[roots[children]]), 1.0)
    horizon = events.horizon
    return CausalityTables(exogenous=exogenous / horizon, direct=direct / horizon, ancestor=ancestor / horizon)


def ensemble_counts(results: Sequence[SimulationResult]) -> np.ndarray:
    """Per-path component counts, shape (n_paths, D)."""
    return np.stack([r.events.counts() for r in results])
