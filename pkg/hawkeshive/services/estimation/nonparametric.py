"""
Nonparametric kernel estimation.

Three estimators share the same input, a stationary record:

- ``estimate_conditional_intensity`` smooths event-pair lag densities into
  g^{ij}(t), the conditional intensity of i after an event of j minus Λ^i;
- ``fit_wiener_hopf`` solves g = φ + φ⋆g for φ by Nyström discretization on a
  Gauss–Legendre grid;
- ``fit_contrast`` minimizes the least-squares contrast over piecewise-constant
  kernels, optionally with an L1 penalty.

The last two return piecewise-constant kernels, which may be negative; such
models carry the positive-part transfer function.
"""

from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.ndimage import gaussian_filter1d

from ...core.errors import ConditioningException, InputException
from ...core.metrics import metrics_collector
from ...core.observability import get_logger, log_duration
from ...core.settings import settings
from ...domain.events import EventSequence, iter_pairs
from ...domain.kernels import Kernel, PiecewiseConstantKernel, StabilityReport, ZeroKernel, spectral_radius
from ...domain.model import HawkesModel, Transfer
from ...domain.schemas import GridStyle, QuadratureConfig
from .families import edge_start
from .mle import require_events
from .results import ConditionalIntensityEstimate, EstimationResult

logger = get_logger(__name__)

FINE_BINS = 4096
RECOMMENDED_EVENTS = 1000
# Tail share of an e^{-t/S} decay on [S/2, S]; slower decays switch to the log grid
AUTO_LOG_TAIL_FRACTION = 0.38
DEFAULT_LOG_FLOOR_RATIO = 1e-3
FISTA_MAX_ITER = 5000
FISTA_TOLERANCE = 1e-10


def silverman_bandwidth(centers: np.ndarray, counts: np.ndarray) -> float:
    """0.9 min(sd, IQR/1.34) n^{-1/5} from binned samples."""
    n = float(counts.sum())
    if n < 2:
        return float(centers[-1] - centers[0]) / 100.0
    mean = float(np.sum(centers * counts) / n)
    sd = float(np.sqrt(np.sum(counts * (centers - mean) ** 2) / n))
    cdf = np.cumsum(counts) / n
    q1, q3 = centers[np.searchsorted(cdf, 0.25)], centers[np.searchsorted(cdf, 0.75)]
    spread = min(sd, (q3 - q1) / 1.34) if q3 > q1 else sd
    return float(0.9 * spread * n ** (-0.2))


def _lag_histograms(events: EventSequence, support: float) -> np.ndarray:
    """Pair-lag counts per (target i, source j) on the fine grid of (0, support]."""
    d = events.dimension
    dx = support / FINE_BINS
    counts = np.zeros((FINE_BINS, d, d))
    streams = events.streams()
    for i in range(d):
        for j in range(d):
            for _, _, lags in iter_pairs(streams[j], streams[i], 0.0, support):
                idx = np.minimum((lags / dx).astype(np.int64), FINE_BINS - 1)
                counts[:, i, j] += np.bincount(idx, minlength=FINE_BINS)
    return counts


@log_duration("estimate_conditional_intensity")
def estimate_conditional_intensity(events: EventSequence, cfg: QuadratureConfig) -> ConditionalIntensityEstimate:
    """Kernel density estimate of g^{ij}(t) for t in (0, support].

    The lag density of pairs (source j, target i) is divided by the number of
    sources whose window still covers the lag, N_j (1 − t/T), which gives the
    conditional intensity of i at lag t after an event of j; Λ̂^i = N_i / T is
    subtracted. Smoothing is Gaussian on a fine uniform grid with reflection at
    the boundaries.
    """
    require_events(events)
    if cfg.support >= events.horizon:
        raise InputException("support must be shorter than the record", {"support": cfg.support})
    if len(events) < RECOMMENDED_EVENTS:
        logger.warning("few events for conditional intensity estimation", events=len(events))

    T = events.horizon
    lam = events.counts() / T
    dx = cfg.support / FINE_BINS
    centers = (np.arange(FINE_BINS) + 0.5) * dx
    counts = _lag_histograms(events, cfg.support)
    bandwidth = cfg.bandwidth or silverman_bandwidth(centers, counts.sum(axis=(1, 2)))
    smoothed = gaussian_filter1d(counts, sigma=max(bandwidth / dx, 1e-3), axis=0, mode="reflect")
    sources = events.counts()[None, None, :] * (1.0 - centers / T)[:, None, None]
    values = smoothed / dx / sources - lam[None, :, None]
    logger.debug("conditional intensity estimated", bandwidth=bandwidth, support=cfg.support)
    return ConditionalIntensityEstimate(lags=centers, values=values, bandwidth=bandwidth, mean_intensity=lam)


def _tail_fraction(estimate: ConditionalIntensityEstimate) -> float:
    mass = np.abs(estimate.values).sum(axis=(1, 2))
    total = float(mass.sum())
    if total == 0:
        return 0.0
    half = estimate.lags >= estimate.lags[-1] / 2
    return float(mass[half].sum() / total)


def quadrature_grid(cfg: QuadratureConfig, style: GridStyle) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights on [0, support], linear or logarithmic."""
    S = cfg.support
    if style is GridStyle.LOG:
        floor = cfg.log_floor or S * DEFAULT_LOG_FLOOR_RATIO
        x, wt = np.polynomial.legendre.leggauss(cfg.n_nodes - 1)
        lo, hi = np.log(floor), np.log(S)
        u = lo + (hi - lo) * (x + 1.0) / 2.0
        nodes = np.concatenate([[floor / 2.0], np.exp(u)])
        weights = np.concatenate([[floor], np.exp(u) * wt * (hi - lo) / 2.0])
        return nodes, weights
    x, wt = np.polynomial.legendre.leggauss(cfg.n_nodes)
    return S * (x + 1.0) / 2.0, S * wt / 2.0


def _piecewise_model(mu: np.ndarray, edges: np.ndarray, levels: np.ndarray) -> HawkesModel:
    """Model with kernels levels[:, i, j] on the bins of ``edges``."""
    d = mu.size
    negative = bool(np.any(levels < 0))
    kernels = [
        [
            PiecewiseConstantKernel(tuple(map(float, edges)), tuple(map(float, levels[:, i, j])))
            if np.any(levels[:, i, j] != 0)
            else ZeroKernel()
            for j in range(d)
        ]
        for i in range(d)
    ]
    if np.any(mu < 0):
        logger.warning("negative baseline estimate clipped to zero", mu=mu.tolist())
    transfer = Transfer.POSITIVE_PART if negative else Transfer.IDENTITY
    return HawkesModel.create(np.maximum(mu, 0.0), kernels, transfer)


def _report(model: HawkesModel) -> StabilityReport:
    norms = model.kernels.norm_matrix()
    radius, method = spectral_radius(norms)
    return StabilityReport(norm_matrix=norms, spectral_radius=radius, stable=radius < 1.0, method=method)


def _check_condition(matrix: np.ndarray, hint: str) -> float:
    cond = float(np.linalg.cond(matrix))
    if not np.isfinite(cond) or cond > settings.condition_number_limit:
        raise ConditioningException(f"discretized system is ill-conditioned; {hint}", cond)
    return cond


@log_duration("fit_wiener_hopf")
def fit_wiener_hopf(
    events: EventSequence,
    cfg: QuadratureConfig,
    estimate: Optional[ConditionalIntensityEstimate] = None,
) -> EstimationResult:
    """Solve the Wiener–Hopf system for piecewise-constant kernels.

    Steps: Λ̂ and ĝ from the data (or the given ``estimate``), Gauss–Legendre
    nodes on [0, support], the Nyström system

        g^{ij}(s_k) = φ^{ij}(s_k) + Σ_{l,m} w_l φ^{im}(s_l) g^{mj}(s_k − s_l),

    one dense solve per target component, and μ̂ = (I − ∫φ) Λ̂. The kernel
    φ^{im} is returned as level φ^{im}(s_l) on the l-th bin of [0, Σw], so its
    integral equals the quadrature sum.

    Raises:
        ConditioningException: If cond(I + M) exceeds the configured limit
    """
    require_events(events)
    d = events.dimension
    g = estimate or estimate_conditional_intensity(events, cfg)
    style = cfg.grid
    tail = _tail_fraction(g)
    if style is GridStyle.AUTO:
        style = GridStyle.LOG if tail > AUTO_LOG_TAIL_FRACTION else GridStyle.LINEAR
    nodes, weights = quadrature_grid(cfg, style)
    n = nodes.size

    # G[k, l, m, j] = g^{mj}(s_k − s_l)
    G = g.evaluate(np.subtract.outer(nodes, nodes))
    M = np.einsum("klmj,l->kjlm", G, weights).reshape(n * d, n * d)
    system = np.eye(n * d) + M
    cond = _check_condition(system, "increase the bandwidth or reduce the number of nodes")
    # B[(k, j), i] = g^{ij}(s_k)
    at_nodes = g.evaluate(nodes)
    B = np.transpose(at_nodes, (0, 2, 1)).reshape(n * d, d)
    X = linalg.solve(system, B)
    # X[(l, m), i] = φ^{im}(s_l)
    levels = np.transpose(X.reshape(n, d, d), (0, 2, 1))

    signed = np.einsum("lim,l->im", levels, weights)
    mu = (np.eye(d) - signed) @ g.mean_intensity
    edges = np.concatenate([[0.0], np.cumsum(weights)])
    model = _piecewise_model(mu, edges, levels)
    report = _report(model)
    residual = float(np.max(np.abs(system @ X - B)))
    metrics_collector.record_fit("wiener_hopf", True)
    logger.info(
        "wiener-hopf solved", grid=style.value, nodes=n, condition_number=cond, norm=report.spectral_radius
    )
    return EstimationResult(
        model=model,
        method="wiener_hopf",
        objective_trace=np.array([residual]),
        converged=True,
        iterations=1,
        stability=report,
        parameters={f"mu.{i}": float(m) for i, m in enumerate(model.baseline)},
        at_stability_boundary=report.spectral_radius >= 1.0,
        diagnostics={
            "grid": style.value,
            "tail_fraction": tail,
            "condition_number": cond,
            "bandwidth": g.bandwidth,
            "nodes": nodes,
            "weights": weights,
        },
    )


def _contrast_gram(events: EventSequence, width: float, n_bins: int, start: float) -> np.ndarray:
    """Gram matrix of the features [1, X_{jk}(t)] over [start, T].

    X_{jk}(t) counts events of j with t − t_n in [k w, (k+1) w). The constant
    row is exact; products of counting features ignore the clipping of windows
    at the record edges, an O(support / T) approximation.
    """
    d = events.dimension
    K = n_bins
    size = 1 + d * K
    gram = np.zeros((size, size))
    horizon = events.horizon
    gram[0, 0] = horizon - start
    streams = events.streams()
    k = np.arange(K)
    for j in range(d):
        t = streams[j]
        lo = np.clip(np.add.outer(t, k * width), start, horizon)
        hi = np.clip(np.add.outer(t, (k + 1) * width), start, horizon)
        exposure = np.sum(hi - lo, axis=0)
        gram[0, 1 + j * K : 1 + (j + 1) * K] = exposure
        gram[1 + j * K : 1 + (j + 1) * K, 0] = exposure

    reach = K * width
    for j in range(d):
        for jp in range(d):
            # H[Δ + K] = Σ_{n∈j, n'∈j'} tri(δ − Δ w), δ = t_n − t_{n'}
            H = np.zeros(2 * K + 1)
            for _, _, delta in iter_pairs(streams[jp], streams[j], -reach, reach):
                inside = np.abs(delta) < reach
                delta = delta[inside]
                base = np.floor(delta / width)
                r = delta - base * width
                idx = base.astype(np.int64) + K
                np.add.at(H, idx, width - r)
                np.add.at(H, idx + 1, r)
            shift = k[None, :] - k[:, None]
            gram[1 + j * K : 1 + (j + 1) * K, 1 + jp * K : 1 + (jp + 1) * K] = H[shift + K]
    return gram


def _contrast_targets(events: EventSequence, width: float, n_bins: int, start: float) -> np.ndarray:
    """v_i = Σ_{m ∈ i, t_m ≥ start} [1, X_{jk}(t_m)] with strictly earlier history."""
    d = events.dimension
    K = n_bins
    V = np.zeros((d, 1 + d * K))
    streams = events.streams()
    for i in range(d):
        V[i, 0] = np.sum(streams[i] >= start)
        for j in range(d):
            for _, b_idx, lags in iter_pairs(streams[j], streams[i], 0.0, K * width):
                sel = (streams[i][b_idx] >= start) & (lags < K * width)
                bins = (lags[sel] / width).astype(np.int64)
                V[i, 1 + j * K : 1 + (j + 1) * K] += np.bincount(np.minimum(bins, K - 1), minlength=K)
    return V


def _fista(gram: np.ndarray, v: np.ndarray, scale: float, penalty: float, theta0: np.ndarray):
    """Proximal gradient for (θᵀGθ − 2θᵀv)/scale + penalty ||θ[1:]||₁."""
    lipschitz = 2.0 * float(linalg.eigvalsh(gram)[-1]) / scale
    step = 1.0 / lipschitz
    theta = theta0.copy()
    y = theta.copy()
    t = 1.0
    trace = []
    for iteration in range(1, FISTA_MAX_ITER + 1):
        grad = 2.0 * (gram @ y - v) / scale
        z = y - step * grad
        new = z.copy()
        new[1:] = np.sign(z[1:]) * np.maximum(np.abs(z[1:]) - step * penalty, 0.0)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = new + ((t - 1.0) / t_next) * (new - theta)
        change = float(np.max(np.abs(new - theta)))
        theta, t = new, t_next
        trace.append(float((theta @ gram @ theta - 2.0 * theta @ v) / scale + penalty * np.sum(np.abs(theta[1:]))))
        if change <= FISTA_TOLERANCE * max(1.0, float(np.max(np.abs(theta)))):
            return theta, trace, True, iteration
    return theta, trace, False, FISTA_MAX_ITER


@log_duration("fit_contrast")
def fit_contrast(
    events: EventSequence,
    support: float,
    n_bins: int,
    penalty: float = 0.0,
    start: Optional[float] = None,
) -> EstimationResult:
    """Least-squares contrast over piecewise-constant kernels with uniform bins.

    The contrast Σ_i (∫λ_i² − 2 Σ_{m∈i} λ_i(t_m)) is quadratic in the baseline
    and the kernel levels; without penalty the minimizer solves the normal
    equations G θ_i = v_i, shared Gram matrix G. With ``penalty`` > 0 the kernel
    levels carry an L1 term on the per-unit-time contrast, solved by FISTA.

    Unless ``start`` is given, events within ``support`` of the record start
    are history only.

    Raises:
        ConditioningException: If the Gram matrix is singular or ill-conditioned
    """
    require_events(events)
    if support <= 0 or n_bins < 1:
        raise InputException("contrast basis needs a positive support and at least one bin")
    if penalty < 0:
        raise InputException("penalty must be non-negative", {"penalty": penalty})
    if start is None:
        start = edge_start(events, support)
    d = events.dimension
    width = support / n_bins
    gram = _contrast_gram(events, width, n_bins, start)
    V = _contrast_targets(events, width, n_bins, start)
    cond = _check_condition(gram, "use fewer bins or a longer record")
    scale = events.horizon - start

    traces = []
    converged = True
    iterations = 1
    thetas = np.empty_like(V)
    for i in range(d):
        theta = linalg.solve(gram, V[i], assume_a="sym")
        if penalty > 0:
            theta, trace, ok, its = _fista(gram, V[i], scale, penalty, theta)
            converged &= ok
            iterations = max(iterations, its)
            traces.append(trace)
        else:
            traces.append([float((theta @ gram @ theta - 2.0 * theta @ V[i]) / scale)])
        thetas[i] = theta

    mu = thetas[:, 0]
    # levels[k, i, j]
    levels = np.transpose(thetas[:, 1:].reshape(d, d, n_bins), (2, 0, 1))
    edges = np.linspace(0.0, support, n_bins + 1)
    model = _piecewise_model(mu, edges, levels)
    report = _report(model)
    length = max(len(tr) for tr in traces)
    padded = np.array([tr + [tr[-1]] * (length - len(tr)) for tr in traces])
    if not converged:
        logger.warning("proximal iterations reached the cap", iterations=iterations)
    metrics_collector.record_fit("contrast", converged)
    logger.info("contrast fit finished", bins=n_bins, penalty=penalty, condition_number=cond, norm=report.spectral_radius)
    return EstimationResult(
        model=model,
        method="contrast",
        objective_trace=padded.sum(axis=0),
        converged=converged,
        iterations=iterations,
        stability=report,
        parameters={f"mu.{i}": float(m) for i, m in enumerate(model.baseline)},
        at_stability_boundary=report.spectral_radius >= 1.0,
        diagnostics={"condition_number": cond, "penalty": penalty, "bin_width": width, "start": start},
    )


def kernel_l2_distance(a: Kernel, b: Kernel, support: float, n_points: int = 4096) -> float:
    """L2 distance between two kernels on [0, support], midpoint rule."""
    t = (np.arange(n_points) + 0.5) * support / n_points
    return float(np.sqrt(np.sum((a.value(t) - b.value(t)) ** 2) * support / n_points))
