"""
Hawkes impact model: mean price displacement caused by a meta-order.

Component 0 moves the price up and component 1 moves it down. Each side is
excited by the other through the mean-reversion kernel φs. The meta-order
trading at rate r(t) adds f(r(t)) directly to the up intensity and
(C φs/||φs||) ⋆ f(r) to the down intensity, so the contrarian reaction has
norm C whatever the norm of φs.

In the cluster representation the meta-order only contributes extra
immigrants, and the clusters they spawn are independent of the baseline
clusters. The price with the meta-order therefore equals the baseline price
plus the price of the meta-order clusters, path by path, and the impact is
estimated from those clusters alone.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ...adapters.spec_io import parse_kernel
from ...core.errors import InputException, ModelSpecException
from ...core.metrics import metrics_collector
from ...core.observability import get_logger, log_duration
from ...core.rng import make_rng
from ...core.settings import settings
from ...domain.kernels import Kernel, ZeroKernel
from ...domain.model import HawkesModel
from ...domain.schemas import HimConfig, MetaOrderProfile
from ..analytics import require_stable
from ..simulation import grow_clusters

logger = get_logger(__name__)

DEFAULT_GRID_POINTS = 201
META_STREAM = 1
BASELINE_STREAM = 0


@dataclass(frozen=True)
class ImpactCurve:
    """Ensemble mean of the meta-order price displacement, in ticks, with its standard error.

    ``baseline`` holds the mean price of the paths without meta-order when it
    was requested; it is zero in expectation for a symmetric model.
    """

    grid: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_paths: int
    execution_horizon: float
    baseline: Optional[np.ndarray] = None

    @property
    def final(self) -> Tuple[float, float]:
        return float(self.mean[-1]), float(self.stderr[-1])


def him_model(cfg: HimConfig) -> Tuple[HawkesModel, Kernel]:
    """Bivariate mean-reverting model of the up and down price moves, and its kernel φs."""
    kernel = parse_kernel(cfg.kernel)
    if kernel.l1_norm() == 0.0 and cfg.contrarian_ratio > 0:
        raise ModelSpecException("contrarian channel needs a non-zero mean-reversion kernel")
    return HawkesModel.create([cfg.mu, cfg.mu], [[ZeroKernel(), kernel], [kernel, ZeroKernel()]]), kernel


def _impact_rates(cfg: HimConfig, meta: MetaOrderProfile) -> np.ndarray:
    rates = np.asarray(meta.rates, dtype=float)
    return cfg.impact_scale * rates**cfg.impact_exponent


def _meta_immigrants(
    cfg: HimConfig, meta: MetaOrderProfile, kernel: Kernel, horizon: float, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Immigrants of both channels driven by the trading schedule."""
    edges = np.asarray(meta.breakpoints, dtype=float)
    widths = np.diff(edges)
    mass = _impact_rates(cfg, meta) * widths

    counts = rng.poisson(mass)
    up = rng.uniform(np.repeat(edges[:-1], counts), np.repeat(edges[1:], counts))

    down = np.empty(0)
    total = float(mass.sum())
    if cfg.contrarian_ratio > 0 and total > 0:
        # (C φs/||φs||) ⋆ f(r): a uniform point of f(r) plus a lag drawn from φs/||φs||
        n = int(rng.poisson(cfg.contrarian_ratio * total))
        segment = rng.choice(mass.size, size=n, p=mass / total)
        down = rng.uniform(edges[segment], edges[segment + 1]) + kernel.sample_lags(rng, n)
        down = down[down <= horizon]
    up = up[up <= horizon]
    times = np.concatenate([up, down])
    comps = np.concatenate([np.zeros(up.size, dtype=np.int64), np.ones(down.size, dtype=np.int64)])
    return times, comps


def _price_on_grid(times: np.ndarray, comps: np.ndarray, grid: np.ndarray) -> np.ndarray:
    up = np.sort(times[comps == 0])
    down = np.sort(times[comps == 1])
    return (np.searchsorted(up, grid, side="right") - np.searchsorted(down, grid, side="right")).astype(float)


@log_duration("him_impact_curve")
def him_impact_curve(
    cfg: HimConfig,
    meta: MetaOrderProfile,
    n_paths: int,
    seed: int,
    horizon: float,
    grid: Optional[Sequence[float]] = None,
    include_baseline: bool = False,
) -> ImpactCurve:
    """Monte Carlo impact curve of a meta-order.

    Path p draws the meta-order clusters from the stream (seed, p, 1) and,
    when ``include_baseline`` is set, the baseline clusters from (seed, p, 0).

    Args:
        cfg: Mean-reversion kernel, baseline, contrarian ratio and impact function
        meta: Trading schedule; zero after its execution horizon
        n_paths: Number of Monte Carlo paths
        seed: Master seed
        horizon: End of the observation window
        grid: Times at which the price is read; 201 points on [0, horizon] by default
        include_baseline: Also simulate the paths without meta-order and report their mean

    Returns:
        ImpactCurve: mean displacement in ticks and its standard error

    Raises:
        StabilityException: If ||φs|| >= 1
    """
    if n_paths < 2:
        raise InputException("impact curve needs at least two paths", {"n_paths": n_paths})
    model, kernel = him_model(cfg)
    require_stable(model)
    times_grid = np.linspace(0.0, horizon, DEFAULT_GRID_POINTS) if grid is None else np.asarray(grid, dtype=float)
    if times_grid.size == 0 or times_grid.min() < 0 or times_grid.max() > horizon:
        raise InputException("impact grid must lie in [0, horizon]")
    if meta.execution_horizon > horizon:
        logger.warning("execution continues after the observation window", execution_horizon=meta.execution_horizon)

    def one_path(path: int) -> Tuple[np.ndarray, Optional[np.ndarray], int]:
        rng = make_rng(seed, path, META_STREAM)
        imm_t, imm_k = _meta_immigrants(cfg, meta, kernel, horizon, rng)
        t, k, _, _, _ = grow_clusters(model.kernels, imm_t, imm_k, horizon, rng)
        n_events = t.size
        base = None
        if include_baseline:
            rng0 = make_rng(seed, path, BASELINE_STREAM)
            counts = rng0.poisson(model.baseline * horizon)
            b_k = np.repeat(np.arange(2), counts)
            b_t = rng0.uniform(0.0, horizon, size=b_k.size)
            bt, bk, _, _, _ = grow_clusters(model.kernels, b_t, b_k, horizon, rng0)
            base = _price_on_grid(bt, bk, times_grid)
            n_events += bt.size
        return _price_on_grid(t, k, times_grid), base, n_events

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        results = list(pool.map(one_path, range(n_paths)))

    prices = np.stack([r[0] for r in results])
    metrics_collector.record_simulation("him", sum(r[2] for r in results))
    mean = prices.mean(axis=0)
    stderr = prices.std(axis=0, ddof=1) / np.sqrt(n_paths)
    baseline = np.stack([r[1] for r in results]).mean(axis=0) if include_baseline else None
    logger.info(
        "impact curve",
        n_paths=n_paths,
        final=float(mean[-1]),
        final_stderr=float(stderr[-1]),
        contrarian_ratio=cfg.contrarian_ratio,
    )
    return ImpactCurve(
        grid=times_grid,
        mean=mean,
        stderr=stderr,
        n_paths=n_paths,
        execution_horizon=meta.execution_horizon,
        baseline=baseline,
    )
