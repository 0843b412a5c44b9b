"""
Click commands of the ``hawkeshive`` CLI.

Every command writes its artifacts into ``--out-dir`` together with a
``<command>.manifest.json`` run manifest. Diagnostics go to stderr through
structlog; exit codes are assigned in ``hawkeshive.main``.
"""

import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import yaml
from pydantic import ValidationError

from ..adapters.ingest import ingest as ingest_events
from ..adapters.ingest import read_events
from ..adapters.spec_io import read_model, write_model
from ..adapters.tables import (
    write_curve,
    write_diagnostics,
    write_events,
    write_genealogy,
    write_matrix,
    write_table,
    write_vector,
)
from ..core.errors import ConfigurationException, UsageException
from ..core.metrics import metrics_collector
from ..core.observability import get_logger, run_id_var, setup_structured_logging
from ..domain.schemas import (
    GridStyle,
    HimConfig,
    IngestConfig,
    InputFormat,
    MetaOrderProfile,
    QuadratureConfig,
    SimConfig,
    SimulationAlgorithm,
    TiePolicy,
    TruncationPolicy,
)
from ..services import analytics
from ..services.estimation import (
    fit_contrast,
    fit_em_nonparametric,
    fit_em_parametric,
    fit_mle,
    fit_moments,
    fit_wiener_hopf,
    goodness_of_fit,
)
from ..services.estimation.results import EstimationResult
from ..services.finance import (
    epps_covariation,
    him_impact_curve,
    path_from_events,
    reflexivity_report,
    signature_from_model,
    signature_plot,
)
from ..services.finance.reflexivity import ALL_METHODS, ReflexivityMethod
from ..services.simulation import ensemble_counts, simulate_paths
from .manifest import build_manifest, write_manifest

logger = get_logger(__name__)

FIT_METHODS = ("mle", "em", "em_nonparametric", "moments", "wiener_hopf", "contrast")
NONPARAMETRIC_METHODS = ("em_nonparametric", "wiener_hopf", "contrast")


@dataclass
class RunContext:
    out_dir: Path
    metrics_file: Optional[Path] = None

    def output(self, name: str) -> Path:
        return self.out_dir / name

    def finish(
        self,
        command: str,
        config: Dict[str, Any],
        outputs: Sequence[Path],
        inputs: Sequence[Path] = (),
        seed: Optional[int] = None,
    ) -> None:
        manifest = build_manifest(command, config, inputs, outputs, seed)
        write_manifest(manifest, self.output(f"{command}.manifest.json"), config)
        for path in outputs:
            click.echo(str(path))


def _parse_floats(text: str, option: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageException(f"{option} expects comma-separated numbers, got {text!r}") from exc


def _tau_grid(taus: Optional[str], tau_range: Optional[Tuple[float, float, int]]) -> np.ndarray:
    if (taus is None) == (tau_range is None):
        raise UsageException("give exactly one of --taus and --tau-range")
    if taus is not None:
        return np.asarray(_parse_floats(taus, "--taus"))
    lo, hi, n = tau_range  # type: ignore[misc]
    if not (0 < lo < hi) or n < 2:
        raise UsageException("--tau-range needs 0 < MIN < MAX and at least two points")
    return np.geomspace(lo, hi, int(n))


def _pair(text: str, option: str) -> Tuple[int, int]:
    try:
        up, down = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageException(f"{option} expects UP,DOWN component indices, got {text!r}") from exc
    return up, down


def _config(ctx: click.Context) -> Dict[str, Any]:
    return {k: v for k, v in sorted(ctx.params.items())}


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--log-level", default=None, help="Log level (DEBUG, INFO, WARNING, ERROR).")
@click.option("--log-json/--no-log-json", default=None, help="Render logs as JSON lines.")
@click.option(
    "--metrics-file",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write Prometheus text exposition of the run to this file.",
)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory receiving every artifact of the run.",
)
@click.pass_context
def cli(
    ctx: click.Context,
    log_level: Optional[str],
    log_json: Optional[bool],
    metrics_file: Optional[Path],
    out_dir: Path,
) -> None:
    """Simulate, estimate and analyze multivariate Hawkes processes."""
    setup_structured_logging(log_level, log_json)
    run_id_var.set(uuid.uuid4().hex[:12])
    out_dir.mkdir(parents=True, exist_ok=True)
    if metrics_file is not None:
        metrics_collector.enabled = True
        ctx.call_on_close(lambda: metrics_collector.write(metrics_file))
    ctx.obj = RunContext(out_dir=out_dir, metrics_file=metrics_file)


@cli.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice([f.value for f in InputFormat]), default="csv", show_default=True)
@click.option("--time-scale", type=float, default=1.0, show_default=True, help="Multiplier to seconds.")
@click.option("--component", "labels", multiple=True, help="Component label, in index order; repeat per component.")
@click.option("--tie-policy", type=click.Choice([p.value for p in TiePolicy]), default="stable", show_default=True)
@click.option("--jitter", type=float, default=0.0, help="Jitter half-width for the jitter tie policy.")
@click.option("--resolution", type=float, default=None, help="Clock resolution of the input.")
@click.option("--session", type=(float, float), default=None, help="Kept window START END, in seconds.")
@click.option("--dejitter", is_flag=True, help="Spread events sharing a resolution bin evenly.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--horizon", type=float, default=None, help="Record length; last event time by default.")
@click.option("--output", default="events.csv", show_default=True)
@click.pass_context
def ingest(ctx: click.Context, source: Path, fmt: str, labels: Tuple[str, ...], **options: Any) -> None:
    """Validate and normalize a raw event file into the canonical events CSV."""
    run: RunContext = ctx.obj
    output = options.pop("output")
    try:
        cfg = IngestConfig(
            path=str(source),
            format=fmt,
            component_map={label: k for k, label in enumerate(labels)} if labels else None,
            jitter_amplitude=options.pop("jitter"),
            **options,
        )
    except ValidationError as exc:
        raise ConfigurationException("invalid ingestion options", {"errors": exc.errors()}) from exc
    result = ingest_events(cfg)
    events_path = write_events(result.events, run.output(output))
    report = result.report
    rows = [(reason, count) for reason, count in sorted(report.dropped.items())]
    rows += [("tied", report.tied), ("jittered", report.jittered), ("dejittered", report.dejittered)]
    report_path = write_table(
        run.output("ingest_report.csv"),
        ["item", "count"],
        rows,
        {"rows_read": report.rows_read, "events": len(result.events)},
    )
    run.finish("ingest", _config(ctx), [events_path, report_path], [source], cfg.seed)


@cli.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--horizon", type=float, required=True)
@click.option("--burn-in", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--algorithm", type=click.Choice([a.value for a in SimulationAlgorithm]), default="thinning", show_default=True
)
@click.option(
    "--truncation", type=click.Choice([t.value for t in TruncationPolicy]), default="support", show_default=True
)
@click.option("--paths", type=int, default=1, show_default=True)
@click.option("--genealogy", is_flag=True, help="Also write the parent of every event (cluster algorithm).")
@click.pass_context
def simulate(
    ctx: click.Context,
    model_path: Path,
    horizon: float,
    burn_in: float,
    seed: int,
    algorithm: str,
    truncation: str,
    paths: int,
    genealogy: bool,
) -> None:
    """Simulate a model spec into events CSV files."""
    run: RunContext = ctx.obj
    if genealogy and algorithm != SimulationAlgorithm.CLUSTER.value:
        raise UsageException("--genealogy needs --algorithm cluster")
    if paths < 1:
        raise UsageException("--paths must be at least 1")
    model = read_model(model_path)
    try:
        cfg = SimConfig(seed=seed, horizon=horizon, burn_in=burn_in, algorithm=algorithm, truncation=truncation)
    except ValidationError as exc:
        raise ConfigurationException("invalid simulation options", {"errors": exc.errors()}) from exc
    outputs = []
    results = simulate_paths(model, cfg, paths)
    for p, result in enumerate(results):
        suffix = "" if paths == 1 else f"_{p}"
        outputs.append(write_events(result.events, run.output(f"events{suffix}.csv")))
        if genealogy and result.genealogy is not None:
            outputs.append(write_genealogy(result.genealogy, run.output(f"genealogy{suffix}.csv")))
    if paths > 1:
        counts = ensemble_counts(results)
        rows = ((p, i, counts[p, i]) for p in range(counts.shape[0]) for i in range(counts.shape[1]))
        outputs.append(write_table(run.output("counts.csv"), ["path", "component", "count"], rows))
    run.finish("simulate", _config(ctx), outputs, [model_path], seed)


def _run_fit(
    events,
    method: str,
    family: str,
    shared_beta: bool,
    start: Optional[float],
    max_iter: Optional[int],
    support: Optional[float],
    nodes: int,
    grid: str,
    bins: int,
    penalty: float,
    tau: Optional[float],
) -> EstimationResult:
    if method in NONPARAMETRIC_METHODS and support is None:
        raise UsageException(f"method {method} needs --support")
    if method in ("em", "moments") and family != "exponential":
        raise UsageException(f"method {method} fits the exponential family only")
    if method == "mle":
        kwargs = {"max_iter": max_iter} if max_iter else {}
        return fit_mle(events, family, start=start, shared_beta=shared_beta, **kwargs)
    if method == "em":
        kwargs = {"max_iter": max_iter} if max_iter else {}
        return fit_em_parametric(events, start=start, shared_beta=shared_beta, **kwargs)
    if method == "em_nonparametric":
        kwargs = {"max_iter": max_iter} if max_iter else {}
        return fit_em_nonparametric(events, np.linspace(0.0, support, bins + 1), penalty, start=start, **kwargs)
    if method == "moments":
        return fit_moments(events, family, tau=tau, start=start or 0.0)
    if method == "wiener_hopf":
        cfg = QuadratureConfig(n_nodes=nodes, support=support, grid=GridStyle(grid))
        return fit_wiener_hopf(events, cfg)
    return fit_contrast(events, support, bins, penalty, start)  # type: ignore[arg-type]


@cli.command()
@click.argument("events_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--method", type=click.Choice(FIT_METHODS), default="mle", show_default=True)
@click.option("--family", type=click.Choice(["exponential", "power_law"]), default="exponential", show_default=True)
@click.option("--shared-beta", is_flag=True, help="One decay rate for every exponential entry.")
@click.option(
    "--start",
    type=float,
    default=None,
    help="Events before START only feed history; one kernel support (or --support) by default.",
)
@click.option("--max-iter", type=int, default=None)
@click.option("--support", type=float, default=None, help="Kernel support of nonparametric methods.")
@click.option("--nodes", type=int, default=64, show_default=True, help="Wiener-Hopf quadrature nodes.")
@click.option("--grid", type=click.Choice([g.value for g in GridStyle]), default="auto", show_default=True)
@click.option("--bins", type=int, default=20, show_default=True, help="Histogram bins of EM and contrast.")
@click.option("--penalty", type=float, default=0.0, show_default=True)
@click.option("--tau", type=float, default=None, help="Bin width of the moment fit.")
@click.pass_context
def fit(ctx: click.Context, events_path: Path, **options: Any) -> None:
    """Estimate a model from events; writes the fitted spec, parameters and iteration diagnostics."""
    run: RunContext = ctx.obj
    events = read_events(str(events_path))
    result = _run_fit(events, **options)
    model_path = run.output("fitted.model")
    write_model(result.model, model_path)
    errors = result.standard_errors or {}
    meta = {
        "method": result.method,
        "converged": result.converged,
        "iterations": result.iterations,
        "branching_ratio": result.branching_ratio,
        "at_stability_boundary": result.at_stability_boundary,
    }
    if "start" in result.diagnostics:
        meta["start"] = result.diagnostics["start"]
    params_path = write_table(
        run.output("parameters.csv"),
        ["name", "value", "stderr"],
        ((name, value, errors.get(name, "")) for name, value in result.parameters.items()),
        meta,
    )
    diag_path = write_diagnostics(run.output("diagnostics.csv"), result.objective_trace, result.gradient_norms)
    run.finish("fit", _config(ctx), [model_path, params_path, diag_path], [events_path])


@cli.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--max-lag", type=float, default=10.0, show_default=True, help="Largest lag of the covariance table.")
@click.option("--n-lags", type=int, default=101, show_default=True)
@click.pass_context
def stats(ctx: click.Context, model_path: Path, max_lag: float, n_lags: int) -> None:
    """Mean intensity, covariance density, causality and diffusion tables of a model."""
    run: RunContext = ctx.obj
    model = read_model(model_path)
    summary = analytics.summarize(model)
    outputs = [
        write_vector(run.output("mean_intensity.csv"), summary.mean_intensity, "mean_intensity"),
        write_matrix(run.output("resolvent_norms.csv"), summary.resolvent_norms),
        write_vector(run.output("causality_exogenous.csv"), summary.causality.exogenous, "rate"),
        write_matrix(run.output("causality_direct.csv"), summary.causality.direct, "rate"),
        write_matrix(run.output("causality_ancestor.csv"), summary.causality.ancestor, "rate"),
        write_matrix(run.output("diffusion.csv"), summary.diffusion),
        write_matrix(run.output("count_covariance.csv"), analytics.asymptotic_count_covariance(model)),
    ]
    lags = np.linspace(0.0, max_lag, n_lags)
    cov = analytics.correlation_time_domain(model, lags)
    d = model.dimension
    atoms = {f"atom.{i}": float(a) for i, a in enumerate(cov.atoms)}
    if cov.values is not None:
        rows = ((t, i, j, cov.values[k, i, j]) for k, t in enumerate(lags) for i in range(d) for j in range(d))
        outputs.append(
            write_table(run.output("covariance.csv"), ["lag", "i", "j", "value"], rows, {"method": cov.method, **atoms})
        )
    else:
        lap = cov.laplace_values
        rows = (
            (w, i, j, lap[k, i, j].real, lap[k, i, j].imag)  # type: ignore[index]
            for k, w in enumerate(cov.frequencies)  # type: ignore[arg-type]
            for i in range(d)
            for j in range(d)
        )
        outputs.append(
            write_table(
                run.output("covariance_laplace.csv"),
                ["omega", "i", "j", "real", "imag"],
                rows,
                {"method": cov.method, **atoms},
            )
        )
    run.finish("stats", _config(ctx), outputs, [model_path])


@cli.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("events_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--start", type=float, default=0.0, show_default=True)
@click.pass_context
def gof(ctx: click.Context, model_path: Path, events_path: Path, start: float) -> None:
    """Time-change residuals and Kolmogorov-Smirnov tests of a model against events."""
    run: RunContext = ctx.obj
    model = read_model(model_path)
    events = read_events(str(events_path))
    result = goodness_of_fit(model, events, start)
    residual_rows = ((c.component, x) for c in result.components for x in result.residuals[c.component])
    residuals_path = write_table(run.output("residuals.csv"), ["component", "residual"], residual_rows)
    rows: List[Tuple[Any, ...]] = [
        (c.component, c.n_residuals, c.ks_statistic, c.p_value, c.skipped) for c in result.components
    ]
    rows.append(("pooled", sum(c.n_residuals for c in result.components), result.pooled_statistic, result.pooled_p_value, False))
    ks_path = write_table(run.output("gof.csv"), ["component", "n", "statistic", "p_value", "skipped"], rows)
    run.finish("gof", _config(ctx), [residuals_path, ks_path], [model_path, events_path])


@cli.command()
@click.argument("events_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--method",
    "methods",
    type=click.Choice([m.value for m in ReflexivityMethod]),
    multiple=True,
    help="Estimator to run; repeat for several. All by default.",
)
@click.option("--windows", type=int, default=1000, show_default=True, help="Windows of the variance ratio.")
@click.pass_context
def reflexivity(ctx: click.Context, events_path: Path, methods: Tuple[str, ...], windows: int) -> None:
    """Branching ratio estimates of a univariate stream, side by side."""
    run: RunContext = ctx.obj
    events = read_events(str(events_path))
    report = reflexivity_report(events, methods or ALL_METHODS, windows)
    rows = ((r.method.value, r.estimate, r.lower, r.upper, r.note) for r in report.rows)
    path = write_table(
        run.output("reflexivity.csv"),
        ["method", "estimate", "lower", "upper", "note"],
        rows,
        {"threshold": report.threshold, "near_critical": report.near_critical},
    )
    run.finish("reflexivity", _config(ctx), [path], [events_path])


_TAU_OPTIONS = [
    click.option("--taus", default=None, help="Comma-separated sampling scales."),
    click.option("--tau-range", type=(float, float, int), default=None, help="MIN MAX N log-spaced scales."),
]


def _with_taus(func):
    for option in reversed(_TAU_OPTIONS):
        func = option(func)
    return func


@cli.command()
@click.argument("events_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--price", default="0,1", show_default=True, help="UP,DOWN components of the price.")
@click.option("--tick", type=float, default=1.0, show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="Also write the expected curve of this model.")
@_with_taus
@click.pass_context
def signature(
    ctx: click.Context,
    events_path: Path,
    price: str,
    tick: float,
    model_path: Optional[Path],
    taus: Optional[str],
    tau_range: Optional[Tuple[float, float, int]],
) -> None:
    """Signature plot of the price built from two components."""
    run: RunContext = ctx.obj
    grid = _tau_grid(taus, tau_range)
    up, down = _pair(price, "--price")
    events = read_events(str(events_path))
    curve = signature_plot(path_from_events(events, up, down, tick=tick), grid, events.horizon)
    outputs = [write_curve(run.output("signature.csv"), curve.taus, curve.values, curve.stderr, grid_name="tau")]
    inputs = [events_path]
    if model_path is not None:
        expected = signature_from_model(read_model(model_path), grid, up, down, tick)
        outputs.append(write_curve(run.output("signature_model.csv"), expected.taus, expected.values, grid_name="tau"))
        inputs.append(model_path)
    run.finish("signature", _config(ctx), outputs, inputs)


@cli.command()
@click.argument("events_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--first", default="0,1", show_default=True, help="UP,DOWN components of the first price.")
@click.option("--second", default="2,3", show_default=True, help="UP,DOWN components of the second price.")
@click.option("--tick", type=float, default=1.0, show_default=True)
@_with_taus
@click.pass_context
def epps(
    ctx: click.Context,
    events_path: Path,
    first: str,
    second: str,
    tick: float,
    taus: Optional[str],
    tau_range: Optional[Tuple[float, float, int]],
) -> None:
    """Covariation of two prices as a function of the sampling scale."""
    run: RunContext = ctx.obj
    grid = _tau_grid(taus, tau_range)
    events = read_events(str(events_path))
    a = path_from_events(events, *_pair(first, "--first"), tick=tick)
    b = path_from_events(events, *_pair(second, "--second"), tick=tick)
    curve = epps_covariation(a, b, grid, events.horizon)
    path = write_table(
        run.output("epps.csv"),
        ["tau", "covariation", "stderr", "correlation"],
        zip(curve.taus, curve.covariation, curve.stderr, curve.correlation),  # type: ignore[arg-type]
    )
    run.finish("epps", _config(ctx), [path], [events_path])


def _load_impact_config(path: Path) -> Tuple[HimConfig, MetaOrderProfile, Dict[str, Any]]:
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationException(f"invalid YAML in {path}") from exc
    if not isinstance(raw, dict) or "model" not in raw or "meta_order" not in raw:
        raise ConfigurationException("impact config needs 'model' and 'meta_order' sections")
    meta_raw = dict(raw["meta_order"])
    try:
        cfg = HimConfig(**raw["model"])
        if "rate" in meta_raw:
            meta = MetaOrderProfile.constant(float(meta_raw["rate"]), float(meta_raw["duration"]))
        else:
            meta = MetaOrderProfile(**meta_raw)
    except (ValidationError, KeyError, TypeError) as exc:
        raise ConfigurationException("invalid impact config", {"error": str(exc)}) from exc
    return cfg, meta, dict(raw.get("run", {}))


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--paths", type=int, default=None, help="Monte Carlo paths; overrides run.paths.")
@click.option("--seed", type=int, default=None, help="Master seed; overrides run.seed.")
@click.option("--horizon", type=float, default=None, help="Observation window; overrides run.horizon.")
@click.option("--points", type=int, default=201, show_default=True, help="Grid points on [0, horizon].")
@click.option("--with-baseline", is_flag=True, help="Also report the mean price without meta-order.")
@click.pass_context
def impact(
    ctx: click.Context,
    config_path: Path,
    paths: Optional[int],
    seed: Optional[int],
    horizon: Optional[float],
    points: int,
    with_baseline: bool,
) -> None:
    """Meta-order impact curve of the Hawkes impact model from a YAML config.

    The config has a ``model`` section (kernel, mu, contrarian_ratio,
    impact_scale, impact_exponent), a ``meta_order`` section (either rate and
    duration, or breakpoints and rates) and an optional ``run`` section (paths,
    seed, horizon).
    """
    run: RunContext = ctx.obj
    cfg, meta, run_cfg = _load_impact_config(config_path)
    n_paths = paths if paths is not None else int(run_cfg.get("paths", 1000))
    master_seed = seed if seed is not None else int(run_cfg.get("seed", 0))
    window = horizon if horizon is not None else float(run_cfg.get("horizon", 4.0 * meta.execution_horizon))
    grid = np.linspace(0.0, window, points)
    curve = him_impact_curve(cfg, meta, n_paths, master_seed, window, grid, include_baseline=with_baseline)
    metadata = {"execution_horizon": curve.execution_horizon, "n_paths": curve.n_paths}
    outputs = [write_curve(run.output("impact.csv"), curve.grid, curve.mean, curve.stderr, metadata)]
    if curve.baseline is not None:
        outputs.append(write_curve(run.output("impact_baseline.csv"), curve.grid, curve.baseline))
    config = {**_config(ctx), "model": cfg.model_dump(), "meta_order": meta.model_dump(), "resolved_paths": n_paths,
              "resolved_horizon": window}
    run.finish("impact", config, outputs, [config_path], master_seed)
