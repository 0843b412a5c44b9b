"""
Prometheus metrics for simulation and estimation runs.

Metrics live in a private registry so that library users embedding hawkeshive in
a larger process do not collide with their own collectors. The CLI writes the
text exposition to a file when ``--metrics-file`` is given.
"""

from pathlib import Path
from typing import Union

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest

from .observability import get_logger
from .settings import settings

logger = get_logger(__name__)

registry = CollectorRegistry()

events_simulated_total = Counter(
    "hawkeshive_events_simulated_total",
    "Total number of simulated events",
    ["algorithm"],
    registry=registry,
)

fits_total = Counter(
    "hawkeshive_fits_total",
    "Total number of estimation runs",
    ["method", "status"],
    registry=registry,
)

operation_duration_seconds = Histogram(
    "hawkeshive_operation_duration_seconds",
    "Wall time of numerical operations",
    ["operation"],
    buckets=[0.001, 0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 60.0, 300.0],
    registry=registry,
)


class MetricsCollector:
    """Centralized metrics collection for library operations."""

    def __init__(self) -> None:
        self.enabled = settings.metrics_enabled

    def record_simulation(self, algorithm: str, n_events: int) -> None:
        """Record the number of events produced by a simulation."""
        if not self.enabled:
            return
        events_simulated_total.labels(algorithm=algorithm).inc(n_events)

    def record_fit(self, method: str, converged: bool) -> None:
        """Record the outcome of an estimation run."""
        if not self.enabled:
            return
        fits_total.labels(method=method, status="converged" if converged else "not_converged").inc()

    def record_duration(self, operation: str, seconds: float) -> None:
        """Record the wall time of an operation."""
        if not self.enabled:
            return
        operation_duration_seconds.labels(operation=operation).observe(seconds)

    def write(self, path: Union[str, Path]) -> None:
        """Write the text exposition of the registry."""
        Path(path).write_bytes(generate_latest(registry))
        logger.info("metrics written", path=str(path))


metrics_collector = MetricsCollector()
