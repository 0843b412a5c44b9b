"""
Structured logging for the toolkit.

This module sets up structlog with contextual information (service name and the
run identifier bound by the CLI) and provides a timing decorator for long
numerical operations.
"""

import logging
import sys
import time
from contextvars import ContextVar
from functools import wraps
from typing import Any, Callable, Dict, Optional, TypeVar, cast

import structlog

from .settings import settings

# Context variable for run tracking
run_id_var: ContextVar[Optional[str]] = ContextVar("run_id", default=None)

F = TypeVar("F", bound=Callable[..., Any])


def setup_structured_logging(level: Optional[str] = None, json: Optional[bool] = None) -> None:
    """Configure structured logging with contextual information."""
    level_name = (level or settings.LOG_LEVEL).upper()
    render_json = settings.LOG_JSON if json is None else json

    def add_context(logger: logging.Logger, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
        """Add contextual information to log entries."""
        if run_id := run_id_var.get():
            event_dict["run_id"] = run_id
        event_dict["service"] = settings.APP_NAME.lower()
        return event_dict

    renderer: Any = (
        structlog.processors.JSONRenderer() if render_json else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            add_context,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    # Diagnostics go to stderr so command output on stdout stays machine readable
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.INFO))


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


def log_duration(operation: Optional[str] = None) -> Callable[[F], F]:
    """Decorator logging the wall time of a call and recording it as a metric."""

    def decorator(func: F) -> F:
        name = operation or func.__name__
        logger = get_logger(func.__module__)

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            from .metrics import metrics_collector

            start = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start
                metrics_collector.record_duration(name, elapsed)
                logger.debug("operation finished", operation=name, seconds=round(elapsed, 6))

        return cast(F, wrapper)

    return decorator
