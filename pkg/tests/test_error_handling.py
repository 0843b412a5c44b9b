"""
Tests for the exception hierarchy, exit codes, settings and metrics.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from hawkeshive.core import errors
from hawkeshive.core.errors import (
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_USAGE,
    ConditioningException,
    ConfigurationException,
    ExplosionException,
    HawkesHiveException,
    MalformedRowException,
    NearCriticalityException,
    StabilityException,
    UnknownComponentException,
    UsageException,
    exit_code_for,
    handle_cli_exception,
)
from hawkeshive.core.metrics import metrics_collector
from hawkeshive.core.observability import log_duration
from hawkeshive.core.rng import make_rng
from hawkeshive.core.settings import Settings


@pytest.mark.parametrize(
    "exc, code",
    [
        (UsageException("x"), EXIT_USAGE),
        (ConfigurationException("x"), EXIT_USAGE),
        (MalformedRowException("x", 4), EXIT_DATA),
        (UnknownComponentException("x"), EXIT_DATA),
        (StabilityException("x", 1.2), EXIT_NUMERICAL),
        (NearCriticalityException("x", 0.9999999), EXIT_NUMERICAL),
        (ExplosionException("x", 10), EXIT_NUMERICAL),
        (ZeroDivisionError(), EXIT_NUMERICAL),
        (RuntimeError(), EXIT_DATA),
    ],
)
def test_exit_codes(exc, code):
    assert exit_code_for(exc) == code


def test_exception_attributes():
    assert MalformedRowException("bad row", 7).details == {"line": 7}
    assert StabilityException("unstable", 1.3).spectral_radius == 1.3
    assert ExplosionException("too many", 100).count == 100
    assert ConditioningException("ill-posed", 1e14).condition_number == 1e14
    assert str(HawkesHiveException("plain")) == "plain"


def test_handle_cli_exception_logs(monkeypatch):
    logged = []
    monkeypatch.setattr(errors.logger, "error", lambda event, **kw: logged.append((event, kw)))
    code = handle_cli_exception(UsageException("conflicting options", {"option": "--genealogy"}), "simulate")
    assert code == EXIT_USAGE
    event, fields = logged[0]
    assert event == "command failed"
    assert fields["command"] == "simulate"
    assert fields["details"] == {"option": "--genealogy"}


class TestSettings:
    def test_defaults(self):
        cfg = Settings(_env_file=None)
        assert cfg.max_events == 5_000_000
        assert cfg.criticality_threshold == 0.95
        assert cfg.edge_window_fraction == 0.1
        assert cfg.metrics_enabled is False

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("HAWKESHIVE_MAX_WORKERS", "8")
        monkeypatch.setenv("HAWKESHIVE_LOG_LEVEL", "debug")
        cfg = Settings(_env_file=None)
        assert cfg.max_workers == 8
        assert cfg.LOG_LEVEL == "DEBUG"

    @pytest.mark.parametrize("name, value", [("support_tolerance", 0.0), ("edge_window_fraction", 0.0), ("max_events", 0)])
    def test_rejects_non_positive(self, name, value):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, **{name: value})


class TestMetrics:
    def test_disabled_collector_records_nothing(self, monkeypatch):
        monkeypatch.setattr(metrics_collector, "enabled", False)
        metrics_collector.record_fit("mle_exponential", True)

    def test_exposition_file(self, monkeypatch, tmp_path):
        monkeypatch.setattr(metrics_collector, "enabled", True)
        metrics_collector.record_simulation("thinning", 12)
        metrics_collector.record_fit("mle_exponential", True)
        path = tmp_path / "metrics.prom"
        metrics_collector.write(path)
        text = path.read_text(encoding="utf-8")
        assert "hawkeshive_events_simulated_total" in text
        assert 'method="mle_exponential"' in text


def test_log_duration_records_operation(monkeypatch):
    seen = []
    monkeypatch.setattr(metrics_collector, "record_duration", lambda name, seconds: seen.append((name, seconds)))

    @log_duration("square")
    def square(x):
        return x * x

    assert square(3) == 9
    assert seen[0][0] == "square"
    assert seen[0][1] >= 0.0


def test_log_duration_on_failure(monkeypatch):
    seen = []
    monkeypatch.setattr(metrics_collector, "record_duration", lambda name, seconds: seen.append(name))

    @log_duration()
    def failing():
        raise ValueError("boom")

    with pytest.raises(ValueError):
        failing()
    assert seen == ["failing"]


def test_random_streams_are_independent():
    a = make_rng(42, 0).random(5)
    b = make_rng(42, 1).random(5)
    assert np.array_equal(a, make_rng(42, 0).random(5))
    assert not np.array_equal(a, b)
