"""
Tests for event file ingestion and the result table writers.
"""

import numpy as np
import orjson
import pytest

from hawkeshive.adapters.ingest import ingest, read_events
from hawkeshive.adapters.tables import read_metadata, write_events
from hawkeshive.core.errors import InputException, MalformedRowException, UnknownComponentException
from hawkeshive.domain.events import EventSequence
from hawkeshive.domain.schemas import IngestConfig, InputFormat, TiePolicy

LABELLED = """\
time,component
0.5,buy
1.0,sell
1.0,buy
2.5,sell
"""


@pytest.fixture
def write_file(tmp_path):
    def _write(text: str, name: str = "events.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


class TestCsv:
    def test_component_map(self, write_file):
        result = ingest(IngestConfig(path=write_file(LABELLED), component_map={"buy": 0, "sell": 1}))
        events = result.events
        assert events.dimension == 2
        assert list(events.times) == [0.5, 1.0, 1.0, 2.5]
        # ties are ordered by component, then file order
        assert list(events.components) == [0, 0, 1, 1]
        assert events.horizon == 2.5
        assert result.report.tied == 2

    def test_unknown_labels_listed(self, write_file):
        with pytest.raises(UnknownComponentException) as info:
            ingest(IngestConfig(path=write_file(LABELLED), component_map={"buy": 0}))
        assert "sell" in str(info.value)

    def test_labels_need_map(self, write_file):
        with pytest.raises(UnknownComponentException):
            ingest(IngestConfig(path=write_file(LABELLED)))

    def test_malformed_row_reports_line(self, write_file):
        path = write_file("time,component\n0.5,0\nabc,1\n")
        with pytest.raises(MalformedRowException) as info:
            ingest(IngestConfig(path=path))
        assert info.value.line == 3

    def test_bad_header(self, write_file):
        with pytest.raises(MalformedRowException):
            ingest(IngestConfig(path=write_file("t,c\n0.5,0\n")))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputException):
            ingest(IngestConfig(path=str(tmp_path / "absent.csv")))

    def test_marks_and_time_scale(self, write_file):
        path = write_file("time,component,mark\n500,0,2.0\n1500,0,0.5\n")
        events = ingest(IngestConfig(path=path, time_scale=1e-3, horizon=2.0)).events
        assert events.times == pytest.approx([0.5, 1.5])
        assert list(events.marks) == [2.0, 0.5]
        assert events.horizon == 2.0


class TestTies:
    def test_jitter_is_seeded_and_bounded(self, write_file):
        path = write_file("time,component\n1.0,0\n1.0,0\n1.0,0\n3.0,0\n")
        cfg = IngestConfig(path=path, tie_policy=TiePolicy.JITTER, jitter_amplitude=1e-3, seed=4)
        first = ingest(cfg)
        second = ingest(cfg)
        assert np.array_equal(first.events.times, second.events.times)
        assert first.report.jittered == 3
        assert np.all(np.abs(first.events.times[:3] - 1.0) <= 1e-3)
        assert np.all(np.diff(first.events.times) >= 0)

    def test_jitter_needs_amplitude(self, write_file):
        with pytest.raises(ValueError):
            IngestConfig(path=write_file(LABELLED), tie_policy=TiePolicy.JITTER)

    def test_dejitter_spreads_bins(self, write_file):
        path = write_file("time,component\n2.0,0\n2.0,0\n2.0,0\n2.0,0\n5.5,0\n")
        result = ingest(IngestConfig(path=path, resolution=1.0, dejitter=True))
        assert result.events.times[:4] == pytest.approx([2.125, 2.375, 2.625, 2.875])
        assert result.report.dejittered == 4
        assert result.report.tied == 0


def test_ndjson(write_file):
    lines = [{"t": 0.25, "c": 1}, {"t": 0.75, "c": 0, "m": None}, {"t": 0.5, "c": 1}]
    path = write_file("\n".join(orjson.dumps(obj).decode() for obj in lines) + "\n", "events.ndjson")
    events = ingest(IngestConfig(path=path, format=InputFormat.NDJSON, horizon=1.0)).events
    assert list(events.times) == [0.25, 0.5, 0.75]
    assert list(events.components) == [1, 1, 0]
    assert not events.has_marks


def test_invalid_ndjson_line(write_file):
    path = write_file('{"t": 0.25, "c": 0}\nnot json\n', "events.ndjson")
    with pytest.raises(MalformedRowException) as info:
        ingest(IngestConfig(path=path, format=InputFormat.NDJSON))
    assert info.value.line == 2


def test_session_window_accounting(write_file):
    path = write_file("time,component\n-1.0,0\n0.5,0\n10.5,0\n12.0,1\n25.0,1\n")
    result = ingest(IngestConfig(path=path, session=(10.0, 20.0)))
    report = result.report
    assert report.rows_read == len(result.events) + report.rows_dropped
    assert report.dropped == {"negative_time": 1, "outside_session": 2}
    assert result.events.times == pytest.approx([0.5, 2.0])
    assert result.events.horizon == 10.0


def test_event_file_round_trip(tmp_path, example_one_model, simulate_events):
    events = simulate_events(example_one_model, 50.0)
    path = write_events(events, tmp_path / "events.csv")
    assert read_metadata(path) == {"horizon": "50.0", "dimension": "2"}
    restored = read_events(str(path))
    assert np.array_equal(restored.times, events.times)
    assert np.array_equal(restored.components, events.components)
    assert restored.horizon == events.horizon
    assert restored.dimension == 2


def test_empty_dimension_survives_round_trip(tmp_path):
    path = write_events(EventSequence.empty(horizon=5.0, dimension=3), tmp_path / "events.csv")
    restored = read_events(str(path))
    assert len(restored) == 0
    assert restored.dimension == 3
    assert restored.horizon == 5.0
