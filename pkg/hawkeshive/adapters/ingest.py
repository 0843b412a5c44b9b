"""
Event file ingestion.

Reads CSV (``time,component[,mark]`` with a mandatory header) or NDJSON
(``{"t": ..., "c": ..., "m": ...}`` per line) into a validated, sorted
EventSequence. Times are scaled to seconds, optionally restricted to a session
window and shifted so that the session starts at 0. Duplicate timestamps are
kept in file order or jittered with a seeded uniform perturbation.
"""

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import orjson

from ..core.errors import InputException, MalformedRowException, UnknownComponentException
from ..core.observability import get_logger, log_duration
from ..core.rng import make_rng
from ..domain.events import EventSequence
from ..domain.schemas import IngestConfig, InputFormat, TiePolicy

logger = get_logger(__name__)

_CSV_HEADERS = (["time", "component"], ["time", "component", "mark"])


@dataclass
class IngestReport:
    """Row accounting: ``rows_read`` equals kept events plus the dropped counts."""

    rows_read: int = 0
    dropped: Dict[str, int] = field(default_factory=dict)
    tied: int = 0
    jittered: int = 0
    dejittered: int = 0

    @property
    def rows_dropped(self) -> int:
        return sum(self.dropped.values())

    def drop(self, reason: str, count: int = 1) -> None:
        if count:
            self.dropped[reason] = self.dropped.get(reason, 0) + count


@dataclass(frozen=True)
class IngestResult:
    events: EventSequence
    report: IngestReport


@dataclass
class _Rows:
    times: List[float] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    marks: List[Optional[float]] = field(default_factory=list)
    lines: List[int] = field(default_factory=list)
    metadata: Dict[str, str] = field(default_factory=dict)


def _parse_float(raw: str, line: int, what: str) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError) as exc:
        raise MalformedRowException(f"line {line}: invalid {what} {raw!r}", line) from exc
    if not np.isfinite(value):
        raise MalformedRowException(f"line {line}: {what} must be finite", line)
    return value


def _read_csv(path: Path) -> _Rows:
    rows = _Rows()
    header: Optional[List[str]] = None
    with path.open("r", encoding="utf-8", newline="") as fh:
        for number, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if record[0].startswith("#"):
                if header is None:
                    key, sep, value = ",".join(record)[1:].partition("=")
                    if sep:
                        rows.metadata[key.strip()] = value.strip()
                continue
            fields = [f.strip() for f in record]
            if header is None:
                if fields not in _CSV_HEADERS:
                    raise MalformedRowException(
                        f"line {number}: header must be time,component[,mark], got {','.join(fields)!r}", number
                    )
                header = fields
                continue
            if len(fields) != len(header):
                raise MalformedRowException(
                    f"line {number}: expected {len(header)} fields, got {len(fields)}", number
                )
            rows.times.append(_parse_float(fields[0], number, "time"))
            rows.labels.append(fields[1])
            rows.marks.append(_parse_float(fields[2], number, "mark") if len(fields) == 3 else None)
            rows.lines.append(number)
    if header is None:
        raise InputException("event file has no header row", {"path": str(path)})
    return rows


def _read_ndjson(path: Path) -> _Rows:
    rows = _Rows()
    with path.open("rb") as fh:
        for number, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = orjson.loads(raw)
            except orjson.JSONDecodeError as exc:
                raise MalformedRowException(f"line {number}: invalid JSON", number) from exc
            if not isinstance(obj, dict) or "t" not in obj or "c" not in obj:
                raise MalformedRowException(f"line {number}: object needs keys 't' and 'c'", number)
            rows.times.append(_parse_float(obj["t"], number, "time"))
            rows.labels.append(str(obj["c"]))
            rows.marks.append(_parse_float(obj["m"], number, "mark") if obj.get("m") is not None else None)
            rows.lines.append(number)
    return rows


def _components(rows: _Rows, cfg: IngestConfig) -> Tuple[np.ndarray, int]:
    if cfg.component_map is not None:
        unknown = sorted({label for label in rows.labels if label not in cfg.component_map})
        if unknown:
            raise UnknownComponentException(
                f"unknown component labels: {', '.join(unknown)}", {"labels": unknown}
            )
        comps = np.array([cfg.component_map[label] for label in rows.labels], dtype=np.int64)
        return comps, len(cfg.component_map)
    comps = np.empty(len(rows.labels), dtype=np.int64)
    for k, label in enumerate(rows.labels):
        try:
            comps[k] = int(label)
        except ValueError:
            raise UnknownComponentException(
                f"line {rows.lines[k]}: component {label!r} is not an index and no component map was given",
                {"labels": [label], "line": rows.lines[k]},
            ) from None
        if comps[k] < 0:
            raise MalformedRowException(f"line {rows.lines[k]}: negative component index", rows.lines[k])
    declared = int(rows.metadata["dimension"]) if "dimension" in rows.metadata else 0
    return comps, max(declared, int(comps.max()) + 1 if comps.size else 1)


def _tied(times: np.ndarray) -> np.ndarray:
    """Mask of events sharing their timestamp with another event; ``times`` sorted."""
    same = np.diff(times) == 0
    mask = np.zeros(times.size, dtype=bool)
    mask[1:] |= same
    mask[:-1] |= same
    return mask


def _dejitter(times: np.ndarray, resolution: float) -> Tuple[np.ndarray, int]:
    """Spread events sharing a resolution bin evenly inside it; ``times`` sorted."""
    bins = np.floor(times / resolution).astype(np.int64)
    _, start, counts = np.unique(bins, return_index=True, return_counts=True)
    out = times.copy()
    adjusted = 0
    for first, n in zip(start, counts):
        if n > 1:
            out[first : first + n] = (bins[first] + (np.arange(n) + 0.5) / n) * resolution
            adjusted += int(n)
    return out, adjusted


@log_duration("ingest")
def ingest(cfg: IngestConfig) -> IngestResult:
    """Read, validate and normalize an event file.

    Raises:
        MalformedRowException: With the line number of the first unparseable row
        UnknownComponentException: Listing every label missing from the component map
    """
    path = Path(cfg.path)
    if not path.is_file():
        raise InputException("event file not found", {"path": str(path)})
    rows = _read_csv(path) if cfg.format is InputFormat.CSV else _read_ndjson(path)
    report = IngestReport(rows_read=len(rows.times))
    comps, dimension = _components(rows, cfg)

    times = np.asarray(rows.times, dtype=float) * cfg.time_scale
    has_marks = any(m is not None for m in rows.marks)
    if has_marks and any(m is None for m in rows.marks):
        missing = next(line for line, m in zip(rows.lines, rows.marks) if m is None)
        raise MalformedRowException(f"line {missing}: mark missing while other rows carry one", missing)
    marks = np.asarray(rows.marks, dtype=float) if has_marks else None

    keep = times >= 0
    report.drop("negative_time", int(np.sum(~keep)))
    if cfg.session is not None:
        start, end = cfg.session
        inside = (times >= start) & (times <= end)
        report.drop("outside_session", int(np.sum(keep & ~inside)))
        keep &= inside
        times = times - start
        horizon = end - start
    elif cfg.horizon is not None:
        inside = times <= cfg.horizon
        report.drop("after_horizon", int(np.sum(keep & ~inside)))
        keep &= inside
        horizon = cfg.horizon
    elif "horizon" in rows.metadata:
        horizon = float(rows.metadata["horizon"]) * cfg.time_scale
    else:
        horizon = float(times[keep].max()) if keep.any() else 0.0

    times, comps = times[keep], comps[keep]
    marks = None if marks is None else marks[keep]
    order = np.lexsort((np.arange(times.size), comps, times))
    times, comps = times[order], comps[order]
    marks = None if marks is None else marks[order]

    if cfg.dejitter:
        times, report.dejittered = _dejitter(times, cfg.resolution)  # type: ignore[arg-type]
    tied = _tied(times)
    report.tied = int(tied.sum())
    if report.tied and cfg.tie_policy is TiePolicy.JITTER:
        rng = make_rng(cfg.seed)
        shift = rng.uniform(-cfg.jitter_amplitude, cfg.jitter_amplitude, size=report.tied)
        times = times.copy()
        times[tied] = np.clip(times[tied] + shift, 0.0, horizon)
        report.jittered = report.tied
    elif report.tied:
        logger.warning("duplicate timestamps kept in file order", tied=report.tied)

    events = EventSequence.from_arrays(times, comps, horizon=horizon, dimension=dimension, marks=marks)
    if cfg.resolution is not None and len(events) > 1:
        gaps = np.diff(events.times)
        finest = float(gaps[gaps > 0].min()) if np.any(gaps > 0) else float("inf")
        if finest < cfg.resolution and not cfg.dejitter and cfg.tie_policy is not TiePolicy.JITTER:
            logger.warning("inter-event gap below the declared resolution", gap=finest, resolution=cfg.resolution)
    counts = Counter(events.components.tolist())
    logger.info(
        "events ingested",
        path=str(path),
        rows=report.rows_read,
        events=len(events),
        dropped=report.dropped,
        tied=report.tied,
        counts=dict(sorted(counts.items())),
    )
    return IngestResult(events=events, report=report)


def read_events(path: str, horizon: Optional[float] = None) -> EventSequence:
    """Canonical event CSV as written by ``write_events``."""
    return ingest(IngestConfig(path=path, horizon=horizon)).events
