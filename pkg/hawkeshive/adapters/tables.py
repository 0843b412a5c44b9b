"""
CSV result tables.

Every table is UTF-8 with a mandatory header row. Lines starting with ``#``
before the header carry scalar metadata as ``# key = value``. Floats are
written with ``repr`` so identical inputs give identical bytes.
"""

import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..core.observability import get_logger
from ..domain.events import EventSequence, Genealogy

logger = get_logger(__name__)

PathLike = Union[str, Path]


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write a CSV table with optional ``# key = value`` metadata lines."""
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key} = {format_number(value)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    logger.debug("table written", path=str(target), columns=list(header))
    return target


def read_metadata(path: PathLike) -> Dict[str, str]:
    """Metadata lines at the top of a table written by ``write_table``."""
    meta: Dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].partition("=")
            if sep:
                meta[key.strip()] = value.strip()
    return meta


def write_events(events: EventSequence, path: PathLike) -> Path:
    """Canonical event file ``time,component[,mark]`` with horizon and dimension metadata."""
    header = ["time", "component"] + (["mark"] if events.has_marks else [])
    columns: List[Sequence[Any]] = [events.times, events.components]
    if events.has_marks:
        columns.append(events.marks)  # type: ignore[arg-type]
    return write_table(
        path,
        header,
        zip(*columns),
        {"horizon": float(events.horizon), "dimension": events.dimension},
    )


def write_genealogy(genealogy: Genealogy, path: PathLike) -> Path:
    index = np.arange(len(genealogy))
    return write_table(path, ["index", "parent_index", "generation"], zip(index, genealogy.parent, genealogy.generation))


def write_curve(
    path: PathLike,
    grid: Sequence[float],
    values: Sequence[float],
    stderr: Optional[Sequence[float]] = None,
    metadata: Optional[Mapping[str, Any]] = None,
    grid_name: str = "grid",
) -> Path:
    """Curve table ``grid,value,stderr``; stderr is left empty when unknown."""
    errors = stderr if stderr is not None else [""] * len(values)
    return write_table(path, [grid_name, "value", "stderr"], zip(grid, values, errors), metadata)


def write_matrix(path: PathLike, matrix: np.ndarray, value_name: str = "value") -> Path:
    """Long-format matrix ``i,j,value``."""
    m = np.atleast_2d(matrix)
    rows = ((i, j, m[i, j]) for i in range(m.shape[0]) for j in range(m.shape[1]))
    return write_table(path, ["i", "j", value_name], rows)


def write_vector(path: PathLike, vector: np.ndarray, value_name: str = "value") -> Path:
    return write_table(path, ["i", value_name], enumerate(np.ravel(vector)))


def write_diagnostics(path: PathLike, objective: np.ndarray, gradient_norms: Optional[np.ndarray] = None) -> Path:
    """Per-iteration objective and gradient norm of a fit."""
    norms = gradient_norms if gradient_norms is not None and len(gradient_norms) == len(objective) else None
    rows = ((k, value, "" if norms is None else norms[k]) for k, value in enumerate(objective))
    return write_table(path, ["iteration", "objective", "gradient_norm"], rows)
