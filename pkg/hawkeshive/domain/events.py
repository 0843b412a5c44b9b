"""
Event streams, genealogies and pair-lag enumeration.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InputException
from ..core.settings import settings


@dataclass(frozen=True)
class EventSequence:
    """Timestamped, component-labeled, optionally marked events on [0, horizon].

    Events are sorted by time; ties are ordered by component index, then by
    insertion order.
    """

    times: np.ndarray
    components: np.ndarray
    horizon: float
    dimension: int
    marks: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        for name in ("times", "components", "marks"):
            value = getattr(self, name)
            if value is not None:
                value.setflags(write=False)

    @classmethod
    def from_arrays(
        cls,
        times: Sequence[float],
        components: Optional[Sequence[int]] = None,
        horizon: Optional[float] = None,
        dimension: Optional[int] = None,
        marks: Optional[Sequence[float]] = None,
    ) -> "EventSequence":
        """Validate and sort raw arrays into an event sequence."""
        t = np.asarray(times, dtype=float).ravel()
        k = np.zeros(t.size, dtype=np.int64) if components is None else np.asarray(components).ravel()
        if k.size != t.size:
            raise InputException("times and components differ in length", {"times": t.size, "components": k.size})
        if k.size and not np.issubdtype(k.dtype, np.integer):
            if not np.all(np.equal(np.mod(k, 1), 0)):
                raise InputException("component indices must be integers")
        k = k.astype(np.int64)
        if not np.all(np.isfinite(t)):
            raise InputException("event times must be finite")
        dim = int(dimension) if dimension is not None else (int(k.max()) + 1 if k.size else 1)
        if k.size and (k.min() < 0 or k.max() >= dim):
            raise InputException("component index outside [0, dimension)", {"dimension": dim})
        T = float(horizon) if horizon is not None else (float(t.max()) if t.size else 0.0)
        if t.size and (t.min() < 0 or t.max() > T):
            raise InputException("event times must lie in [0, horizon]", {"horizon": T})
        if T < 0:
            raise InputException("horizon must be non-negative", {"horizon": T})
        m = None
        if marks is not None:
            m = np.asarray(marks, dtype=float).ravel()
            if m.size != t.size:
                raise InputException("marks and times differ in length")
        order = np.lexsort((np.arange(t.size), k, t))
        return cls(
            times=t[order],
            components=k[order],
            horizon=T,
            dimension=dim,
            marks=None if m is None else m[order],
        )

    @classmethod
    def empty(cls, horizon: float, dimension: int = 1) -> "EventSequence":
        return cls.from_arrays([], [], horizon=horizon, dimension=dimension)

    @classmethod
    def from_streams(cls, streams: Sequence[Sequence[float]], horizon: float) -> "EventSequence":
        """Merge per-component time arrays."""
        times = np.concatenate([np.asarray(s, dtype=float) for s in streams]) if streams else np.empty(0)
        comps = np.concatenate([np.full(len(s), i, dtype=np.int64) for i, s in enumerate(streams)])
        return cls.from_arrays(times, comps, horizon=horizon, dimension=len(streams))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def has_marks(self) -> bool:
        return self.marks is not None

    def counts(self) -> np.ndarray:
        return np.bincount(self.components, minlength=self.dimension)

    def component_times(self, i: int) -> np.ndarray:
        return self.times[self.components == i]

    def streams(self) -> List[np.ndarray]:
        return [self.component_times(i) for i in range(self.dimension)]

    def window(self, start: float, end: float) -> "EventSequence":
        """Events in [start, end], shifted so that ``start`` becomes 0."""
        keep = (self.times >= start) & (self.times <= end)
        return EventSequence(
            times=self.times[keep] - start,
            components=self.components[keep],
            horizon=end - start,
            dimension=self.dimension,
            marks=None if self.marks is None else self.marks[keep],
        )

    def rescaled(self, factor: float) -> "EventSequence":
        """Multiply every time stamp and the horizon by ``factor``."""
        return EventSequence(
            times=self.times * factor,
            components=self.components,
            horizon=self.horizon * factor,
            dimension=self.dimension,
            marks=self.marks,
        )


@dataclass(frozen=True)
class Genealogy:
    """Per-event parent index (-1 for immigrants) and generation number."""

    parent: np.ndarray
    generation: np.ndarray

    def __len__(self) -> int:
        return int(self.parent.size)

    def validate(self, events: EventSequence) -> None:
        if self.parent.size != len(events):
            raise InputException("genealogy length differs from event count")
        has_parent = self.parent >= 0
        if np.any(self.generation[~has_parent] != 0):
            raise InputException("immigrants must have generation 0")
        children = np.flatnonzero(has_parent)
        parents = self.parent[children]
        if np.any(events.times[parents] >= events.times[children]):
            raise InputException("parent time must precede child time")

    @property
    def is_immigrant(self) -> np.ndarray:
        return self.parent < 0

    def roots(self) -> np.ndarray:
        """Index of the oldest ancestor (immigrant) of every event."""
        root = np.arange(self.parent.size)
        # generation order visits every parent before its children
        for idx in np.argsort(self.generation, kind="stable"):
            p = self.parent[idx]
            if p >= 0:
                root[idx] = root[p]
        return root


def iter_pairs(
    sources: np.ndarray,
    targets: np.ndarray,
    lo: float,
    hi: float,
    chunk_size: Optional[int] = None,
) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Enumerate all pairs with lag ``targets[b] - sources[a]`` in (lo, hi].

    Both arrays must be sorted. Yields ``(a_idx, b_idx, lags)`` in chunks holding
    at most about ``chunk_size`` pairs.
    """
    chunk_size = chunk_size or settings.pair_chunk_size
    left = np.searchsorted(targets, sources + lo, side="right")
    right = np.searchsorted(targets, sources + hi, side="right")
    counts = right - left
    if counts.sum() == 0:
        return
    cum = np.cumsum(counts)
    boundaries = np.searchsorted(cum, np.arange(chunk_size, cum[-1], chunk_size), side="left")
    starts = np.concatenate([[0], boundaries + 1])
    ends = np.concatenate([boundaries + 1, [sources.size]])
    for s, e in zip(starts, ends):
        if s >= e:
            continue
        c = counts[s:e]
        total = int(c.sum())
        if total == 0:
            continue
        a_idx = np.repeat(np.arange(s, e), c)
        offsets = np.arange(total) - np.repeat(np.cumsum(c) - c, c)
        b_idx = left[a_idx] + offsets
        yield a_idx, b_idx, targets[b_idx] - sources[a_idx]

