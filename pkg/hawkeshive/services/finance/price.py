"""
Mid-price paths built from up and down event streams.

P_t = P_0 + N¹_t − N²_t in ticks; the currency value is ``tick`` times that.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ...core.errors import InputException
from ...domain.events import EventSequence


@dataclass(frozen=True)
class PricePath:
    """Piecewise-constant price in ticks, jumping by ±1 at ``times``.

    ``levels[k]`` is the price right after the k-th jump.
    """

    times: np.ndarray
    levels: np.ndarray
    p0: int = 0
    tick: float = 1.0

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def final(self) -> int:
        return int(self.levels[-1]) if self.levels.size else self.p0

    def value_at(self, t) -> np.ndarray:
        """Price in ticks at time(s) ``t``, right-continuous."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        return np.concatenate([[self.p0], self.levels])[idx]

    def sample(self, step: float, horizon: float) -> np.ndarray:
        """Prices at 0, step, 2·step, ... up to ``horizon``."""
        n = int(np.floor(horizon / step + 1e-12))
        return self.value_at(step * np.arange(n + 1))


def _check_sorted(name: str, times: np.ndarray) -> None:
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise InputException(f"{name} stream must be sorted", {"stream": name})


def price_from_events(
    up: Sequence[float], down: Sequence[float], p0: int = 0, tick: float = 1.0
) -> PricePath:
    """Merge sorted up and down streams into a price path.

    Simultaneous up and down jumps are applied up first.

    Raises:
        InputException: If either stream is not sorted
    """
    up_t = np.asarray(up, dtype=float).ravel()
    down_t = np.asarray(down, dtype=float).ravel()
    _check_sorted("up", up_t)
    _check_sorted("down", down_t)
    times = np.concatenate([up_t, down_t])
    steps = np.concatenate([np.ones(up_t.size, dtype=np.int64), -np.ones(down_t.size, dtype=np.int64)])
    order = np.lexsort((np.arange(times.size), times))
    return PricePath(times=times[order], levels=int(p0) + np.cumsum(steps[order]), p0=int(p0), tick=float(tick))


def path_from_events(events: EventSequence, up: int = 0, down: int = 1, p0: int = 0, tick: float = 1.0) -> PricePath:
    """Price path driven by two components of an event sequence."""
    for k in (up, down):
        if not 0 <= k < events.dimension:
            raise InputException("price component outside the record", {"component": k, "dimension": events.dimension})
    return price_from_events(events.component_times(up), events.component_times(down), p0, tick)
