"""Rolling-window sketches feeding the explainer's feature range.

``ExtremeValueStore`` keeps the running maximum of the last ``k`` values with
a monotonically pruned deque; ``MinMaxStore`` pairs it with a twin over the
negated stream for the minimum. ``FrequencyReservoir`` is a fixed-capacity,
ordered reservoir with an entrance probability, whose contents approximate the
last ``capacity / p_inc`` values and support quantile queries.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .errors import ConfigError, EmptyStoreError, InvalidQuantileError, InvalidValueError
from . import kernels

VICTIM_POLICIES = ("oldest", "uniform")


def _finite(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidValueError(f"value is not finite: {x!r}")
    return x


class ExtremeValueStore:
    """Rolling maximum over a window of ``window_size`` updates.

    Entries are ``(value, inserted_at)`` pairs, strictly decreasing in value
    from front to back; the front is the current maximum. A new value evicts
    every entry that is smaller or equal, so the newest of tied values wins.
    """

    def __init__(self, window_size: int):
        if window_size < 1:
            raise ConfigError("window_size must be >= 1")
        self.window_size = int(window_size)
        self.entries: deque[tuple[float, int]] = deque()
        self.last_t: int | None = None

    def update(self, x: float, t: int) -> None:
        x = _finite(x)
        if self.last_t is not None and t <= self.last_t:
            raise ValueError(f"time index must increase: got {t} after {self.last_t}")
        self.last_t = t
        entries = self.entries
        horizon = t - self.window_size
        while entries and entries[0][1] <= horizon:
            entries.popleft()
        while entries and entries[-1][0] <= x:
            entries.pop()
        entries.append((x, t))

    def query_max(self) -> float:
        if not self.entries:
            raise EmptyStoreError("extreme value store is empty")
        return self.entries[0][0]

    def values(self) -> list[float]:
        return [v for v, _ in self.entries]

    def __len__(self):
        return len(self.entries)


class MinMaxStore:
    """Rolling minimum and maximum; the minimum is a max store over ``-x``."""

    def __init__(self, window_size: int):
        self.window_size = int(window_size)
        self._max = ExtremeValueStore(window_size)
        self._neg = ExtremeValueStore(window_size)
        self.t = 0

    def update(self, x: float) -> None:
        x = _finite(x)
        self.t += 1
        self._max.update(x, self.t)
        self._neg.update(-x, self.t)

    def query_max(self) -> float:
        return self._max.query_max()

    def query_min(self) -> float:
        return -self._neg.query_max()

    def range(self) -> tuple[float, float]:
        return self.query_min(), self.query_max()

    def __len__(self):
        return max(len(self._max), len(self._neg))


class FrequencyReservoir:
    """Ordered reservoir of at most ``capacity`` values with entrance probability ``p_inc``.

    While not full every value is appended. Once full, a value enters with
    probability ``p_inc``; the evicted slot is the oldest one (``policy="oldest"``)
    or a uniformly drawn one (``policy="uniform"``). New values always go to
    the back, so ``slots`` stays in insertion order.
    """

    def __init__(self, capacity: int, p_inc: float = 1.0, policy: str = "oldest", seed: int | None = 0):
        if capacity < 1:
            raise ConfigError("capacity must be >= 1")
        if not 0 < p_inc <= 1:
            raise ConfigError("p_inc must lie in (0, 1]")
        if policy not in VICTIM_POLICIES:
            raise ConfigError(f"unknown victim policy {policy!r}; expected one of {VICTIM_POLICIES}")
        self.capacity = int(capacity)
        self.p_inc = float(p_inc)
        self.policy = policy
        self.seed = seed
        self.slots: deque[float] = deque()
        self._rng = np.random.default_rng(seed)

    @property
    def effective_window(self) -> float:
        return self.capacity / self.p_inc

    def update(self, x: float) -> None:
        x = _finite(x)
        slots = self.slots
        if len(slots) < self.capacity:
            slots.append(x)
            return
        if self.p_inc < 1.0 and self._rng.random() > self.p_inc:
            return
        if self.policy == "oldest":
            slots.popleft()
        else:
            del slots[int(self._rng.integers(len(slots)))]
        slots.append(x)

    def quantile(self, q: float) -> float:
        """Nearest-rank quantile: the ``ceil(q * n)``-th smallest slot (1-based, at least 1)."""
        if not 0.0 <= q <= 1.0:
            raise InvalidQuantileError(f"quantile must lie in [0, 1], got {q!r}")
        if not self.slots:
            raise EmptyStoreError("reservoir is empty")
        ordered = np.sort(np.fromiter(self.slots, dtype=float, count=len(self.slots)))
        rank = max(1, math.ceil(q * len(ordered)))
        return float(ordered[rank - 1])

    def __len__(self):
        return len(self.slots)


def rolling_extremes(values, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised rolling (min, max) over an array, same window semantics as ``MinMaxStore``."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidValueError("values must be finite")
    return kernels.rolling_min(values, window), kernels.rolling_max(values, window)
