"""ADWIN change detection and its use on explanation streams.

The detector keeps its window as an exponential histogram: level ``i``
holds buckets summarising ``2**i`` consecutive values (sum and sum of
squared deviations). Each level keeps at most ``max_buckets`` buckets; when
it overflows, its two oldest buckets merge into one bucket of the next
level. Every ``clock`` insertions all bucket boundaries are tested as split
points; while some split shows a significant mean difference, everything
older than the most significant split is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .engine import ExplanationFrame
from .errors import ConfigError, InvalidValueError, OrderingError


class ADWIN:
    def __init__(self, delta: float = 0.002, max_buckets: int = 5, clock: int = 32,
                 min_window_length: int = 5, grace_period: int = 10, variance_bound: bool = True):
        if not 0 < delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if max_buckets < 2:
            raise ConfigError("max_buckets must be >= 2")
        if clock < 1 or min_window_length < 1:
            raise ConfigError("clock and min_window_length must be >= 1")
        self.delta = float(delta)
        self.max_buckets = int(max_buckets)
        self.clock = int(clock)
        self.min_window_length = int(min_window_length)
        self.grace_period = int(grace_period)
        self.variance_bound = variance_bound
        self.reset()

    def reset(self) -> None:
        # newest bucket last inside each level; higher levels hold older data
        self._sums: list[list[float]] = []
        self._vars: list[list[float]] = []
        self.width = 0
        self.total = 0.0
        self.variance = 0.0  # sum of squared deviations over the window
        self.n_seen = 0
        self.n_detections = 0
        self.drift_detected = False

    # -- window bookkeeping ------------------------------------------------

    @property
    def estimation(self) -> float:
        return self.total / self.width if self.width else 0.0

    @property
    def n_buckets(self) -> int:
        return sum(len(level) for level in self._sums)

    def buckets(self) -> list[tuple[int, float]]:
        """``(count, sum)`` of every bucket, oldest first."""
        out = []
        for level in range(len(self._sums) - 1, -1, -1):
            out.extend((1 << level, s) for s in self._sums[level])
        return out

    def _insert(self, value: float) -> None:
        if not self._sums:
            self._sums.append([])
            self._vars.append([])
        self._sums[0].append(value)
        self._vars[0].append(0.0)
        self.width += 1
        if self.width > 1:
            mean = self.total / (self.width - 1)
            self.variance += (self.width - 1) * (value - mean) ** 2 / self.width
        self.total += value
        self._compress()

    def _compress(self) -> None:
        level = 0
        while level < len(self._sums) and len(self._sums[level]) > self.max_buckets:
            if level + 1 == len(self._sums):
                self._sums.append([])
                self._vars.append([])
            sums, vars_ = self._sums[level], self._vars[level]
            n = 1 << level
            s1, s2 = sums.pop(0), sums.pop(0)
            v1, v2 = vars_.pop(0), vars_.pop(0)
            diff = s1 / n - s2 / n
            self._sums[level + 1].append(s1 + s2)
            self._vars[level + 1].append(v1 + v2 + n * n * diff * diff / (2 * n))
            level += 1

    def _drop_oldest(self) -> int:
        level = len(self._sums) - 1
        while not self._sums[level]:
            level -= 1
        n = 1 << level
        s = self._sums[level].pop(0)
        v = self._vars[level].pop(0)
        self.width -= n
        self.total -= s
        if self.width:
            diff = s / n - self.total / self.width
            self.variance -= v + n * self.width * diff * diff / (n + self.width)
        else:
            self.variance = 0.0
        self.variance = max(self.variance, 0.0)
        while self._sums and not self._sums[-1]:
            self._sums.pop()
            self._vars.pop()
        return n

    # -- detection ---------------------------------------------------------

    def cut_threshold(self, n0: int, n1: int) -> float:
        """Bound on |mean(W0) - mean(W1)| above which the split is significant."""
        n = self.width
        inv_m = 1.0 / n0 + 1.0 / n1
        if self.variance_bound:
            log_term = math.log(2.0 * math.log(n) / self.delta)
            var = self.variance / n
            return math.sqrt(2.0 * inv_m * var * log_term) + 2.0 / 3.0 * inv_m * log_term
        return math.sqrt(0.5 * inv_m * math.log(4.0 * n / self.delta))

    def _detect(self) -> bool:
        detected = False
        while self.width > self.min_window_length:
            best_margin, best_n0 = 0.0, 0
            n0, s0 = 0, 0.0
            n1, s1 = self.width, self.total
            for count, total in self.buckets()[:-1]:
                n0 += count
                n1 -= count
                s0 += total
                s1 -= total
                if n0 < self.min_window_length or n1 < self.min_window_length:
                    continue
                margin = abs(s0 / n0 - s1 / n1) - self.cut_threshold(n0, n1)
                if margin >= 0 and (best_n0 == 0 or margin > best_margin):
                    best_margin, best_n0 = margin, n0
            if not best_n0:
                break
            # drop the whole older sub-window of the most significant split
            detected = True
            dropped = 0
            while dropped < best_n0:
                dropped += self._drop_oldest()
        return detected

    def update(self, value: float) -> bool:
        """Insert ``value``; return True when a change was detected on this call."""
        value = float(value)
        if not math.isfinite(value):
            raise InvalidValueError(f"value is not finite: {value!r}")
        self.n_seen += 1
        self._insert(value)
        self.drift_detected = False
        if self.n_seen % self.clock == 0 and self.width > self.grace_period:
            self.drift_detected = self._detect()
            if self.drift_detected:
                self.n_detections += 1
        return self.drift_detected


@dataclass
class DriftEvent:
    t: int
    feature: str
    frame: ExplanationFrame

    def to_dict(self) -> dict:
        return {"t": int(self.t), "feature": self.feature, "frame": self.frame.to_dict()}


class ExplanationDriftMonitor:
    """One ADWIN per feature, fed the importance of every frame of that feature."""

    def __init__(self, features: Iterable[str] | None = None, delta: float = 0.002, max_buckets: int = 5,
                 **adwin_kwargs):
        self._params = dict(delta=delta, max_buckets=max_buckets, **adwin_kwargs)
        ADWIN(**self._params)  # validate eagerly
        self.detectors: dict[str, ADWIN] = {}
        self._last_t: dict[str, int] = {}
        for name in features or ():
            self.detectors[name] = ADWIN(**self._params)

    def update(self, frame: ExplanationFrame) -> DriftEvent | None:
        name = frame.feature
        last = self._last_t.get(name)
        if last is not None and frame.t <= last:
            raise OrderingError(f"frame for {name!r} at t={frame.t} arrived after t={last}")
        self._last_t[name] = frame.t
        detector = self.detectors.get(name)
        if detector is None:
            detector = self.detectors[name] = ADWIN(**self._params)
        if detector.update(frame.importance):
            return DriftEvent(frame.t, name, frame)
        return None

    def process(self, frames: Iterable[ExplanationFrame | Mapping[str, ExplanationFrame]]) -> Iterator[DriftEvent]:
        for item in frames:
            batch = item.values() if isinstance(item, Mapping) else (item,)
            for frame in batch:
                event = self.update(frame)
                if event is not None:
                    yield event


def fi_drift_pipeline(frames, detectors: Mapping[str, ADWIN] | None = None, **kwargs) -> Iterator[DriftEvent]:
    monitor = ExplanationDriftMonitor(**kwargs)
    if detectors:
        monitor.detectors.update(detectors)
    return monitor.process(frames)
