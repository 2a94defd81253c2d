"""Incremental partial dependence (iPDP) for one or several features.

For every observation the explainer reads the current feature range from a
rolling sketch, lays ``m`` equidistant model evaluation points over it and
evaluates the model on copies of the observation where only the explained
feature is replaced (one ICE curve). Both the ICE values and the evaluation
points are folded into exponential moving averages that start at zero; the
emitted frame divides them by ``1 - (1 - alpha)**t`` to remove the
zero-initialisation bias. Until the range sketch is warm, observations only
feed the sketch and no frame is produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from . import kernels
from .errors import ConfigError, InvalidRangeError, InvalidValueError, SchemaError, UndefinedDebiasError
from .model_api import validate_features
from .storage import FrequencyReservoir, MinMaxStore


@dataclass(frozen=True)
class MinMaxRange:
    window: int = 2000

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError("MinMax window must be >= 1")


@dataclass(frozen=True)
class QuantileRange:
    q_low: float = 0.05
    q_high: float = 0.95
    capacity: int = 100
    p_inc: float = 0.05
    policy: str = "oldest"

    def __post_init__(self):
        if not 0.0 <= self.q_low < self.q_high <= 1.0:
            raise ConfigError("quantile range needs 0 <= q_low < q_high <= 1")
        if self.capacity < 1 or not 0 < self.p_inc <= 1:
            raise ConfigError("reservoir needs capacity >= 1 and 0 < p_inc <= 1")

    @property
    def warmup_size(self) -> int:
        # tolerance keeps e.g. 1 / (0.45 - 0.4) at 20, not 21
        return max(10, math.ceil(1.0 / (self.q_high - self.q_low) - 1e-9))


RangeStrategy = Union[MinMaxRange, QuantileRange]


@dataclass(frozen=True)
class PdpConfig:
    alpha: float = 0.001
    grid_size: int = 20
    range_strategy: RangeStrategy = field(default_factory=QuantileRange)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.grid_size < 2:
            raise ConfigError(f"grid_size must be >= 2, got {self.grid_size!r}")


@dataclass
class ExplanationFrame:
    t: int
    feature: str
    grid: np.ndarray
    estimates: np.ndarray
    importance: float
    eval_range: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "t": int(self.t),
            "feature": self.feature,
            "grid": [float(v) for v in self.grid],
            "estimates": [float(v) for v in self.estimates],
            "importance": float(self.importance),
            "eval_min": float(self.eval_range[0]),
            "eval_max": float(self.eval_range[1]),
        }


# ---------------------------------------------------------------------------
# scalar building blocks


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise InvalidValueError(f"value is not finite: {v!r}")


def eval_points(range_min: float, range_max: float, m: int) -> np.ndarray:
    """``m`` equidistant points from ``range_min`` to ``range_max`` inclusive."""
    if m < 2:
        raise ConfigError(f"need at least 2 evaluation points, got {m}")
    if not (math.isfinite(range_min) and math.isfinite(range_max)):
        raise InvalidRangeError(f"range must be finite, got ({range_min}, {range_max})")
    if range_min > range_max:
        raise InvalidRangeError(f"range_min {range_min} exceeds range_max {range_max}")
    return kernels.equidistant(range_min, range_max, m)


def update_estimate(prev: float, ice_value: float, alpha: float) -> float:
    _check_alpha(alpha)
    _check_finite(prev, ice_value)
    return (1.0 - alpha) * prev + alpha * ice_value


def update_grid_point(prev: float, eval_point: float, alpha: float) -> float:
    _check_alpha(alpha)
    _check_finite(prev, eval_point)
    return (1.0 - alpha) * prev + alpha * eval_point


def debias_factor(alpha: float, t: int) -> float:
    if t < 1:
        raise UndefinedDebiasError("debiasing needs t >= 1")
    return 1.0 - (1.0 - alpha) ** t


def debias(value, alpha: float, t: int):
    """Undo the zero-start bias of an EMA after ``t`` updates. Works on arrays too."""
    return value / debias_factor(alpha, t)


def pdp_importance(estimates: Sequence[float]) -> float:
    """Sample standard deviation of a PD curve (0 for a flat curve)."""
    est = np.asarray(estimates, dtype=float)
    if est.shape[0] < 2:
        raise ConfigError("importance needs at least 2 grid points")
    return float(np.std(est, ddof=1))


# ---------------------------------------------------------------------------
# per-feature state


class PdpState:
    """Mutable iPDP state of a single feature.

    ``step`` counts the moving-average updates (warm-up observations are not
    counted); ``n_seen`` counts every observation fed to the range sketch.
    """

    def __init__(self, feature: str, config: PdpConfig):
        self.feature = feature
        self.config = config
        m = config.grid_size
        self.raw_estimates = np.zeros(m)
        self.raw_grid = np.zeros(m)
        self.step = 0
        self.n_seen = 0
        self.warm = False
        strategy = config.range_strategy
        if isinstance(strategy, MinMaxRange):
            self.range_store = MinMaxStore(strategy.window)
        elif isinstance(strategy, QuantileRange):
            self.range_store = FrequencyReservoir(strategy.capacity, strategy.p_inc, strategy.policy, seed=config.seed)
        else:
            raise ConfigError(f"unsupported range strategy {strategy!r}")

    def current_range(self) -> tuple[float, float] | None:
        """Evaluation range for the next observation, or None while warming up."""
        strategy = self.config.range_strategy
        store = self.range_store
        if isinstance(strategy, MinMaxRange):
            if not self.warm:
                if len(store) == 0 or store.query_min() == store.query_max():
                    return None
                self.warm = True
            return store.range()
        if not self.warm:
            if len(store) < strategy.warmup_size:
                return None
            self.warm = True
        return store.quantile(strategy.q_low), store.quantile(strategy.q_high)

    def observe_value(self, value: float) -> None:
        self.range_store.update(value)
        self.n_seen += 1

    def frame(self, t: int | None = None, eval_range=(math.nan, math.nan)) -> ExplanationFrame:
        if self.step < 1:
            raise UndefinedDebiasError("no moving-average update has happened yet")
        factor = debias_factor(self.config.alpha, self.step)
        estimates = self.raw_estimates / factor
        return ExplanationFrame(
            t=self.n_seen if t is None else t,
            feature=self.feature,
            grid=self.raw_grid / factor,
            estimates=estimates,
            importance=pdp_importance(estimates),
            eval_range=(float(eval_range[0]), float(eval_range[1])),
        )


def _ice_values(model, x: Mapping[str, float], feature: str, points: np.ndarray) -> np.ndarray:
    """Model outputs on copies of ``x`` with ``feature`` replaced by each point."""
    schema = getattr(model, "schema", None)
    if schema is not None and hasattr(model, "predict_batch"):
        try:
            row = np.array([x[name] for name in schema], dtype=float)
            col = schema.index(feature)
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"observation does not cover the model schema: {exc}") from None
        if len(x) != len(schema):
            raise SchemaError(f"observation has {len(x)} features, model schema has {len(schema)}")
        probes = np.repeat(row[None, :], points.shape[0], axis=0)
        probes[:, col] = points
        values = np.asarray(model.predict_batch(probes), dtype=float)
    else:
        values = np.empty(points.shape[0])
        probe = dict(x)
        for k, v in enumerate(points.tolist()):
            probe[feature] = v
            values[k] = model.predict(dict(probe))
    if not np.all(np.isfinite(values)):
        raise InvalidValueError("model returned a non-finite prediction")
    return values


def explain_one(state: PdpState, model, x_t: Mapping[str, float], config: PdpConfig | None = None,
                t: int | None = None) -> ExplanationFrame | None:
    """Absorb one observation into ``state``; return a frame, or None during warm-up.

    The evaluation range is read before ``x_t`` enters the sketch, so the
    observation itself only influences later steps.
    """
    config = state.config if config is None else config
    feature = state.feature
    if feature not in x_t:
        raise SchemaError(f"observation lacks feature {feature!r}")
    value = float(x_t[feature])
    if not math.isfinite(value):
        raise InvalidValueError(f"feature {feature!r} is not finite: {value!r}")

    bounds = state.current_range()
    if bounds is None:
        state.observe_value(value)
        return None
    points = eval_points(bounds[0], bounds[1], config.grid_size)
    ice = _ice_values(model, x_t, feature, points)
    state.step += 1
    grid, estimates, importance = kernels.ema_step(
        state.raw_grid, state.raw_estimates, points, ice, config.alpha, debias_factor(config.alpha, state.step))
    state.observe_value(value)
    return ExplanationFrame(state.n_seen if t is None else t, feature, grid, estimates, importance,
                            (float(bounds[0]), float(bounds[1])))


class IncrementalPDP:
    """Convenience wrapper bundling a ``PdpState`` with its config."""

    def __init__(self, feature: str, config: PdpConfig | None = None):
        self.config = config or PdpConfig()
        self.state = PdpState(feature, self.config)

    @property
    def feature(self) -> str:
        return self.state.feature

    def explain_one(self, x: Mapping[str, float], model, t: int | None = None) -> ExplanationFrame | None:
        return explain_one(self.state, model, x, self.config, t)

    def explain_many(self, X: np.ndarray, schema: Sequence[str], model, t0: int = 1,
                     every: int = 1) -> list[ExplanationFrame]:
        """Vectorised replay of a block of observations for a *frozen* model.

        Produces the same state as calling ``explain_one`` row by row, but
        evaluates the model once on all probes and runs the moving averages
        through ``kernels.ema_scan``. Requires ``model.predict_batch`` with
        columns in ``schema``. Returns frames for rows whose time index
        ``t0 + i`` is a multiple of ``every`` (warm-up rows excluded).
        """
        if not hasattr(model, "predict_batch"):
            raise SchemaError("explain_many needs a model with predict_batch")
        X = np.asarray(X, dtype=float)
        schema = list(schema)
        if X.ndim != 2 or X.shape[1] != len(schema):
            raise SchemaError("X must be an (n, d) array matching schema")
        if not np.all(np.isfinite(X)):
            raise InvalidValueError("X contains non-finite values")
        model_schema = list(getattr(model, "schema", schema) or schema)
        order = [schema.index(name) for name in model_schema]
        state, config = self.state, self.config
        col = schema.index(state.feature)
        m = config.grid_size

        rows, points, bounds = [], [], []
        for i, value in enumerate(X[:, col].tolist()):
            b = state.current_range()
            if b is not None:
                rows.append(i)
                bounds.append(b)
                points.append(eval_points(b[0], b[1], m))
            state.observe_value(value)
        if not rows:
            return []
        points = np.asarray(points)
        probes = np.repeat(X[rows][:, order], m, axis=0)
        probes[:, model_schema.index(state.feature)] = points.ravel()
        ice = np.asarray(model.predict_batch(probes), dtype=float).reshape(len(rows), m)
        if not np.all(np.isfinite(ice)):
            raise InvalidValueError("model returned a non-finite prediction")

        grid_path = kernels.ema_scan(points, config.alpha, state.raw_grid)
        est_path = kernels.ema_scan(ice, config.alpha, state.raw_estimates)
        step0 = state.step
        state.raw_grid = grid_path[-1].copy()
        state.raw_estimates = est_path[-1].copy()
        state.step = step0 + len(rows)

        frames = []
        for j, i in enumerate(rows):
            t = t0 + i
            if t % every:
                continue
            factor = debias_factor(config.alpha, step0 + j + 1)
            est = est_path[j] / factor
            frames.append(ExplanationFrame(t, state.feature, grid_path[j] / factor, est,
                                           pdp_importance(est), bounds[j]))
        return frames


class MultiExplainer:
    """Runs one independent ``IncrementalPDP`` per feature in lockstep."""

    def __init__(self, features: Iterable[str], config: PdpConfig | None = None,
                 configs: Mapping[str, PdpConfig] | None = None):
        base = config or PdpConfig()
        self.features = list(features)
        if len(set(self.features)) != len(self.features):
            raise ConfigError("features must be unique")
        seeds = np.random.SeedSequence(base.seed).generate_state(len(self.features)).tolist() if self.features else []
        self.explainers = {}
        for name, seed in zip(self.features, seeds):
            cfg = (configs or {}).get(name) or PdpConfig(base.alpha, base.grid_size, base.range_strategy, int(seed))
            self.explainers[name] = IncrementalPDP(name, cfg)
        self.t = 0

    def observe(self, x_t: Mapping[str, float], model, t: int | None = None) -> dict[str, ExplanationFrame]:
        x_t = validate_features(x_t)
        self.t = self.t + 1 if t is None else t
        frames = {}
        for name, explainer in self.explainers.items():
            frame = explainer.explain_one(x_t, model, self.t)
            if frame is not None:
                frames[name] = frame
        return frames
