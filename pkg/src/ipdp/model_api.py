"""Prediction and incremental-learning contracts plus built-in learners.

A feature vector is a plain ``dict`` mapping feature name to a float. Models
carry a fixed schema (ordered feature names) chosen at construction time.
Models may additionally expose ``predict_batch`` taking a 2-D array whose
columns follow ``schema``; the explainer uses it when available.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import InvalidLabelError, InvalidValueError, SchemaError

FeatureVector = dict[str, float]


def validate_features(x: Mapping[str, float], schema: Sequence[str] | None = None) -> FeatureVector:
    """Return a float-valued copy of ``x``; reject non-finite values and schema drift."""
    out = {}
    for name, value in x.items():
        v = float(value)
        if not math.isfinite(v):
            raise InvalidValueError(f"feature {name!r} is not finite: {value!r}")
        out[name] = v
    if schema is not None and (len(out) != len(schema) or any(n not in out for n in schema)):
        unknown = sorted(set(out) - set(schema))
        missing = [n for n in schema if n not in out]
        raise SchemaError(f"schema mismatch: unknown={unknown}, missing={missing}")
    return out


def sigmoid(z: float) -> float:
    if z >= 0:
        e = math.exp(-z)
        return 1.0 / (1.0 + e)
    e = math.exp(z)
    return e / (1.0 + e)


def sigmoid_array(z: np.ndarray) -> np.ndarray:
    # same branches as ``sigmoid``; agrees with it up to exp() round-off
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@runtime_checkable
class PredictionFunction(Protocol):
    def predict(self, x: Mapping[str, float]) -> float: ...


@runtime_checkable
class IncrementalModel(PredictionFunction, Protocol):
    def learn_one(self, x: Mapping[str, float], y: float) -> None: ...


class _SGDModel:
    """Shared state and bookkeeping for the two SGD learners."""

    def __init__(
        self,
        features: Iterable[str],
        learning_rate: float = 0.01,
        weights: Sequence[float] | Mapping[str, float] | None = None,
        bias: float = 0.0,
    ):
        self.schema = tuple(features)
        if not self.schema:
            raise SchemaError("a model needs at least one feature")
        if len(set(self.schema)) != len(self.schema):
            raise SchemaError("feature names must be unique")
        if not learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        self.learning_rate = float(learning_rate)
        if weights is None:
            self.weights = np.zeros(len(self.schema))
        elif isinstance(weights, Mapping):
            self.weights = np.array([float(weights.get(n, 0.0)) for n in self.schema])
        else:
            self.weights = np.array(weights, dtype=float)
            if self.weights.shape != (len(self.schema),):
                raise SchemaError("weights length does not match the schema")
        self.bias = float(bias)

    def _vector(self, x: Mapping[str, float]) -> np.ndarray:
        x = validate_features(x, self.schema)
        return np.array([x[n] for n in self.schema])

    def _score(self, xv: np.ndarray) -> float:
        z = self.bias
        for w, v in zip(self.weights.tolist(), xv.tolist()):
            z += w * v
        return z

    def _score_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.schema):
            raise SchemaError(f"expected an (n, {len(self.schema)}) array")
        z = np.full(X.shape[0], self.bias)
        for j, w in enumerate(self.weights.tolist()):
            z = z + w * X[:, j]
        return z

    def _step(self, xv: np.ndarray, residual: float) -> None:
        self.weights = self.weights - self.learning_rate * residual * xv
        self.bias = self.bias - self.learning_rate * residual

    def get_params(self) -> dict:
        return {"weights": dict(zip(self.schema, self.weights.tolist())), "bias": self.bias}

    def __repr__(self):
        return f"{type(self).__name__}(features={list(self.schema)}, learning_rate={self.learning_rate})"


class SGDLogisticRegression(_SGDModel):
    """Online logistic regression, one gradient step on log-loss per observation.

    ``predict`` returns the probability of class 1.
    """

    def predict(self, x: Mapping[str, float]) -> float:
        return sigmoid(self._score(self._vector(x)))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return sigmoid_array(self._score_batch(X))

    def learn_one(self, x: Mapping[str, float], y: float) -> None:
        if y not in (0, 1):
            raise InvalidLabelError(f"label must be 0 or 1, got {y!r}")
        xv = self._vector(x)
        p = sigmoid(self._score(xv))
        self._step(xv, p - float(y))


class SGDLinearRegression(_SGDModel):
    """Online least squares with the same update shape as the logistic learner."""

    def predict(self, x: Mapping[str, float]) -> float:
        return self._score(self._vector(x))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return self._score_batch(X)

    def learn_one(self, x: Mapping[str, float], y: float) -> None:
        y = float(y)
        if not math.isfinite(y):
            raise InvalidValueError(f"target is not finite: {y!r}")
        xv = self._vector(x)
        self._step(xv, self._score(xv) - y)


class StaticModel:
    """Wraps a plain function as a frozen model; ``learn_one`` does nothing.

    If ``batch_fn`` is given it must compute the same values as ``fn`` on the
    rows of an array whose columns follow ``schema``.
    """

    def __init__(
        self,
        fn: Callable[[Mapping[str, float]], float],
        schema: Sequence[str] | None = None,
        batch_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        self.fn = fn
        self.schema = tuple(schema) if schema is not None else None
        if batch_fn is not None:
            if self.schema is None:
                raise SchemaError("batch_fn requires an explicit schema")
            # instance attribute, so hasattr(model, "predict_batch") stays False without it
            self.predict_batch = lambda X: np.asarray(batch_fn(np.asarray(X, dtype=float)), dtype=float)

    def predict(self, x: Mapping[str, float]) -> float:
        return float(self.fn(x))

    def learn_one(self, x: Mapping[str, float], y: float) -> None:
        pass


def from_function(g: Callable[[Mapping[str, float]], float], schema: Sequence[str] | None = None) -> StaticModel:
    return StaticModel(g, schema)


class ConstantModel:
    def __init__(self, value: float, schema: Sequence[str] | None = None):
        self.value = float(value)
        self.schema = tuple(schema) if schema is not None else None

    def predict(self, x: Mapping[str, float]) -> float:
        return self.value

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(X).shape[0], self.value)

    def learn_one(self, x: Mapping[str, float], y: float) -> None:
        pass


class LinearModel:
    """Frozen affine model ``bias + sum(w_j * x_j)`` over a fixed schema."""

    def __init__(self, weights: Mapping[str, float], bias: float = 0.0, schema: Sequence[str] | None = None):
        self.schema = tuple(schema) if schema is not None else tuple(weights)
        unknown = set(weights) - set(self.schema)
        if unknown:
            raise SchemaError(f"weights for unknown features: {sorted(unknown)}")
        self.weights = np.array([float(weights.get(n, 0.0)) for n in self.schema])
        self.bias = float(bias)

    def predict(self, x: Mapping[str, float]) -> float:
        z = self.bias
        for name, w in zip(self.schema, self.weights.tolist()):
            z += w * float(x[name])
        return z

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        z = np.full(X.shape[0], self.bias)
        for j, w in enumerate(self.weights.tolist()):
            z = z + w * X[:, j]
        return z

    def learn_one(self, x: Mapping[str, float], y: float) -> None:
        pass
