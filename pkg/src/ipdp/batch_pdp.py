"""Batch partial dependence and ICE curves over a fixed dataset.

Used as the static ground truth the incremental estimates are compared to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, InvalidValueError, SchemaError


@dataclass
class Dataset:
    X: np.ndarray
    schema: tuple[str, ...]
    y: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.schema = tuple(self.schema)
        if self.X.ndim != 2 or self.X.shape[0] < 1:
            raise ConfigError("a dataset needs at least one row")
        if self.X.shape[1] != len(self.schema):
            raise SchemaError("column count does not match the schema")
        if not np.all(np.isfinite(self.X)):
            raise InvalidValueError("dataset contains non-finite values")

    @classmethod
    def from_records(cls, records: Sequence[Mapping[str, float]], schema: Sequence[str] | None = None,
                     y: Sequence[float] | None = None) -> "Dataset":
        if not records:
            raise ConfigError("a dataset needs at least one row")
        schema = tuple(schema) if schema is not None else tuple(records[0])
        try:
            X = [[float(r[name]) for name in schema] for r in records]
        except KeyError as exc:
            raise SchemaError(f"record misses feature {exc.args[0]!r}") from None
        for i, r in enumerate(records):
            if len(r) != len(schema):
                raise SchemaError(f"record {i} does not share the dataset schema")
        return cls(np.array(X), schema, None if y is None else np.asarray(y, dtype=float))

    def __len__(self):
        return self.X.shape[0]

    def rows(self):
        for row in self.X.tolist():
            yield dict(zip(self.schema, row))

    def column(self, feature: str) -> np.ndarray:
        return self.X[:, self._index(feature)]

    def _index(self, feature: str) -> int:
        try:
            return self.schema.index(feature)
        except ValueError:
            raise SchemaError(f"feature {feature!r} not in schema {list(self.schema)}") from None


def _predict_rows(model, X: np.ndarray, schema: Sequence[str]) -> np.ndarray:
    model_schema = getattr(model, "schema", None)
    if model_schema is not None and hasattr(model, "predict_batch"):
        order = [list(schema).index(n) for n in model_schema]
        return np.asarray(model.predict_batch(X[:, order]), dtype=float)
    return np.array([model.predict(dict(zip(schema, row))) for row in X.tolist()], dtype=float)


def ice_matrix(model, data: Dataset, feature: str, grid: Sequence[float]) -> np.ndarray:
    """(n, len(grid)) array: row i is the ICE curve of observation i."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] == 0:
        raise ConfigError("grid must be a non-empty 1-D sequence")
    col = data._index(feature)
    n, g = len(data), grid.shape[0]
    probes = np.repeat(data.X, g, axis=0)
    probes[:, col] = np.tile(grid, n)
    return _predict_rows(model, probes, data.schema).reshape(n, g)


def ice_curve(model, x: Mapping[str, float], feature: str, grid: Sequence[float]) -> np.ndarray:
    if feature not in x:
        raise SchemaError(f"feature {feature!r} not in observation")
    data = Dataset.from_records([x])
    return ice_matrix(model, data, feature, grid)[0]


def batch_pdp(model, data: Dataset, feature: str, grid: Sequence[float]) -> np.ndarray:
    """Monte-Carlo partial dependence: mean ICE value at every grid point."""
    return ice_matrix(model, data, feature, grid).mean(axis=0)


def default_grid(data: Dataset, feature: str, m: int = 20) -> np.ndarray:
    """``m`` equidistant points between the feature's observed min and max."""
    if m < 2:
        raise ConfigError("grid needs at least 2 points")
    col = data.column(feature)
    return np.linspace(col.min(), col.max(), m)
