"""Prequential driver: explain each record with the current model, then learn from it."""

from __future__ import annotations

from typing import Iterable, Iterator

from .engine import ExplanationFrame, MultiExplainer
from .errors import ConfigError, OrderingError
from .streams import StreamRecord

ORDERS = ("explain_then_train", "train_then_explain")


def run_prequential(records: Iterable[StreamRecord], model, explainer: MultiExplainer,
                    order: str = "explain_then_train") -> Iterator[tuple[StreamRecord, dict[str, ExplanationFrame]]]:
    if order not in ORDERS:
        raise ConfigError(f"order must be one of {ORDERS}")
    last_t = None
    for record in records:
        if last_t is not None and record.t <= last_t:
            raise OrderingError(f"record t={record.t} arrived after t={last_t}")
        last_t = record.t
        if order == "train_then_explain":
            model.learn_one(record.x, record.y)
        frames = explainer.observe(record.x, model, record.t)
        if order == "explain_then_train":
            model.learn_one(record.x, record.y)
        yield record, frames
