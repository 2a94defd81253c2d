"""Command line interface.

Subcommands::

    ipdp explain    prequential run, JSON-lines explanation frames
    ipdp detect     same run plus ADWIN on each feature's importance, JSON-lines drift events
    ipdp batch-pdp  batch partial dependence curve of a model over a CSV file
    ipdp generate   write a hyperplane stream to CSV

Exit codes: 0 ok, 2 configuration error, 3 ingestion error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import itertools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

from .batch_pdp import Dataset, batch_pdp, default_grid
from .drift import ExplanationDriftMonitor
from .engine import MinMaxRange, MultiExplainer, PdpConfig, QuantileRange
from .errors import ConfigError, IngestionError, IPDPError, SchemaError
from .model_api import ConstantModel, LinearModel, SGDLinearRegression, SGDLogisticRegression
from .prequential import run_prequential
from .streams import CONCEPT_A, CONCEPT_B, DriftSchedule, concept_from_dict, csv_source, write_csv

logger = logging.getLogger("ipdp")

EXIT_OK, EXIT_CONFIG, EXIT_INGEST, EXIT_RUNTIME = 0, 2, 3, 4

FRAME_SCHEMA = {
    "type": "object",
    "required": ["t", "feature", "grid", "estimates", "importance", "eval_min", "eval_max"],
    "additionalProperties": False,
    "properties": {
        "t": {"type": "integer", "minimum": 1},
        "feature": {"type": "string"},
        "grid": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "estimates": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "importance": {"type": "number", "minimum": 0},
        "eval_min": {"type": "number"},
        "eval_max": {"type": "number"},
    },
}

EVENT_SCHEMA = {
    "type": "object",
    "required": ["t", "feature", "frame"],
    "additionalProperties": False,
    "properties": {
        "t": {"type": "integer", "minimum": 1},
        "feature": {"type": "string"},
        "frame": FRAME_SCHEMA,
    },
}

DEFAULT_CONFIG: dict[str, Any] = {
    "source": {"type": "hyperplane", "steps": 40000, "switch_at": 20000},
    "model": {"type": "sgd_logistic", "learning_rate": 0.01},
    "explainer": {"alpha": 0.001, "grid_size": 20, "range": {"type": "minmax", "window": 2000}},
    "detector": {"delta": 0.002, "max_buckets": 5},
    "order": "explain_then_train",
    "cadence": 1,
    "seed": 0,
    "out": "-",
}


# ---------------------------------------------------------------------------
# config handling


def load_config(path: str | None, overrides: dict[str, Any]) -> dict[str, Any]:
    config = json.loads(json.dumps(DEFAULT_CONFIG))
    if path:
        try:
            user = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        for key, value in user.items():
            base = config.get(key)
            # nested sections merge unless they switch to another "type"
            if isinstance(value, dict) and isinstance(base, dict) and value.get("type", base.get("type")) == base.get("type"):
                config[key] = {**base, **value}
            else:
                config[key] = value
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("alpha", "grid_size"):
            config["explainer"][key] = value
        elif key == "steps":
            config["source"]["steps"] = value
        else:
            config[key] = value
    if int(config.get("cadence", 1)) < 1:
        raise ConfigError("cadence must be >= 1")
    return config


def build_source(spec: dict, seed: int):
    kind = spec.get("type", "hyperplane")
    if kind == "hyperplane":
        steps = int(spec.get("steps", 40000))
        if steps < 0:
            raise ConfigError("steps must be >= 0")
        schedule = DriftSchedule(
            concept_from_dict(spec.get("concept_a"), CONCEPT_A),
            concept_from_dict(spec.get("concept_b"), CONCEPT_B),
            switch_at=int(spec.get("switch_at", 20000)),
            seed=int(seed),
        )
        return itertools.islice(schedule, steps)
    if kind == "csv":
        if "path" not in spec or "target" not in spec:
            raise ConfigError("csv source needs 'path' and 'target'")
        records = csv_source(spec["path"], spec["target"], spec.get("types"))
        if "steps" in spec:
            records = itertools.islice(records, int(spec["steps"]))
        return records
    raise ConfigError(f"unknown source type {kind!r}")


def build_model(spec: dict, schema):
    kind = spec.get("type")
    params = {k: v for k, v in spec.items() if k != "type"}
    try:
        if kind == "sgd_logistic":
            return SGDLogisticRegression(schema, **params)
        if kind == "sgd_linear":
            return SGDLinearRegression(schema, **params)
        if kind == "constant":
            return ConstantModel(params.get("value", 0.0), schema)
        if kind == "linear":
            return LinearModel(params.get("weights", {}), params.get("bias", 0.0), schema)
    except TypeError as exc:
        raise ConfigError(f"bad model parameters for {kind!r}: {exc}") from None
    except SchemaError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown model type {kind!r}")


def build_pdp_config(spec: dict, seed: int) -> PdpConfig:
    rng = dict(spec.get("range", {"type": "quantile"}))
    kind = rng.pop("type", "quantile")
    try:
        if kind == "minmax":
            strategy = MinMaxRange(**rng)
        elif kind == "quantile":
            strategy = QuantileRange(**rng)
        else:
            raise ConfigError(f"unknown range type {kind!r}")
        return PdpConfig(float(spec.get("alpha", 0.001)), int(spec.get("grid_size", 20)), strategy, int(seed))
    except TypeError as exc:
        raise ConfigError(f"bad range parameters: {exc}") from None


def _peek(records):
    records = iter(records)
    first = next(records, None)
    if first is None:
        raise ConfigError("source produced no records")
    return first, itertools.chain([first], records)


# ---------------------------------------------------------------------------
# runs


def run_stream(config: dict, on_frame: Callable | None = None, on_event: Callable | None = None) -> dict:
    """Prequential run described by ``config``; returns a summary with state sizes."""
    seed = int(config.get("seed", 0))
    cadence = int(config.get("cadence", 1))
    first, records = _peek(build_source(config["source"], seed))
    schema = list(first.x)
    features = config.get("features") or schema
    unknown = [f for f in features if f not in schema]
    if unknown:
        raise ConfigError(f"features not in source schema {schema}: {unknown}")
    model = build_model(config["model"], schema)
    explainer = MultiExplainer(features, build_pdp_config(config.get("explainer", {}), seed))
    monitor = None
    if on_event is not None:
        det = config.get("detector", {})
        monitor = ExplanationDriftMonitor(features, **det)
    n = 0
    for record, frames in run_prequential(records, model, explainer, config.get("order", "explain_then_train")):
        n += 1
        for name in features:
            frame = frames.get(name)
            if frame is None:
                continue
            if on_frame is not None and frame.t % cadence == 0:
                on_frame(frame)
            if monitor is not None:
                event = monitor.update(frame)
                if event is not None:
                    on_event(event)
    return {
        "steps": n,
        "model": model,
        "explainer": explainer,
        "monitor": monitor,
        "state_sizes": _state_sizes(explainer, monitor),
    }


def _state_sizes(explainer: MultiExplainer, monitor) -> dict:
    sizes = {}
    for name, ex in explainer.explainers.items():
        sizes[name] = {
            "range_store": len(ex.state.range_store),
            "grid": int(ex.state.raw_grid.shape[0]),
            "estimates": int(ex.state.raw_estimates.shape[0]),
        }
        if monitor is not None and name in monitor.detectors:
            sizes[name]["adwin_buckets"] = monitor.detectors[name].n_buckets
    return sizes


@contextlib.contextmanager
def _open_out(path: str):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
            yield handle


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def cmd_explain(config: dict) -> int:
    with _open_out(config.get("out")) as out:
        run_stream(config, on_frame=lambda f: out.write(_dump(f.to_dict()) + "\n"))
    return EXIT_OK


def cmd_detect(config: dict) -> int:
    with _open_out(config.get("out")) as out:
        run_stream(config, on_event=lambda e: out.write(_dump(e.to_dict()) + "\n"))
    return EXIT_OK


def cmd_generate(config: dict) -> int:
    spec = dict(config["source"])
    if spec.get("type", "hyperplane") != "hyperplane":
        raise ConfigError("generate only supports the hyperplane source")
    records = build_source(spec, int(config.get("seed", 0)))
    out = config.get("out")
    if out in (None, "-"):
        raise ConfigError("generate needs --out <path.csv>")
    write_csv(records, out)
    return EXIT_OK


def cmd_batch_pdp(config: dict, data_path: str, feature: str, target: str | None, types=None) -> int:
    if target is None:
        raise ConfigError("batch-pdp needs --target to separate the label column")
    records = list(csv_source(data_path, target, types))
    if not records:
        raise IngestionError("data file has no rows")
    schema = list(records[0].x)
    if feature not in schema:
        raise ConfigError(f"feature {feature!r} not in data schema {schema}")
    model = build_model(config["model"], schema)
    for rec in records:  # one offline pass; no-op for frozen models
        model.learn_one(rec.x, rec.y)
    data = Dataset.from_records([r.x for r in records], schema)
    grid = default_grid(data, feature, int(config["explainer"].get("grid_size", 20)))
    curve = batch_pdp(model, data, feature, grid)
    out = config.get("out")
    if out not in (None, "-") and str(out).endswith(".csv"):
        with Path(out).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["grid", "estimate"])
            writer.writerows([repr(float(g)), repr(float(e))] for g, e in zip(grid, curve))
    else:
        with _open_out(out) as handle:
            handle.write(_dump({"feature": feature, "grid": grid.tolist(), "estimates": curve.tolist()}) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path ('-' for stdout)")
    common.add_argument("--cadence", type=int, help="serialize every n-th frame")
    common.add_argument("--alpha", type=float, help="smoothing parameter")
    common.add_argument("--grid-size", type=int, dest="grid_size", help="number of grid points")
    common.add_argument("--steps", type=int, help="number of generated records")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ipdp", description="Incremental partial dependence for data streams")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("explain", parents=[common], help="write explanation frames as JSON lines")
    sub.add_parser("detect", parents=[common], help="write ADWIN drift events on feature importance")
    sub.add_parser("generate", parents=[common], help="write a hyperplane stream to CSV")
    batch = sub.add_parser("batch-pdp", parents=[common], help="batch PDP of a model over a CSV file")
    batch.add_argument("--data", required=True, help="CSV file")
    batch.add_argument("--feature", required=True)
    batch.add_argument("--target", help="label column of the CSV")
    batch.add_argument("--types", nargs="*", help="type map entries, e.g. day:binary(mon=0,tue=1)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {k: getattr(args, k) for k in ("seed", "out", "cadence", "alpha", "grid_size", "steps")}
    try:
        config = load_config(args.config, overrides)
        if args.command == "explain":
            return cmd_explain(config)
        if args.command == "detect":
            return cmd_detect(config)
        if args.command == "generate":
            return cmd_generate(config)
        return cmd_batch_pdp(config, args.data, args.feature, args.target, args.types)
    except IngestionError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IPDPError, ValueError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
