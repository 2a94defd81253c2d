"""Stream sources: a Gaussian hyperplane generator with a sudden concept
switch, and CSV ingestion.

Records are numbered from ``t = 1``.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError, IngestionError
from .model_api import sigmoid


@dataclass(frozen=True)
class StreamRecord:
    x: dict
    y: float
    t: int


@dataclass(frozen=True)
class HyperplaneConcept:
    """``Z = beta1*X1 + beta2*X2 + eps`` with Gaussian inputs; ``y = 1`` iff ``sigmoid(Z) >= tau``."""

    mu1: float = 100.0
    mu2: float = 200.0
    sigma1_sq: float = 20.0
    sigma2_sq: float = 40.0
    beta1: float = 1.0
    beta2: float = -0.5
    mu_eps: float = 0.0
    sigma_eps_sq: float = 1.0
    tau: float = 0.1

    def __post_init__(self):
        if not (self.sigma1_sq > 0 and self.sigma2_sq > 0):
            raise ConfigError("feature variances must be positive")
        if self.sigma_eps_sq < 0:
            raise ConfigError("noise variance must be non-negative")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must lie in (0, 1)")

    def score(self, x1: float, x2: float, eps: float) -> float:
        return self.beta1 * x1 + self.beta2 * x2 + eps

    def label(self, x1: float, x2: float, eps: float) -> int:
        return int(sigmoid(self.score(x1, x2, eps)) >= self.tau)


CONCEPT_A = HyperplaneConcept()
CONCEPT_B = HyperplaneConcept(mu1=200.0, mu2=100.0, sigma1_sq=40.0, sigma2_sq=20.0, beta1=-0.5, beta2=1.0)

FEATURES = ("x1", "x2")


class _GaussianDraws:
    """Three independent standard normal streams (x1, x2, noise), drawn in blocks."""

    def __init__(self, seed: int, block: int = 4096):
        self._rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
        self._block = block
        self._buf = np.empty((3, 0))
        self._pos = 0

    def next(self) -> tuple[float, float, float]:
        if self._pos == self._buf.shape[1]:
            self._buf = np.stack([rng.standard_normal(self._block) for rng in self._rngs])
            self._pos = 0
        z = self._buf[:, self._pos]
        self._pos += 1
        return float(z[0]), float(z[1]), float(z[2])


def _draw(concept: HyperplaneConcept, z1: float, z2: float, ze: float) -> tuple[float, float, float]:
    x1 = concept.mu1 + math.sqrt(concept.sigma1_sq) * z1
    x2 = concept.mu2 + math.sqrt(concept.sigma2_sq) * z2
    eps = concept.mu_eps + math.sqrt(concept.sigma_eps_sq) * ze
    return x1, x2, eps


class DriftSchedule:
    """Emits records from ``concept_a`` while ``t < switch_at`` and from ``concept_b`` afterwards.

    All concepts transform the same seeded standard normal draws, so the
    records before the switch equal those of ``HyperplaneStream(concept_a, seed)``.
    The noise of the last record is kept in ``last_noise``.
    """

    def __init__(self, concept_a: HyperplaneConcept = CONCEPT_A, concept_b: HyperplaneConcept = CONCEPT_B,
                 switch_at: int = 20000, seed: int = 0):
        if switch_at < 1:
            raise ConfigError("switch_at must be >= 1")
        self.concept_a = concept_a
        self.concept_b = concept_b
        self.switch_at = int(switch_at)
        self.seed = seed
        self._draws = _GaussianDraws(seed)
        self.t = 0
        self.last_noise: float | None = None

    def concept_at(self, t: int) -> HyperplaneConcept:
        return self.concept_a if t < self.switch_at else self.concept_b

    def next(self) -> StreamRecord:
        self.t += 1
        concept = self.concept_at(self.t)
        x1, x2, eps = _draw(concept, *self._draws.next())
        self.last_noise = eps
        return StreamRecord({"x1": x1, "x2": x2}, float(concept.label(x1, x2, eps)), self.t)

    __next__ = next

    def __iter__(self):
        return self

    def take(self, n: int) -> list[StreamRecord]:
        return [self.next() for _ in range(n)]


class HyperplaneStream(DriftSchedule):
    def __init__(self, concept: HyperplaneConcept = CONCEPT_A, seed: int = 0):
        super().__init__(concept, concept, switch_at=1, seed=seed)


def noise_sequence(concepts: Sequence[HyperplaneConcept], seed: int) -> np.ndarray:
    """Re-derive the noise terms of a seeded stream, one concept per record."""
    draws = _GaussianDraws(seed)
    return np.array([_draw(c, *draws.next())[2] for c in concepts])


# ---------------------------------------------------------------------------
# CSV

_BINARY = re.compile(r"^binary\((.*)\)$")


@dataclass
class ColumnType:
    kind: str  # "numeric" or "binary"
    mapping: dict = field(default_factory=dict)

    def parse(self, raw: str) -> float:
        if self.kind == "binary":
            if raw not in self.mapping:
                raise ValueError(f"unmapped categorical value {raw!r}")
            return self.mapping[raw]
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {raw!r}")
        return value


def parse_type_map(entries: Iterable[str] | Mapping[str, str] | None) -> dict[str, ColumnType]:
    """Parse ``name:numeric`` / ``name:binary(a=0,b=1)`` entries."""
    if entries is None:
        return {}
    if isinstance(entries, Mapping):
        entries = [f"{k}:{v}" for k, v in entries.items()]
    out = {}
    for entry in entries:
        name, sep, spec = entry.partition(":")
        name, spec = name.strip(), spec.strip()
        if not sep or not name:
            raise ConfigError(f"bad type map entry {entry!r}")
        if spec == "numeric":
            out[name] = ColumnType("numeric")
            continue
        match = _BINARY.match(spec)
        if not match:
            raise ConfigError(f"unknown column type in {entry!r}")
        mapping = {}
        for pair in match.group(1).split(","):
            key, eq, code = pair.partition("=")
            if not eq or code.strip() not in ("0", "1"):
                raise ConfigError(f"binary mapping must look like value=0/value=1: {entry!r}")
            mapping[key.strip()] = float(code.strip())
        if sorted(mapping.values()) != [0.0, 1.0]:
            raise ConfigError(f"binary column {name!r} needs exactly one value per code")
        out[name] = ColumnType("binary", mapping)
    return out


def csv_source(path, target_column: str, type_map=None) -> Iterator[StreamRecord]:
    """Yield records of a UTF-8, comma-separated file with a header row.

    With a type map only the listed columns become features (the target may be
    listed too, e.g. to map class names); without one every other column is
    numeric.
    """
    types = parse_type_map(type_map)
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot open {path}: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise IngestionError("file is empty, header row required", line=1)
        header = [h.strip() for h in header]
        if target_column not in header:
            raise IngestionError(f"target column {target_column!r} missing", line=1, column=target_column)
        missing = [name for name in types if name not in header]
        if missing:
            raise IngestionError(f"columns missing from header: {missing}", line=1, column=missing[0])
        features = [h for h in header if h != target_column and (not types or h in types)]
        index = {h: i for i, h in enumerate(header)}
        target_type = types.get(target_column, ColumnType("numeric"))
        t = 0
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != len(header):
                raise IngestionError(f"expected {len(header)} cells, found {len(row)}", line=line)
            x = {}
            for name in features:
                try:
                    x[name] = types.get(name, ColumnType("numeric")).parse(row[index[name]].strip())
                except ValueError as exc:
                    raise IngestionError(str(exc), line=line, column=name) from None
            try:
                y = target_type.parse(row[index[target_column]].strip())
            except ValueError as exc:
                raise IngestionError(str(exc), line=line, column=target_column) from None
            t += 1
            yield StreamRecord(x, y, t)


def write_csv(records: Iterable[StreamRecord], path, target_column: str = "y") -> int:
    """Write records with ``repr`` floats (exact round trip); returns the row count."""
    n = 0
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        header = None
        for rec in records:
            if header is None:
                header = list(rec.x)
                writer.writerow(header + [target_column])
            writer.writerow([repr(float(rec.x[h])) for h in header] + [repr(float(rec.y))])
            n += 1
        if header is None:
            writer.writerow([target_column])
    return n


def concept_from_dict(params: Mapping | None, default: HyperplaneConcept) -> HyperplaneConcept:
    if not params:
        return default
    known = asdict(default)
    unknown = set(params) - set(known)
    if unknown:
        raise ConfigError(f"unknown concept parameters: {sorted(unknown)}")
    return HyperplaneConcept(**{**known, **params})
