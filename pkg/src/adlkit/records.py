"""Per-image feature records and the line-delimited file format.

Each line of a feature file is one JSON object::

    {"image_id": "...", "user_id": "...", "timestamp": "2015-03-02T15:43:01+00:00",
     "backbone": "alexnet", "label": "Driving" | null,
     "features": {"fc6": [...4096 floats...], "prob": [...21 floats...]}}

Feature values are stored as float32; the writer emits enough digits to
round-trip them exactly. Unknown top-level keys are ignored so sibling
tools may extend the format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

from .taxonomy import ActivityLabel, N_ACTIVITIES, label_from_name

# Standard layer sizes for the supported backbone outputs.
DEFAULT_LAYER_SCHEMA: dict[str, int] = {
    "fc6": 4096,
    "pool5_7x7": 1024,
    "logits": N_ACTIVITIES,
    "prob": N_ACTIVITIES,
}

PROB_SUM_TOLERANCE = 1e-6


class RecordParseError(ValueError):
    """A line that is not a well-formed feature record."""


class SchemaError(ValueError):
    """A feature vector that violates the declared layer schema."""


@dataclass(frozen=True)
class FeatureRecord:
    """One image's identity, provenance, label, and named feature vectors."""

    image_id: str
    user_id: str
    timestamp: datetime
    backbone: str
    features: Mapping[str, np.ndarray] = field(default_factory=dict)
    label: ActivityLabel | None = None

    def with_label(self, label: ActivityLabel | None) -> "FeatureRecord":
        return replace(self, label=label)


def _parse_timestamp(raw: str) -> datetime:
    # Python 3.10's fromisoformat rejects a trailing Z.
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        raise ValueError("timestamp lacks a timezone offset")
    return ts


def validate_features(
    features: Mapping[str, np.ndarray],
    expected_schema: Mapping[str, int] | None,
) -> None:
    """Check layer lengths, finiteness, and the probability simplex.

    With a schema, every present layer must be declared in it and have the
    declared length. Without one, only intra-record checks run.
    """
    for layer, vec in features.items():
        if expected_schema is not None:
            if layer not in expected_schema:
                raise SchemaError(f"unknown layer {layer!r}")
            expected = expected_schema[layer]
            if vec.shape[0] != expected:
                raise SchemaError(f"{layer}: expected {expected}, got {vec.shape[0]}")
        if vec.ndim != 1:
            raise SchemaError(f"{layer}: expected a flat vector")
        if not np.all(np.isfinite(vec)):
            raise SchemaError(f"{layer}: non-finite value")
    prob = features.get("prob")
    if prob is not None:
        if np.any(prob < 0):
            raise SchemaError("prob: negative entry")
        total = float(prob.sum(dtype=np.float64))
        if not math.isclose(total, 1.0, abs_tol=PROB_SUM_TOLERANCE):
            raise SchemaError(f"prob: entries sum to {total!r}, expected 1")


def record_from_dict(obj: dict, expected_schema: Mapping[str, int] | None) -> FeatureRecord:
    try:
        image_id = obj["image_id"]
        user_id = obj["user_id"]
        timestamp = _parse_timestamp(obj["timestamp"])
        backbone = obj["backbone"]
        raw_features = obj.get("features", {})
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise RecordParseError(str(exc)) from exc
    features = {
        layer: np.asarray(vec, dtype=np.float32) for layer, vec in raw_features.items()
    }
    validate_features(features, expected_schema)
    raw_label = obj.get("label")
    label = label_from_name(raw_label) if raw_label is not None else None
    return FeatureRecord(
        image_id=str(image_id),
        user_id=str(user_id),
        timestamp=timestamp,
        backbone=str(backbone),
        features=features,
        label=label,
    )


def _open_lines(source: str | Path | IO) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fp:
            yield from fp
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def load_feature_records(
    source: str | Path | IO,
    expected_schema: Mapping[str, int] | None = DEFAULT_LAYER_SCHEMA,
) -> list[FeatureRecord]:
    """Read and validate a line-delimited feature file, preserving order.

    ``expected_schema`` maps layer names to required vector lengths; pass
    None to instead require that all records agree with the first
    occurrence of each layer.

    Raises RecordParseError (with the line number), SchemaError, or
    TaxonomyError on invalid input.
    """
    records: list[FeatureRecord] = []
    inferred: dict[str, int] | None = None if expected_schema is not None else {}
    for lineno, line in enumerate(_open_lines(source), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordParseError(f"line {lineno}: {exc}") from exc
        if not isinstance(obj, dict):
            raise RecordParseError(f"line {lineno}: expected an object")
        try:
            record = record_from_dict(obj, expected_schema)
        except RecordParseError as exc:
            raise RecordParseError(f"line {lineno}: {exc}") from exc
        except SchemaError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from exc
        if inferred is not None:
            for layer, vec in record.features.items():
                seen = inferred.setdefault(layer, vec.shape[0])
                if vec.shape[0] != seen:
                    raise SchemaError(
                        f"line {lineno}: {layer}: expected {seen}, got {vec.shape[0]}"
                    )
        records.append(record)
    return records


def record_to_dict(record: FeatureRecord) -> dict:
    return {
        "image_id": record.image_id,
        "user_id": record.user_id,
        "timestamp": record.timestamp.isoformat(),
        "backbone": record.backbone,
        "label": record.label.name if record.label is not None else None,
        "features": {
            layer: [float(v) for v in vec] for layer, vec in record.features.items()
        },
    }


def dump_feature_records(records: Iterable[FeatureRecord], sink: str | Path | IO) -> None:
    """Write records in the line-delimited format (one JSON object per line)."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as fp:
            dump_feature_records(records, fp)
        return
    for record in records:
        sink.write(json.dumps(record_to_dict(record), separators=(",", ":")))
        sink.write("\n")
