"""Stratified train/validation/test splitting with per-class apportionment.

Per-class counts are apportioned by largest remainder, so every class's
count in every partition is within one sample of exact proportionality.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .records import FeatureRecord
from .taxonomy import ACTIVITIES, ActivityLabel

RATIO_SUM_TOLERANCE = 1e-9

SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint image-id partitions plus the parameters that produced them."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    ratios: tuple[float, float, float]
    seed: int

    @property
    def partitions(self) -> dict[str, tuple[str, ...]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def partition(self, name: str) -> tuple[str, ...]:
        try:
            return self.partitions[name]
        except KeyError:
            raise ValueError(f"unknown partition {name!r}; expected one of {SPLIT_NAMES}")


def apportion(total: int, ratios: Sequence[float]) -> tuple[int, ...]:
    """Largest-remainder apportionment of ``total`` across ``ratios``.

    Ties on the fractional part go to the lower index. Each count differs
    from ``ratio * total`` by less than one.
    """
    quotas = [r * total for r in ratios]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in by_remainder[:leftover]:
        counts[i] += 1
    return tuple(counts)


def _check_ratios(ratios: Sequence[float]) -> tuple[float, float, float]:
    if len(ratios) != 3:
        raise ValueError(f"expected 3 ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError("ratios must be non-negative")
    total = sum(ratios)
    if abs(total - 1.0) > RATIO_SUM_TOLERANCE:
        raise ValueError(f"ratios sum to {total!r}, expected 1")
    return (ratios[0], ratios[1], ratios[2])


def stratified_split(
    records: Sequence[FeatureRecord],
    ratios: Sequence[float],
    seed: int,
) -> DatasetSplit:
    """Split labeled records so each class keeps the requested proportions.

    Within-class shuffling is driven by ``seed`` (one substream per class),
    so the same inputs always produce the same split and different seeds
    change only membership, never per-class counts.
    """
    ratios = _check_ratios(ratios)
    if not records:
        raise ValueError("cannot split an empty record list")
    seen: set[str] = set()
    by_class: dict[int, list[str]] = {}
    for record in records:
        if record.label is None:
            raise ValueError(f"record {record.image_id!r} is unlabeled")
        if record.image_id in seen:
            raise ValueError(f"duplicate image_id {record.image_id!r}")
        seen.add(record.image_id)
        by_class.setdefault(record.label.index, []).append(record.image_id)

    parts: tuple[list[str], list[str], list[str]] = ([], [], [])
    for class_index in sorted(by_class):
        ids = by_class[class_index]
        rng = np.random.default_rng(np.random.SeedSequence((seed, class_index)))
        order = rng.permutation(len(ids))
        shuffled = [ids[i] for i in order]
        counts = apportion(len(ids), ratios)
        start = 0
        for part, count in zip(parts, counts):
            part.extend(shuffled[start : start + count])
            start += count
    return DatasetSplit(
        train=tuple(parts[0]),
        validation=tuple(parts[1]),
        test=tuple(parts[2]),
        ratios=ratios,
        seed=seed,
    )


def class_histogram(records: Iterable[FeatureRecord]) -> dict[ActivityLabel, int]:
    """Count labeled records per activity; every class is present, possibly 0."""
    counts = {label: 0 for label in ACTIVITIES}
    for record in records:
        if record.label is None:
            raise ValueError(f"record {record.image_id!r} is unlabeled")
        counts[record.label] += 1
    return counts


def save_split(split: DatasetSplit, sink: str | Path | IO) -> None:
    """Write a split file (deterministic bytes for identical splits)."""
    payload = {
        "ratios": list(split.ratios),
        "seed": split.seed,
        "train": list(split.train),
        "validation": list(split.validation),
        "test": list(split.test),
    }
    text = json.dumps(payload, separators=(",", ":"))
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text + "\n", encoding="utf-8")
    else:
        sink.write(text + "\n")


def load_split(source: str | Path | IO) -> DatasetSplit:
    if isinstance(source, (str, Path)):
        obj = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        obj = json.load(source)
    ratios = obj["ratios"]
    return DatasetSplit(
        train=tuple(obj["train"]),
        validation=tuple(obj["validation"]),
        test=tuple(obj["test"]),
        ratios=(float(ratios[0]), float(ratios[1]), float(ratios[2])),
        seed=int(obj["seed"]),
    )
