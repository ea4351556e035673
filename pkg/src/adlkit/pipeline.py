"""Dataset-level glue: fuse records into matrices, train, predict, compare."""

from __future__ import annotations

import numpy as np

from .configs import EnsembleConfig
from .evaluation import EvalReport, PredictionRow, evaluate
from .forest import Forest, train_forest
from .fusion import fuse, prob_vector
from .records import FeatureRecord
from .splits import DatasetSplit
from .taxonomy import ACTIVITIES


class ComparisonError(RuntimeError):
    """One or more configurations failed during a comparison run."""

    def __init__(self, failures: list[tuple[str, Exception]]):
        self.failures = failures
        lines = ", ".join(f"{name}: {exc}" for name, exc in failures)
        super().__init__(f"{len(failures)} configuration(s) failed: {lines}")


def fuse_dataset(
    records: list[FeatureRecord], config: EnsembleConfig
) -> tuple[np.ndarray, np.ndarray | None, list[str]]:
    """Stack fused vectors for all records; labels are None if any is missing."""
    if not records:
        raise ValueError("no records to fuse")
    try:
        vectors = [fuse(record, config.combination) for record in records]
    except ValueError as exc:
        raise ValueError(f"{exc} (required by {config.display_name})") from exc
    X = np.vstack(vectors)
    ids = [record.image_id for record in records]
    if any(record.label is None for record in records):
        return X, None, ids
    y = np.asarray([record.label.index for record in records], dtype=np.int64)
    return X, y, ids


def dedupe_by_image_id(records: list[FeatureRecord]) -> list[FeatureRecord]:
    """First record per image_id; duplicate ids must carry the same label.

    Used when several backbones describe the same image set and a split
    must be built over the underlying images.
    """
    seen: dict[str, FeatureRecord] = {}
    out: list[FeatureRecord] = []
    for record in records:
        kept = seen.get(record.image_id)
        if kept is None:
            seen[record.image_id] = record
            out.append(record)
        elif kept.label != record.label:
            raise ValueError(
                f"image {record.image_id!r} labeled inconsistently across feature files"
            )
    return out


def select_partition(
    records: list[FeatureRecord], split: DatasetSplit, partition: str
) -> list[FeatureRecord]:
    """Records whose image_id falls in the named partition, split order ignored."""
    wanted = set(split.partition(partition))
    picked = [record for record in records if record.image_id in wanted]
    if len(picked) != len(wanted):
        missing = len(wanted) - len(picked)
        raise ValueError(
            f"partition {partition!r} references {missing} image_id(s) "
            "absent from the feature records"
        )
    if not picked:
        raise ValueError(f"partition {partition!r} is empty")
    return picked


def train_on_partition(
    records: list[FeatureRecord],
    config: EnsembleConfig,
    split: DatasetSplit | None = None,
    *,
    partition: str = "train",
    n_jobs: int | None = None,
) -> Forest:
    """Fuse the chosen partition (or all records) and train a forest on it."""
    subset = select_partition(records, split, partition) if split else records
    X, y, _ = fuse_dataset(subset, config)
    if y is None:
        raise ValueError("training records must all be labeled")
    return train_forest(X, y, config, n_jobs=n_jobs)


def predict_records(forest: Forest, records: list[FeatureRecord]) -> list[PredictionRow]:
    """Predict every record; scores are vote fractions over the 21 classes."""
    X, _, ids = fuse_dataset(records, forest.config)
    labels, votes = forest.predict_batch(X)
    votes = votes.astype(np.float64) / forest.n_trees
    return [
        PredictionRow(
            image_id=ids[i],
            true_label=records[i].label,
            predicted_label=ACTIVITIES[int(labels[i])],
            scores=tuple(float(v) for v in votes[i]),
        )
        for i in range(len(records))
    ]


def evaluate_forest(
    forest: Forest,
    records: list[FeatureRecord],
    split: DatasetSplit | None = None,
    *,
    partition: str = "test",
    name: str | None = None,
) -> EvalReport:
    subset = select_partition(records, split, partition) if split else records
    if any(record.label is None for record in subset):
        raise ValueError("evaluation records must all be labeled")
    X, y, _ = fuse_dataset(subset, forest.config)
    labels, _ = forest.predict_batch(X)
    return evaluate(
        list(y),
        list(labels),
        name=name or forest.config.display_name,
        config=forest.config,
    )


def argmax_prob_report(
    records: list[FeatureRecord],
    split: DatasetSplit | None = None,
    *,
    partition: str = "test",
    name: str = "argmax(prob)",
) -> EvalReport:
    """Baseline pseudo-classifier: predict the argmax of each prob vector."""
    subset = select_partition(records, split, partition) if split else records
    true: list[int] = []
    pred: list[int] = []
    for record in subset:
        if record.label is None:
            raise ValueError("baseline evaluation records must all be labeled")
        true.append(record.label.index)
        pred.append(int(np.argmax(prob_vector(record))))
    return evaluate(true, pred, name=name)


def run_comparison(
    records_by_backbone: dict[str, list[FeatureRecord]],
    configs: list[EnsembleConfig],
    split: DatasetSplit,
    *,
    with_baseline: bool = False,
    partition: str = "test",
    n_jobs: int | None = None,
) -> list[EvalReport]:
    """Train and evaluate every configuration on a shared split.

    With ``with_baseline``, an argmax-of-prob column is inserted before each
    backbone's first ensemble column. Failures are collected per
    configuration and raised together as ComparisonError.
    """
    if not configs:
        raise ValueError("no configurations to compare")
    reports: list[EvalReport] = []
    failures: list[tuple[str, Exception]] = []
    seen_backbones: set[str] = set()
    for config in configs:
        try:
            records = records_by_backbone[config.backbone]
        except KeyError:
            failures.append(
                (config.display_name, ValueError(f"no features for backbone {config.backbone!r}"))
            )
            continue
        if with_baseline and config.backbone not in seen_backbones:
            seen_backbones.add(config.backbone)
            try:
                reports.append(
                    argmax_prob_report(
                        records,
                        split,
                        partition=partition,
                        name=_display_backbone(config),
                    )
                )
            except Exception as exc:  # collected, not fatal
                failures.append((f"{config.backbone} baseline", exc))
        try:
            forest = train_on_partition(records, config, split, n_jobs=n_jobs)
            reports.append(
                evaluate_forest(forest, records, split, partition=partition)
            )
        except Exception as exc:
            failures.append((config.display_name, exc))
    if failures:
        raise ComparisonError(failures)
    return reports


def _display_backbone(config: EnsembleConfig) -> str:
    return config.display_name.split("+RF")[0]
