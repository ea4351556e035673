"""Classification metrics, confusion matrices, top-k tables, and reports.

Macro metrics are unweighted means over the classes that actually occur in
the ground truth; classes with zero true samples are excluded rather than
counted as zero. Macro F1 is the mean of per-class F1 scores (not the
harmonic mean of macro precision and macro recall).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .configs import EnsembleConfig
from .taxonomy import ACTIVITIES, N_ACTIVITIES, ActivityLabel, label_from_name

ROW_SUM_TOLERANCE = 1e-9


def _to_indices(labels: Sequence) -> np.ndarray:
    out = np.empty(len(labels), dtype=np.int64)
    for i, label in enumerate(labels):
        if isinstance(label, ActivityLabel):
            out[i] = label.index
        else:
            out[i] = int(label)
    if out.size and (out.min() < 0 or out.max() >= N_ACTIVITIES):
        raise ValueError(f"label index outside 0..{N_ACTIVITIES - 1}")
    return out


@dataclass(eq=False)
class ConfusionMatrix:
    """Integer counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (N_ACTIVITIES, N_ACTIVITIES):
            raise ValueError(f"expected a {N_ACTIVITIES}x{N_ACTIVITIES} matrix")
        if np.any(self.counts < 0):
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_labels(cls, true_idx: np.ndarray, pred_idx: np.ndarray) -> "ConfusionMatrix":
        counts = np.zeros((N_ACTIVITIES, N_ACTIVITIES), dtype=np.int64)
        np.add.at(counts, (true_idx, pred_idx), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def normalize_confusion(matrix: ConfusionMatrix | np.ndarray) -> np.ndarray:
    """Scale each row to sum to 1; all-zero rows stay all-zero."""
    counts = matrix.counts if isinstance(matrix, ConfusionMatrix) else np.asarray(matrix)
    counts = counts.astype(np.float64)
    row_sums = counts.sum(axis=1, keepdims=True)
    safe = np.where(row_sums == 0, 1.0, row_sums)
    out = counts / safe
    return out


def macro_average(values: Sequence[float], support: Sequence[int] | None = None) -> float:
    """Unweighted mean of per-class values, restricted to supported classes."""
    vals = np.asarray(values, dtype=np.float64)
    if support is not None:
        mask = np.asarray(support) > 0
        vals = vals[mask]
    if vals.size == 0:
        raise ValueError("no classes with support")
    return float(vals.mean())


@dataclass
class EvalReport:
    """Per-class and summary metrics for one configuration."""

    name: str
    confusion: ConfusionMatrix
    accuracy: float
    per_class_recall: np.ndarray
    per_class_precision: np.ndarray
    per_class_f1: np.ndarray
    support: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    config: EnsembleConfig | None = None

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": {
                label.name: {
                    "recall": float(self.per_class_recall[label.index]),
                    "precision": float(self.per_class_precision[label.index]),
                    "f1": float(self.per_class_f1[label.index]),
                    "support": int(self.support[label.index]),
                }
                for label in ACTIVITIES
            },
            "confusion": self.confusion.counts.tolist(),
            "config": self.config.to_json_dict() if self.config else None,
        }


def evaluate(
    true_labels: Sequence,
    predicted_labels: Sequence,
    *,
    name: str = "",
    config: EnsembleConfig | None = None,
) -> EvalReport:
    """Score predictions against ground truth.

    Accuracy is trace/total of the confusion matrix; per-class recall and
    precision divide the diagonal by row and column sums. Per-class F1 is
    2pr/(p+r), defined as 0 when p + r = 0.
    """
    if len(true_labels) == 0:
        raise ValueError("cannot evaluate an empty label list")
    if len(true_labels) != len(predicted_labels):
        raise ValueError(
            f"{len(true_labels)} true labels but {len(predicted_labels)} predictions"
        )
    true_idx = _to_indices(true_labels)
    pred_idx = _to_indices(predicted_labels)
    confusion = ConfusionMatrix.from_labels(true_idx, pred_idx)
    counts = confusion.counts
    diag = np.diag(counts).astype(np.float64)
    row = counts.sum(axis=1).astype(np.float64)
    col = counts.sum(axis=0).astype(np.float64)
    recall = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    pr_sum = precision + recall
    f1 = np.divide(
        2 * precision * recall, pr_sum, out=np.zeros_like(diag), where=pr_sum > 0
    )
    support = counts.sum(axis=1)
    return EvalReport(
        name=name,
        confusion=confusion,
        accuracy=float(diag.sum() / counts.sum()),
        per_class_recall=recall,
        per_class_precision=precision,
        per_class_f1=f1,
        support=support,
        macro_precision=macro_average(precision, support),
        macro_recall=macro_average(recall, support),
        macro_f1=macro_average(f1, support),
        config=config,
    )


def top_k(probabilities, k: int) -> list[tuple[ActivityLabel, float]]:
    """The k highest-scoring activities in non-increasing score order.

    Score ties break toward the lower class index.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.shape != (N_ACTIVITIES,):
        raise ValueError(f"expected a vector of {N_ACTIVITIES} scores")
    if not 1 <= k <= N_ACTIVITIES:
        raise ValueError(f"k must be in 1..{N_ACTIVITIES}, got {k}")
    order = sorted(range(N_ACTIVITIES), key=lambda i: (-probs[i], i))
    return [(ACTIVITIES[i], float(probs[i])) for i in order[:k]]


def format_percent(fraction: float) -> str:
    """Render a fraction as a percentage with two decimals (banker's rounding)."""
    return f"{100.0 * fraction:.2f}"


@dataclass
class ComparisonReport:
    """Side-by-side metric table in both human and machine form."""

    text: str
    data: dict


def render_comparison(reports: Sequence[EvalReport]) -> ComparisonReport:
    """Tabulate per-class recall plus summary metrics, one column per report.

    The machine-readable ``data`` mirrors the rendered percentages exactly.
    """
    if not reports:
        raise ValueError("render_comparison needs at least one report")
    columns = [r.name or (r.config.display_name if r.config else "model") for r in reports]
    per_class: dict[str, list[float]] = {}
    rows: list[tuple[str, list[str]]] = []
    for label in ACTIVITIES:
        cells = [format_percent(float(r.per_class_recall[label.index])) for r in reports]
        rows.append((label.name, cells))
        per_class[label.name] = [float(c) for c in cells]
    summary_rows = [
        ("Accuracy", "accuracy", lambda r: r.accuracy),
        ("Macro precision", "macro_precision", lambda r: r.macro_precision),
        ("Macro recall", "macro_recall", lambda r: r.macro_recall),
        ("Macro F1-score", "macro_f1", lambda r: r.macro_f1),
    ]
    summary: dict[str, list[float]] = {}
    for title, key, getter in summary_rows:
        cells = [format_percent(getter(r)) for r in reports]
        rows.append((title, cells))
        summary[key] = [float(c) for c in cells]

    label_width = max(len(name) for name, _ in rows + [("Activity", [])])
    col_widths = [max(len(col), 6) for col in columns]
    header = "Activity".ljust(label_width) + "  " + "  ".join(
        col.rjust(w) for col, w in zip(columns, col_widths)
    )
    divider = "-" * len(header)
    lines = [header, divider]
    for i, (name, cells) in enumerate(rows):
        if i == N_ACTIVITIES:
            lines.append(divider)
        lines.append(
            name.ljust(label_width)
            + "  "
            + "  ".join(cell.rjust(w) for cell, w in zip(cells, col_widths))
        )
    data = {
        "columns": columns,
        "metric": "percent",
        "per_class_recall": per_class,
        "summary": summary,
    }
    return ComparisonReport(text="\n".join(lines) + "\n", data=data)


@dataclass(frozen=True)
class PredictionRow:
    """One scored image for the standalone prediction file format."""

    image_id: str
    true_label: ActivityLabel | None
    predicted_label: ActivityLabel
    scores: tuple[float, ...] | None = None


def write_predictions(rows: Iterable[PredictionRow], sink: str | Path | IO) -> None:
    """Write line-delimited prediction records."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as fp:
            write_predictions(rows, fp)
        return
    for row in rows:
        obj = {
            "image_id": row.image_id,
            "true_label": row.true_label.name if row.true_label else None,
            "predicted_label": row.predicted_label.name,
            "scores": list(row.scores) if row.scores is not None else None,
        }
        sink.write(json.dumps(obj, separators=(",", ":")))
        sink.write("\n")


def read_predictions(source: str | Path | IO) -> list[PredictionRow]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fp:
            return read_predictions(fp)
    rows: list[PredictionRow] = []
    for lineno, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rows.append(
                PredictionRow(
                    image_id=obj["image_id"],
                    true_label=(
                        label_from_name(obj["true_label"])
                        if obj.get("true_label")
                        else None
                    ),
                    predicted_label=label_from_name(obj["predicted_label"]),
                    scores=tuple(obj["scores"]) if obj.get("scores") else None,
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"prediction file line {lineno}: {exc}") from exc
    return rows
