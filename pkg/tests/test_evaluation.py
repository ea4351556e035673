import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adlkit.evaluation import (
    ConfusionMatrix,
    PredictionRow,
    evaluate,
    format_percent,
    macro_average,
    normalize_confusion,
    read_predictions,
    render_comparison,
    top_k,
    write_predictions,
)
from adlkit.taxonomy import ACTIVITIES, label_from_name

# Published per-class recall columns used as macro-average fixtures
# (percent values, canonical class order).
BASELINE_RECALLS = [
    82.17, 100.00, 84.52, 61.88, 81.58, 84.09, 70.89, 76.56, 65.31, 89.92,
    78.01, 69.40, 88.74, 44.74, 89.24, 31.11, 73.88, 70.47, 98.70, 79.19,
    90.91,
]
FC6_ENSEMBLE_RECALLS = [
    87.60, 100.00, 86.31, 68.75, 73.68, 90.91, 84.81, 86.72, 89.80, 93.28,
    85.82, 84.33, 95.36, 61.40, 95.57, 46.67, 85.07, 82.55, 99.35, 85.91,
    93.01,
]


def test_macro_recall_of_published_baseline_column():
    assert macro_average(BASELINE_RECALLS) == pytest.approx(76.73, abs=0.01)


def test_macro_recall_of_published_fc6_column():
    assert macro_average(FC6_ENSEMBLE_RECALLS) == pytest.approx(84.61, abs=0.01)


def test_perfect_predictions():
    labels = [i % 21 for i in range(63)]
    report = evaluate(labels, labels)
    assert report.accuracy == 1.0
    assert report.macro_precision == 1.0
    assert report.macro_recall == 1.0
    assert report.macro_f1 == 1.0


def test_three_class_toy_hand_counted():
    # truth (A,A,B,C) vs predicted (A,B,B,C): hand-counted confusion matrix
    a, b, c = ACTIVITIES[0], ACTIVITIES[1], ACTIVITIES[2]
    report = evaluate([a, a, b, c], [a, b, b, c])
    assert report.accuracy == pytest.approx(0.75)
    assert report.per_class_recall[0] == pytest.approx(0.5)
    assert report.per_class_recall[1] == pytest.approx(1.0)
    assert report.per_class_recall[2] == pytest.approx(1.0)
    assert report.macro_recall == pytest.approx((0.5 + 1 + 1) / 3, abs=1e-9)
    assert report.macro_recall == pytest.approx(0.8333, abs=1e-4)


def test_macro_excludes_absent_classes():
    a, b = ACTIVITIES[0], ACTIVITIES[1]
    report = evaluate([a, a], [a, b])
    # only class 0 occurs in the truth
    assert report.macro_recall == pytest.approx(0.5)
    assert report.support[1] == 0


def test_binary_symmetric_macro_precision_equals_recall():
    a, b = ACTIVITIES[0], ACTIVITIES[1]
    truth = [a, a, b, b]
    pred = [a, b, a, b]
    report = evaluate(truth, pred)
    assert report.macro_precision == pytest.approx(report.macro_recall)


def test_accuracy_is_trace_over_total():
    rng = np.random.default_rng(0)
    truth = rng.integers(0, 21, 300)
    pred = rng.integers(0, 21, 300)
    report = evaluate(list(truth), list(pred))
    counts = report.confusion.counts
    assert report.accuracy == np.trace(counts) / counts.sum()
    assert counts.sum() == 300
    np.testing.assert_array_equal(counts.sum(axis=1), report.support)


def test_evaluate_rejects_bad_input():
    with pytest.raises(ValueError):
        evaluate([], [])
    with pytest.raises(ValueError):
        evaluate([0, 1], [0])


def test_normalize_diagonal_is_identity():
    counts = np.diag(np.arange(1, 22))
    normalized = normalize_confusion(ConfusionMatrix(counts))
    np.testing.assert_allclose(normalized, np.eye(21), atol=1e-12)


def test_normalize_zero_row_stays_zero():
    counts = np.zeros((21, 21), dtype=np.int64)
    counts[0, 3] = 4
    normalized = normalize_confusion(ConfusionMatrix(counts))
    assert normalized[0, 3] == 1.0
    assert np.all(normalized[1:] == 0)


@settings(max_examples=50)
@given(st.integers(min_value=0, max_value=2**31))
def test_normalize_rows_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    counts = rng.integers(0, 50, (21, 21))
    normalized = normalize_confusion(ConfusionMatrix(counts))
    row_sums = counts.sum(axis=1)
    for i in range(21):
        if row_sums[i]:
            assert abs(normalized[i].sum() - 1.0) < 1e-9
            # scaling back by the row sum recovers the integer counts
            np.testing.assert_allclose(normalized[i] * row_sums[i], counts[i], atol=1e-6)
        else:
            assert normalized[i].sum() == 0.0


# --- top_k ---------------------------------------------------------------


def test_top_k_published_five_scores():
    # five published scores on a known image, other classes share the rest
    scores = {
        "Public Transport": 0.1864,
        "Cooking": 0.1464,
        "Eating together": 0.1382,
        "Drinking/eating alone": 0.1223,
        "Cleaning and chores": 0.1067,
    }
    probs = np.full(21, (1.0 - sum(scores.values())) / 16)
    for name, score in scores.items():
        probs[label_from_name(name).index] = score
    top = top_k(probs, 5)
    assert [(label.name, score) for label, score in top] == [
        ("Public Transport", 0.1864),
        ("Cooking", 0.1464),
        ("Eating together", 0.1382),
        ("Drinking/eating alone", 0.1223),
        ("Cleaning and chores", 0.1067),
    ]


def test_top_k_one_hot():
    probs = np.zeros(21)
    probs[7] = 1.0
    assert top_k(probs, 1) == [(ACTIVITIES[7], 1.0)]


def test_top_21_is_full_permutation():
    rng = np.random.default_rng(1)
    probs = rng.random(21)
    top = top_k(probs, 21)
    assert sorted(label.index for label, _ in top) == list(range(21))
    scores = [score for _, score in top]
    assert all(a >= b for a, b in zip(scores, scores[1:]))


def test_top_k_tie_breaks_by_class_index():
    probs = np.full(21, 1 / 21)
    top = top_k(probs, 3)
    assert [label.index for label, _ in top] == [0, 1, 2]


def test_top_k_range_checked():
    with pytest.raises(ValueError):
        top_k(np.full(21, 1 / 21), 0)
    with pytest.raises(ValueError):
        top_k(np.full(21, 1 / 21), 22)


# --- render_comparison -----------------------------------------------------


def test_single_perfect_report_renders_all_100():
    labels = [i % 21 for i in range(42)]
    report = evaluate(labels, labels, name="perfect")
    rendered = render_comparison([report])
    values = set()
    for row in rendered.data["per_class_recall"].values():
        values.update(row)
    assert values == {100.0}
    assert rendered.data["summary"]["accuracy"] == [100.0]
    assert "100.00" in rendered.text


def test_comparison_shape_five_columns():
    rng = np.random.default_rng(2)
    reports = [
        evaluate(
            list(rng.integers(0, 21, 100)), list(rng.integers(0, 21, 100)), name=f"m{i}"
        )
        for i in range(5)
    ]
    rendered = render_comparison(reports)
    assert rendered.data["columns"] == [f"m{i}" for i in range(5)]
    assert len(rendered.data["per_class_recall"]) == 21
    assert len(rendered.data["summary"]) == 4
    body = [
        line
        for line in rendered.text.splitlines()
        if line and not line.startswith(("Activity", "-"))
    ]
    assert len(body) == 25  # 21 classes + 4 summary rows


def test_human_and_machine_values_identical():
    rng = np.random.default_rng(3)
    reports = [
        evaluate(list(rng.integers(0, 21, 80)), list(rng.integers(0, 21, 80)), name=f"m{i}")
        for i in range(2)
    ]
    rendered = render_comparison(reports)
    lines = [l for l in rendered.text.splitlines() if l and not l.startswith(("Activity", "-"))]
    for line in lines[:21]:
        name, cell_a, cell_b = line.rsplit(None, 2)
        assert [float(cell_a), float(cell_b)] == rendered.data["per_class_recall"][name.strip()]


def test_format_percent_two_decimals():
    assert format_percent(0.8658) == "86.58"
    assert format_percent(1.0) == "100.00"
    assert format_percent(0.0) == "0.00"


# --- prediction file -------------------------------------------------------


def test_prediction_file_round_trip():
    rows = [
        PredictionRow("img-0", ACTIVITIES[1], ACTIVITIES[1], tuple(np.full(21, 1 / 21))),
        PredictionRow("img-1", None, ACTIVITIES[3], None),
    ]
    buf = io.StringIO()
    write_predictions(rows, buf)
    buf.seek(0)
    loaded = read_predictions(buf)
    assert loaded == rows


def test_prediction_file_rejects_garbage():
    with pytest.raises(ValueError, match="line 1"):
        read_predictions(io.StringIO("{broken\n"))


def test_eval_report_json_is_json_serializable():
    report = evaluate([0, 1, 2], [0, 1, 1], name="toy")
    payload = json.dumps(report.to_json_dict())
    assert "toy" in payload
