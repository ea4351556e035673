import io
import json

import numpy as np
import pytest

from adlkit.records import (
    DEFAULT_LAYER_SCHEMA,
    RecordParseError,
    SchemaError,
    dump_feature_records,
    load_feature_records,
    record_to_dict,
)
from adlkit.taxonomy import TaxonomyError

from conftest import make_record


def _well_formed_line(label="Driving", prob_len=21, fc_len=4096):
    prob = [0.0] * prob_len
    if prob_len:
        prob[0] = 1.0
    return json.dumps(
        {
            "image_id": "img-1",
            "user_id": "u1",
            "timestamp": "2015-06-16T15:32:05+00:00",
            "backbone": "alexnet",
            "label": label,
            "features": {"fc6": [0.5] * fc_len, "prob": prob},
        }
    )


def test_load_one_well_formed_record():
    records = load_feature_records(io.StringIO(_well_formed_line()))
    assert len(records) == 1
    record = records[0]
    assert record.label.name == "Driving"
    assert record.features["fc6"].shape == (4096,)
    assert record.features["prob"].shape == (21,)


def test_wrong_prob_length_is_schema_error():
    with pytest.raises(SchemaError, match=r"prob: expected 21, got 20"):
        load_feature_records(io.StringIO(_well_formed_line(prob_len=20)))


def test_unknown_label_is_taxonomy_error():
    with pytest.raises(TaxonomyError, match="Sleeping"):
        load_feature_records(io.StringIO(_well_formed_line(label="Sleeping")))


def test_malformed_line_reports_line_number():
    stream = io.StringIO(_well_formed_line() + "\n{not json\n")
    with pytest.raises(RecordParseError, match="line 2"):
        load_feature_records(stream)


def test_missing_field_is_parse_error():
    line = json.dumps({"image_id": "x", "user_id": "u"})
    with pytest.raises(RecordParseError):
        load_feature_records(io.StringIO(line))


def test_timestamp_requires_timezone():
    obj = json.loads(_well_formed_line())
    obj["timestamp"] = "2015-06-16T15:32:05"
    with pytest.raises(RecordParseError, match="timezone"):
        load_feature_records(io.StringIO(json.dumps(obj)))


def test_non_finite_value_rejected():
    obj = json.loads(_well_formed_line())
    obj["features"]["fc6"][0] = float("nan")
    line = json.dumps(obj).replace("NaN", "1e999")  # json emits Infinity-style tokens
    with pytest.raises(SchemaError, match="non-finite"):
        load_feature_records(io.StringIO(line))


def test_prob_must_sum_to_one():
    obj = json.loads(_well_formed_line())
    obj["features"]["prob"] = [0.5] + [0.0] * 20
    with pytest.raises(SchemaError, match="sum"):
        load_feature_records(io.StringIO(json.dumps(obj)))


def test_unknown_layer_rejected_under_schema():
    obj = json.loads(_well_formed_line())
    obj["features"]["mystery"] = [1.0, 2.0]
    with pytest.raises(SchemaError, match="mystery"):
        load_feature_records(io.StringIO(json.dumps(obj)))


def test_unknown_top_level_keys_ignored():
    obj = json.loads(_well_formed_line())
    obj["tags"] = ["kitchen"]
    records = load_feature_records(io.StringIO(json.dumps(obj)))
    assert len(records) == 1


def test_inferred_schema_requires_consistency():
    obj = json.loads(_well_formed_line(fc_len=8))
    line1 = json.dumps(obj)
    obj["image_id"] = "img-2"
    obj["features"]["fc6"] = [0.1] * 9
    line2 = json.dumps(obj)
    with pytest.raises(SchemaError, match="fc6"):
        load_feature_records(io.StringIO(line1 + "\n" + line2), expected_schema=None)


def test_round_trip_is_identity():
    rng = np.random.default_rng(7)
    records = [
        make_record(
            f"img-{i}",
            label_index=i % 21,
            features={
                "fc6": rng.normal(size=4096).astype(np.float32),
                "prob": np.full(21, 1 / 21, dtype=np.float32),
            },
            minute=i,
        )
        for i in range(5)
    ]
    buf = io.StringIO()
    dump_feature_records(records, buf)
    buf.seek(0)
    loaded = load_feature_records(buf)
    assert len(loaded) == len(records)
    for before, after in zip(records, loaded):
        assert after.image_id == before.image_id
        assert after.user_id == before.user_id
        assert after.timestamp == before.timestamp
        assert after.backbone == before.backbone
        assert after.label == before.label
        for layer, vec in before.features.items():
            np.testing.assert_array_equal(after.features[layer], vec)


def test_reserialization_is_stable():
    records = [
        make_record(
            "img-0",
            features={"prob": np.full(21, np.float32(1 / 21))},
        )
    ]
    first = json.dumps(record_to_dict(records[0]))
    buf = io.StringIO()
    dump_feature_records(records, buf)
    buf.seek(0)
    second = json.dumps(record_to_dict(load_feature_records(buf)[0]))
    assert first == second


def test_default_schema_has_published_lengths():
    assert DEFAULT_LAYER_SCHEMA == {"fc6": 4096, "pool5_7x7": 1024, "logits": 21, "prob": 21}
