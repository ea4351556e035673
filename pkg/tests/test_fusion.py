import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adlkit.configs import LayerCombination
from adlkit.fusion import benchmark_configurations, fuse, softmax

from conftest import make_record

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


def test_softmax_uniform_on_equal_logits():
    np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=1e-12)


def test_softmax_known_values():
    # expected values computed with a 50-digit arbitrary-precision oracle
    np.testing.assert_allclose(
        softmax([1.0, 2.0, 3.0]),
        [0.09003057317038046, 0.24472847105479767, 0.6652409557748219],
        atol=1e-8,
    )


@settings(max_examples=100)
@given(
    logits=arrays(np.float64, st.integers(min_value=1, max_value=40), elements=finite_floats),
    shift=finite_floats,
)
def test_softmax_shift_invariance_sum_and_argmax(logits, shift):
    p = softmax(logits)
    assert abs(p.sum() - 1.0) < 1e-9
    assert np.all(p > 0)
    np.testing.assert_allclose(p, softmax(logits + shift), atol=1e-12)
    # sub-ulp logit gaps may tie after exp rounding, so assert the true
    # argmax attains the maximum probability rather than strict equality
    assert p[int(np.argmax(logits))] == p.max()


def test_softmax_overflow_safe():
    p = softmax([1000.0, 1000.0, 0.0])
    assert np.all(np.isfinite(p))
    np.testing.assert_allclose(p[:2], [0.5, 0.5], atol=1e-12)


def test_softmax_rejects_bad_input():
    with pytest.raises(ValueError):
        softmax([])
    with pytest.raises(ValueError):
        softmax([1.0, np.nan])


def _full_record(fc_len=4096, pool_len=1024):
    rng = np.random.default_rng(0)
    logits = rng.normal(size=21).astype(np.float32)
    prob = softmax(logits).astype(np.float32)
    return make_record(
        "img-0",
        features={
            "fc6": rng.normal(size=fc_len).astype(np.float32),
            "pool5_7x7": rng.normal(size=pool_len).astype(np.float32),
            "logits": logits,
            "prob": prob,
        },
    )


def test_fuse_fc6_plus_prob_dimension():
    vec = fuse(_full_record(), LayerCombination.fc_plus_prob("fc6"))
    assert vec.shape == (4117,)


def test_fuse_pool_plus_prob_dimension():
    vec = fuse(_full_record(), LayerCombination.fc_plus_prob("pool5_7x7"))
    assert vec.shape == (1045,)


def test_fuse_concatenation_order_fc_then_prob():
    record = _full_record(fc_len=8)
    vec = fuse(record, LayerCombination.fc_plus_prob("fc6"))
    np.testing.assert_array_equal(vec[:8], record.features["fc6"])
    np.testing.assert_allclose(vec[8:], record.features["prob"], atol=1e-6)


def test_fuse_prob_only_is_identity_on_prob():
    prob = np.zeros(21, dtype=np.float32)
    prob[5] = 1.0
    record = make_record("img-0", features={"prob": prob})
    np.testing.assert_array_equal(fuse(record, LayerCombination.prob_only()), prob)


def test_fuse_derives_prob_from_logits():
    logits = np.arange(21, dtype=np.float32)
    record = make_record("img-0", features={"logits": logits})
    vec = fuse(record, LayerCombination.prob_only())
    np.testing.assert_allclose(vec, softmax(logits).astype(np.float32), atol=1e-7)


def test_fuse_prefers_logits_on_disagreement(caplog):
    logits = np.zeros(21, dtype=np.float32)
    bad_prob = np.zeros(21, dtype=np.float32)
    bad_prob[0] = 1.0
    record = make_record("img-0", features={"logits": logits, "prob": bad_prob})
    with caplog.at_level("WARNING"):
        vec = fuse(record, LayerCombination.prob_only())
    np.testing.assert_allclose(vec, np.full(21, 1 / 21), atol=1e-7)
    assert any("disagrees" in m for m in caplog.messages)


def test_fuse_missing_layer_names_it():
    record = make_record("img-0", features={"prob": np.full(21, np.float32(1 / 21))})
    with pytest.raises(ValueError, match="fc6"):
        fuse(record, LayerCombination.fc_plus_prob("fc6"))


def test_missing_prob_and_logits():
    record = make_record("img-0", features={"fc6": np.zeros(4096, dtype=np.float32)})
    with pytest.raises(ValueError, match="prob"):
        fuse(record, LayerCombination.fc_plus_prob("fc6"))


def test_benchmark_configurations_shape():
    configs = benchmark_configurations()
    assert len(configs) == 5
    assert all(c.n_trees == 500 for c in configs)
    assert sorted(c.combination.output_dimension() for c in configs) == [21, 21, 1045, 4096, 4117]
    names = [c.display_name for c in configs]
    assert names == [
        "AlexNet+RF on Prob",
        "GoogLeNet+RF on Prob",
        "AlexNet+RF on FC6",
        "AlexNet+RF on FC6+Prob",
        "GoogLeNet+RF on Pool5/7x7+Prob",
    ]


def test_combination_requires_something():
    with pytest.raises(ValueError):
        LayerCombination(fc_layer=None, include_prob=False)
