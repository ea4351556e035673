"""Softmax computation and layer fusion feeding the forest."""

from __future__ import annotations

import logging

import numpy as np

from .configs import EnsembleConfig, ForestHyperparameters, LayerCombination
from .records import FeatureRecord

logger = logging.getLogger(__name__)

PROB_LOGITS_TOLERANCE = 1e-4


def softmax(logits) -> np.ndarray:
    """Normalized exponentials of ``logits``, computed with max subtraction.

    The result is float64, sums to 1, and preserves the argmax.
    """
    x = np.asarray(logits, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("softmax expects a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("softmax input has a non-finite entry")
    shifted = x - x.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def prob_vector(record: FeatureRecord) -> np.ndarray:
    """The record's probability vector, recomputed from logits when needed.

    Logits are the source of truth: a stored prob that disagrees with
    softmax(logits) beyond tolerance is replaced, with a warning.
    """
    prob = record.features.get("prob")
    logits = record.features.get("logits")
    if logits is not None:
        derived = softmax(logits)
        if prob is not None and np.max(np.abs(prob.astype(np.float64) - derived)) > PROB_LOGITS_TOLERANCE:
            logger.warning(
                "record %s: stored prob disagrees with softmax(logits); using logits",
                record.image_id,
            )
            return derived
        if prob is None:
            return derived
    if prob is None:
        raise ValueError(f"record {record.image_id!r} is missing layer 'prob' (and 'logits')")
    return prob.astype(np.float64)


def fuse(record: FeatureRecord, combination: LayerCombination) -> np.ndarray:
    """Build one input vector for the forest: fc features first, prob last."""
    pieces: list[np.ndarray] = []
    if combination.fc_layer is not None:
        fc = record.features.get(combination.fc_layer)
        if fc is None:
            raise ValueError(
                f"record {record.image_id!r} is missing layer {combination.fc_layer!r}"
            )
        pieces.append(fc.astype(np.float32))
    if combination.include_prob:
        pieces.append(prob_vector(record).astype(np.float32))
    return np.concatenate(pieces)


def benchmark_configurations(
    seed: int = 0, forest: ForestHyperparameters | None = None
) -> list[EnsembleConfig]:
    """The five standard backbone/layer ensembles, each a 500-tree forest."""
    hp = forest if forest is not None else ForestHyperparameters(n_trees=500)
    combos = [
        ("alexnet", LayerCombination.prob_only()),
        ("googlenet", LayerCombination.prob_only()),
        ("alexnet", LayerCombination.fc_only("fc6")),
        ("alexnet", LayerCombination.fc_plus_prob("fc6")),
        ("googlenet", LayerCombination.fc_plus_prob("pool5_7x7")),
    ]
    return [
        EnsembleConfig(backbone=backbone, combination=combo, forest=hp, seed=seed)
        for backbone, combo in combos
    ]
