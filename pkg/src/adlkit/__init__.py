"""adlkit: activity classification from per-image CNN feature vectors.

Fuses fully-connected-layer activations with softmax probabilities,
classifies them with a from-scratch random decision forest, scores the
results with imbalance-aware macro metrics, and ships a multi-user
annotation service for collecting activity labels.
"""

from .configs import EnsembleConfig, ForestHyperparameters, LayerCombination
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    evaluate,
    macro_average,
    normalize_confusion,
    render_comparison,
    top_k,
)
from .forest import (
    Forest,
    best_split,
    deserialize_forest,
    gini_impurity,
    grow_tree,
    serialize_forest,
    train_forest,
)
from .fusion import benchmark_configurations, fuse, softmax
from .records import FeatureRecord, dump_feature_records, load_feature_records
from .splits import DatasetSplit, class_histogram, stratified_split
from .taxonomy import ACTIVITIES, ActivityLabel, label_from_index, label_from_name

__version__ = "0.1.0"

__all__ = [
    "ACTIVITIES",
    "ActivityLabel",
    "ConfusionMatrix",
    "DatasetSplit",
    "EnsembleConfig",
    "EvalReport",
    "FeatureRecord",
    "Forest",
    "ForestHyperparameters",
    "LayerCombination",
    "benchmark_configurations",
    "best_split",
    "class_histogram",
    "deserialize_forest",
    "dump_feature_records",
    "evaluate",
    "fuse",
    "gini_impurity",
    "grow_tree",
    "label_from_index",
    "label_from_name",
    "load_feature_records",
    "macro_average",
    "normalize_confusion",
    "render_comparison",
    "serialize_forest",
    "softmax",
    "stratified_split",
    "top_k",
    "train_forest",
]
