"""Configuration dataclasses for layer combinations, forests, and ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from .records import DEFAULT_LAYER_SCHEMA
from .taxonomy import N_ACTIVITIES

_LAYER_DISPLAY = {"fc6": "FC6", "pool5_7x7": "Pool5/7x7", "prob": "Prob"}
_BACKBONE_DISPLAY = {"alexnet": "AlexNet", "googlenet": "GoogLeNet"}


def _display_layer(layer: str) -> str:
    return _LAYER_DISPLAY.get(layer, layer)


@dataclass(frozen=True)
class LayerCombination:
    """Which backbone outputs feed the forest: an fc layer, the softmax
    probabilities, or their concatenation (fc first, prob last)."""

    fc_layer: str | None
    include_prob: bool

    def __post_init__(self) -> None:
        if self.fc_layer is None and not self.include_prob:
            raise ValueError("combination selects neither an fc layer nor prob")

    @classmethod
    def prob_only(cls) -> "LayerCombination":
        return cls(fc_layer=None, include_prob=True)

    @classmethod
    def fc_only(cls, layer: str) -> "LayerCombination":
        return cls(fc_layer=layer, include_prob=False)

    @classmethod
    def fc_plus_prob(cls, layer: str) -> "LayerCombination":
        return cls(fc_layer=layer, include_prob=True)

    def output_dimension(self, layer_dims: Mapping[str, int] | None = None) -> int:
        dims = DEFAULT_LAYER_SCHEMA if layer_dims is None else layer_dims
        total = 0
        if self.fc_layer is not None:
            if self.fc_layer not in dims:
                raise KeyError(f"no known length for layer {self.fc_layer!r}")
            total += dims[self.fc_layer]
        if self.include_prob:
            total += N_ACTIVITIES
        return total

    def describe(self) -> str:
        if self.fc_layer is None:
            return "Prob"
        name = _display_layer(self.fc_layer)
        return f"{name}+Prob" if self.include_prob else name

    def to_json_dict(self) -> dict[str, Any]:
        return {"fc_layer": self.fc_layer, "include_prob": self.include_prob}

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Any]) -> "LayerCombination":
        return cls(fc_layer=obj["fc_layer"], include_prob=bool(obj["include_prob"]))


@dataclass(frozen=True)
class ForestHyperparameters:
    """Knobs for growing a random decision forest.

    ``features_per_split`` is either an explicit count or one of the rules
    "sqrt" (floor of sqrt(d), the default), "log2", or "all".
    """

    n_trees: int = 500
    max_depth: int | None = None
    min_samples_split: int = 2
    min_leaf_samples: int = 1
    features_per_split: int | str = "sqrt"
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_leaf_samples < 1:
            raise ValueError("min_leaf_samples must be >= 1")
        if isinstance(self.features_per_split, str):
            if self.features_per_split not in ("sqrt", "log2", "all"):
                raise ValueError(f"unknown features_per_split rule {self.features_per_split!r}")
        elif self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")

    def resolve_features_per_split(self, dimensionality: int) -> int:
        rule = self.features_per_split
        if rule == "sqrt":
            return max(1, math.isqrt(dimensionality))
        if rule == "log2":
            return max(1, int(math.log2(dimensionality))) if dimensionality > 1 else 1
        if rule == "all":
            return dimensionality
        return min(int(rule), dimensionality)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_leaf_samples": self.min_leaf_samples,
            "features_per_split": self.features_per_split,
            "bootstrap": self.bootstrap,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Any]) -> "ForestHyperparameters":
        return cls(
            n_trees=int(obj["n_trees"]),
            max_depth=None if obj["max_depth"] is None else int(obj["max_depth"]),
            min_samples_split=int(obj["min_samples_split"]),
            min_leaf_samples=int(obj["min_leaf_samples"]),
            features_per_split=obj["features_per_split"],
            bootstrap=bool(obj["bootstrap"]),
        )


@dataclass(frozen=True)
class EnsembleConfig:
    """A backbone, a layer combination, and the forest that consumes them."""

    backbone: str
    combination: LayerCombination
    forest: ForestHyperparameters = field(default_factory=ForestHyperparameters)
    seed: int = 0
    name: str | None = None

    @property
    def n_trees(self) -> int:
        return self.forest.n_trees

    @property
    def display_name(self) -> str:
        if self.name is not None:
            return self.name
        backbone = _BACKBONE_DISPLAY.get(self.backbone, self.backbone.title())
        return f"{backbone}+RF on {self.combination.describe()}"

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "backbone": self.backbone,
            "combination": self.combination.to_json_dict(),
            "forest": self.forest.to_json_dict(),
            "seed": self.seed,
            "name": self.name,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Any]) -> "EnsembleConfig":
        return cls(
            backbone=str(obj["backbone"]),
            combination=LayerCombination.from_json_dict(obj["combination"]),
            forest=ForestHyperparameters.from_json_dict(obj["forest"]),
            seed=int(obj["seed"]),
            name=obj.get("name"),
        )
