"""Random decision forest: CART-style trees on Gini impurity.

Trees are grown on bootstrap resamples with a fresh random feature subset
at every node. Split search is exact: candidate thresholds are midpoints
between consecutive distinct sorted values, scored by weighted child Gini.

To keep results reproducible bit-for-bit, the search ranks candidates by
the equivalent integer-exact criterion

    score = S_l/n_l + S_r/n_r,   S = sum of squared class counts,

computed as a single float64 division of exactly-represented integers
(maximizing this score minimizes weighted child Gini). Ties break toward
the lowest feature index, then the lowest threshold. Each tree draws its
randomness from a substream derived from (seed, tree_index), so trees may
be built concurrently with a scheduling-independent result.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, NamedTuple

import numpy as np
from numba import njit

from .configs import EnsembleConfig, ForestHyperparameters
from .taxonomy import ACTIVITIES, N_ACTIVITIES, ActivityLabel

FOREST_MAGIC = "adlkit-forest"
FOREST_FORMAT_VERSION = 1


class ForestFormatError(ValueError):
    """A model file that is not a readable forest container."""


class ForestCompatibilityError(ValueError):
    """A readable forest whose header disagrees with the surrounding pipeline."""


class SplitCandidate(NamedTuple):
    feature_index: int
    threshold: float
    impurity_decrease: float


def gini_impurity(class_counts) -> float:
    """Gini impurity 1 - sum((count/total)^2) of a class-count vector."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1 or np.any(counts < 0):
        raise ValueError("class_counts must be a vector of non-negative counts")
    total = counts.sum()
    if total <= 0:
        raise ValueError("class_counts has no samples")
    fractions = counts / total
    return float(1.0 - np.sum(fractions * fractions))


@njit(cache=True, nogil=True)
def _scan_node(X, y, idx, feats, totals, min_leaf):
    """Best split over candidate columns for the samples in ``idx``.

    Returns (column index into feats, threshold, score); column -1 means no
    position admits a split. Scores of valid positions are exact integer
    ratios evaluated with one float64 division, so equal partitions compare
    equal regardless of which feature produced them.
    """
    n = idx.shape[0]
    n_classes = totals.shape[0]
    best_j = -1
    best_score = -np.inf
    best_thr = 0.0
    left = np.zeros(n_classes, np.int64)
    vals = np.empty(n, np.float64)
    svals = np.empty(n, np.float64)
    slabs = np.empty(n, np.int64)
    sq_total = 0
    for c in range(n_classes):
        sq_total += totals[c] * totals[c]
    for j in range(feats.shape[0]):
        f = feats[j]
        for i in range(n):
            vals[i] = X[idx[i], f]
        order = np.argsort(vals)
        for i in range(n):
            o = order[i]
            svals[i] = vals[o]
            slabs[i] = y[idx[o]]
        for c in range(n_classes):
            left[c] = 0
        S_l = 0
        S_r = sq_total
        col_score = -np.inf
        col_thr = 0.0
        for i in range(n - 1):
            c = slabs[i]
            S_l += 2 * left[c] + 1
            S_r -= 2 * (totals[c] - left[c]) - 1
            left[c] += 1
            n_l = i + 1
            n_r = n - n_l
            if n_l < min_leaf or n_r < min_leaf:
                continue
            lo = svals[i]
            hi = svals[i + 1]
            if not lo < hi:
                continue
            score = (float(S_l) * n_r + float(S_r) * n_l) / (float(n_l) * float(n_r))
            if score > col_score:
                col_score = score
                col_thr = (lo + hi) / 2.0
        if col_score > best_score:
            best_score = col_score
            best_thr = col_thr
            best_j = j
    return best_j, best_thr, best_score


@njit(cache=True, nogil=True)
def _route(feature, threshold, left, right, X):
    """Leaf node index reached by every row of X."""
    out = np.empty(X.shape[0], np.int64)
    for s in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[s, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[s] = node
    return out


def _parent_score(totals: np.ndarray, n: int) -> float:
    sq = int(np.sum(totals.astype(np.int64) ** 2))
    return float(sq) / float(n)


def best_split(
    X,
    y,
    candidate_features=None,
    *,
    min_leaf_samples: int = 1,
    n_classes: int | None = None,
) -> SplitCandidate | None:
    """Exhaustively pick the threshold minimizing weighted child Gini.

    Considers midpoints between consecutive distinct sorted values of each
    candidate feature; ties break by lowest feature index, then lowest
    threshold. Returns None when no split strictly reduces impurity.
    """
    X = np.ascontiguousarray(X)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n_samples, n_features) matching y")
    n = X.shape[0]
    if n < 2:
        raise ValueError("best_split needs at least 2 samples")
    if candidate_features is None:
        feats = np.arange(X.shape[1], dtype=np.int64)
    else:
        feats = np.unique(np.asarray(list(candidate_features), dtype=np.int64))
        if feats.size == 0 or feats[0] < 0 or feats[-1] >= X.shape[1]:
            raise ValueError("candidate_features outside the feature range")
    if n_classes is None:
        n_classes = max(N_ACTIVITIES, int(y.max()) + 1)
    totals = np.bincount(y, minlength=n_classes).astype(np.int64)
    idx = np.arange(n, dtype=np.int64)
    if X.dtype not in (np.float32, np.float64):
        X = X.astype(np.float64)
    j, thr, score = _scan_node(X, y, idx, feats, totals, min_leaf_samples)
    if j < 0:
        return None
    parent = _parent_score(totals, n)
    if not score > parent:
        return None
    return SplitCandidate(int(feats[j]), float(thr), (score - parent) / n)


@dataclass
class DecisionTree:
    """One grown tree in flat preorder arrays.

    ``feature[i] == -1`` marks node i as a leaf whose class counts are row
    ``leaf_row[i]`` of ``leaf_counts``; internal nodes route to ``left``
    when value <= threshold, else ``right``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_counts: np.ndarray
    leaf_row: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.leaf_row = (np.cumsum(self.feature == -1) - 1).astype(np.int64)
        self.leaf_row[self.feature >= 0] = -1

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int(self.leaf_counts.shape[0])

    @property
    def leaf_majority(self) -> np.ndarray:
        return np.argmax(self.leaf_counts, axis=1)

    def route(self, X: np.ndarray) -> np.ndarray:
        nodes = _route(self.feature, self.threshold, self.left, self.right, X)
        return self.leaf_row[nodes]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.leaf_majority[self.route(X)]

    def max_depth_reached(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        deepest = 0
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
            else:
                deepest = max(deepest, int(depth[i]))
        return deepest


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    hyperparameters: ForestHyperparameters,
    rng: np.random.Generator,
    *,
    sample_indices: np.ndarray | None = None,
    n_classes: int = N_ACTIVITIES,
) -> DecisionTree:
    """Grow one tree over ``X[sample_indices]`` (all rows when None).

    Nodes are expanded in preorder with a fresh feature subset drawn per
    node, stopping on purity, the depth limit, minimum sizes, or when no
    split reduces impurity.
    """
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data must be a non-empty 2-D array")
    d = X.shape[1]
    m = hyperparameters.resolve_features_per_split(d)
    min_split = hyperparameters.min_samples_split
    min_leaf = hyperparameters.min_leaf_samples
    max_depth = hyperparameters.max_depth
    if sample_indices is None:
        sample_indices = np.arange(X.shape[0], dtype=np.int64)
    if sample_indices.size == 0:
        raise ValueError("empty sample set")

    features: list[int] = []
    thresholds: list[float] = []
    lefts: list[int] = []
    rights: list[int] = []
    leaf_counts: list[np.ndarray] = []
    links: list[tuple[int, bool, int]] = []
    # Stack holds (indices, depth, parent, is_right); pushing right before
    # left yields preorder node ids and a fixed rng draw order.
    stack: list[tuple[np.ndarray, int, int, bool]] = [(sample_indices, 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node_id = len(features)
        if parent >= 0:
            links.append((parent, is_right, node_id))
        counts = np.bincount(y[idx], minlength=n_classes).astype(np.int64)
        split = None
        can_split = (
            idx.size >= min_split
            and idx.size >= 2 * min_leaf
            and np.count_nonzero(counts) > 1
            and (max_depth is None or depth < max_depth)
        )
        if can_split:
            if m >= d:
                feats = np.arange(d, dtype=np.int64)
            else:
                feats = np.sort(rng.choice(d, size=m, replace=False)).astype(np.int64)
            j, thr, score = _scan_node(X, y, idx, feats, counts, min_leaf)
            if j >= 0 and score > _parent_score(counts, idx.size):
                split = (int(feats[j]), thr)
        if split is None:
            features.append(-1)
            thresholds.append(0.0)
            lefts.append(-1)
            rights.append(-1)
            leaf_counts.append(counts)
        else:
            f, thr = split
            features.append(f)
            thresholds.append(thr)
            lefts.append(-2)  # wired below
            rights.append(-2)
            mask = X[idx, f].astype(np.float64) <= thr
            stack.append((idx[~mask], depth + 1, node_id, True))
            stack.append((idx[mask], depth + 1, node_id, False))

    left_arr = np.asarray(lefts, dtype=np.int64)
    right_arr = np.asarray(rights, dtype=np.int64)
    for parent, is_right, child in links:
        if is_right:
            right_arr[parent] = child
        else:
            left_arr[parent] = child
    return DecisionTree(
        feature=np.asarray(features, dtype=np.int64),
        threshold=np.asarray(thresholds, dtype=np.float64),
        left=left_arr,
        right=right_arr,
        leaf_counts=(
            np.vstack(leaf_counts)
            if leaf_counts
            else np.zeros((0, n_classes), dtype=np.int64)
        ),
    )


@dataclass
class Forest:
    """A trained ensemble of decision trees with majority-vote prediction."""

    trees: list[DecisionTree]
    dimensionality: int
    n_classes: int
    config: EnsembleConfig
    trained_at: datetime | None = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict_batch(self, X, voting: str = "hard") -> tuple[np.ndarray, np.ndarray]:
        """Predict class indices for rows of X.

        Returns (labels, votes). With hard voting (default) votes are
        integer per-class tree counts summing to n_trees per row; with
        soft voting they are averaged leaf class distributions.
        """
        X = np.ascontiguousarray(X)
        if X.ndim != 2 or X.shape[1] != self.dimensionality:
            raise ValueError(
                f"expected vectors of length {self.dimensionality}, "
                f"got shape {X.shape}"
            )
        if X.dtype not in (np.float32, np.float64):
            X = X.astype(np.float64)
        if voting == "hard":
            votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
            rows = np.arange(X.shape[0])
            for tree in self.trees:
                votes[rows, tree.predict(X)] += 1
        elif voting == "soft":
            votes = np.zeros((X.shape[0], self.n_classes), dtype=np.float64)
            for tree in self.trees:
                counts = tree.leaf_counts[tree.route(X)].astype(np.float64)
                votes += counts / counts.sum(axis=1, keepdims=True)
            votes /= self.n_trees
        else:
            raise ValueError(f"unknown voting scheme {voting!r}")
        return np.argmax(votes, axis=1), votes

    def predict(self, vector) -> tuple[ActivityLabel, np.ndarray]:
        """Predict a single activity; ties break toward the lowest index."""
        if self.n_classes != N_ACTIVITIES:
            raise ValueError("predict() returns activity labels; use predict_batch")
        vector = np.asarray(vector)
        if vector.ndim != 1 or vector.shape[0] != self.dimensionality:
            raise ValueError(
                f"expected a vector of length {self.dimensionality}, "
                f"got shape {vector.shape}"
            )
        labels, votes = self.predict_batch(vector.reshape(1, -1))
        return ACTIVITIES[int(labels[0])], votes[0]


def train_forest(
    X,
    y,
    config: EnsembleConfig,
    *,
    n_classes: int = N_ACTIVITIES,
    n_jobs: int | None = None,
) -> Forest:
    """Train ``config.n_trees`` trees, each on its own bootstrap resample.

    Tree i draws all randomness from a substream seeded by
    (config.seed, i); the assembled forest is a pure function of
    (X, y, config) regardless of thread scheduling.
    """
    X = np.ascontiguousarray(X)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data must be a non-empty 2-D array")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} sample vectors but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("training data has non-finite values")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    if X.dtype not in (np.float32, np.float64):
        X = X.astype(np.float64)
    n = X.shape[0]
    hyper = config.forest

    def build(i: int) -> DecisionTree:
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, i)))
        if hyper.bootstrap:
            idx = rng.integers(0, n, size=n).astype(np.int64)
        else:
            idx = np.arange(n, dtype=np.int64)
        return grow_tree(X, y, hyper, rng, sample_indices=idx, n_classes=n_classes)

    if n_jobs is None:
        n_jobs = min(8, os.cpu_count() or 1)
    if n_jobs > 1 and hyper.n_trees > 1:
        build(0)  # warm the jit kernels before fanning out
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(build, range(hyper.n_trees)))
    else:
        trees = [build(i) for i in range(hyper.n_trees)]
    return Forest(
        trees=trees,
        dimensionality=X.shape[1],
        n_classes=n_classes,
        config=config,
        trained_at=datetime.now(timezone.utc),
    )


def _tree_to_json_dict(tree: DecisionTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "leaf_counts": tree.leaf_counts.tolist(),
    }


def _tree_from_json_dict(obj: dict, dimensionality: int, n_classes: int) -> DecisionTree:
    feature = np.asarray(obj["feature"], dtype=np.int64)
    if feature.size == 0:
        raise ForestFormatError("tree with no nodes")
    if feature.max(initial=-1) >= dimensionality:
        raise ForestFormatError(
            f"tree references feature {int(feature.max())} "
            f"but dimensionality is {dimensionality}"
        )
    leaf_counts = np.asarray(obj["leaf_counts"], dtype=np.int64)
    if leaf_counts.ndim != 2 or leaf_counts.shape[1] != n_classes:
        raise ForestFormatError("leaf counts do not match n_classes")
    if int(np.count_nonzero(feature == -1)) != leaf_counts.shape[0]:
        raise ForestFormatError("leaf count rows do not match the number of leaves")
    threshold = np.asarray(obj["threshold"], dtype=np.float64)
    left = np.asarray(obj["left"], dtype=np.int64)
    right = np.asarray(obj["right"], dtype=np.int64)
    if not (threshold.shape == left.shape == right.shape == feature.shape):
        raise ForestFormatError("node arrays have inconsistent lengths")
    return DecisionTree(
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        leaf_counts=leaf_counts,
    )


def serialize_forest(
    forest: Forest,
    sink: str | Path | IO[bytes] | None = None,
    *,
    include_timestamp: bool = False,
) -> bytes | None:
    """Serialize a forest to its versioned JSON container.

    Identical training runs produce identical bytes; the wall-clock
    training timestamp is therefore omitted unless explicitly requested.
    Returns the bytes when ``sink`` is None, else writes to it.
    """
    payload: dict = {
        "magic": FOREST_MAGIC,
        "version": FOREST_FORMAT_VERSION,
        "dimensionality": forest.dimensionality,
        "n_classes": forest.n_classes,
        "config": forest.config.to_json_dict(),
    }
    if include_timestamp and forest.trained_at is not None:
        payload["trained_at"] = forest.trained_at.isoformat()
    payload["trees"] = [_tree_to_json_dict(tree) for tree in forest.trees]
    data = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    if sink is None:
        return data
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)
    return None


def deserialize_forest(
    source: bytes | str | Path | IO[bytes],
    *,
    expected_dimensionality: int | None = None,
) -> Forest:
    """Load a forest container, checking magic, version, and header.

    Raises ForestFormatError for damaged files and
    ForestCompatibilityError when ``expected_dimensionality`` disagrees
    with the header.
    """
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ForestFormatError(f"not a forest container: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != FOREST_MAGIC:
        raise ForestFormatError("bad magic: not a forest container")
    version = payload.get("version")
    if version != FOREST_FORMAT_VERSION:
        raise ForestFormatError(
            f"unsupported format version {version!r} "
            f"(this build reads version {FOREST_FORMAT_VERSION})"
        )
    try:
        dimensionality = int(payload["dimensionality"])
        n_classes = int(payload["n_classes"])
        config = EnsembleConfig.from_json_dict(payload["config"])
        raw_trees = payload["trees"]
        trees = [_tree_from_json_dict(t, dimensionality, n_classes) for t in raw_trees]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ForestFormatError):
            raise
        raise ForestFormatError(f"truncated or malformed forest container: {exc}") from exc
    if expected_dimensionality is not None and dimensionality != expected_dimensionality:
        raise ForestCompatibilityError(
            f"model dimensionality {dimensionality} does not match "
            f"pipeline dimensionality {expected_dimensionality}"
        )
    if len(trees) != config.n_trees:
        raise ForestFormatError(
            f"header declares {config.n_trees} trees but container has {len(trees)}"
        )
    trained_at = payload.get("trained_at")
    return Forest(
        trees=trees,
        dimensionality=dimensionality,
        n_classes=n_classes,
        config=config,
        trained_at=datetime.fromisoformat(trained_at) if trained_at else None,
    )
