#!/usr/bin/env python3
"""Time forest training and prediction at fc6-scale dimensionality."""

import argparse
import sys
import time

import numpy as np

from adlkit.configs import EnsembleConfig, ForestHyperparameters, LayerCombination
from adlkit.forest import serialize_forest, train_forest
from adlkit.synthetic import clustered_matrix


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-train", type=int, default=2000)
    parser.add_argument("--n-test", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=4096)
    parser.add_argument("--n-trees", type=int, default=500)
    parser.add_argument("--spread", type=float, default=0.5)
    parser.add_argument("--n-jobs", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    per_class_train = args.n_train // 21
    per_class_test = args.n_test // 21
    pool, y_all = clustered_matrix(
        [per_class_train + per_class_test] * 21, args.dim, args.spread, rng
    )
    train_mask = np.zeros(y_all.size, dtype=bool)
    for c in range(21):
        train_mask[np.where(y_all == c)[0][:per_class_train]] = True
    X, y = pool[train_mask], y_all[train_mask]
    Xt, yt = pool[~train_mask], y_all[~train_mask]

    config = EnsembleConfig(
        "benchmark",
        LayerCombination.fc_only("fc6"),
        ForestHyperparameters(n_trees=args.n_trees),
        seed=args.seed,
    )
    start = time.perf_counter()
    forest = train_forest(X, y, config, n_jobs=args.n_jobs)
    train_time = time.perf_counter() - start

    start = time.perf_counter()
    labels, _ = forest.predict_batch(Xt)
    predict_time = time.perf_counter() - start

    start = time.perf_counter()
    data = serialize_forest(forest)
    serialize_time = time.perf_counter() - start

    nodes = sum(t.n_nodes for t in forest.trees)
    print(f"train:     {train_time:7.2f}s  ({args.n_trees} trees, {nodes} nodes)")
    print(f"predict:   {predict_time:7.2f}s  ({Xt.shape[0]} vectors)")
    print(f"serialize: {serialize_time:7.2f}s  ({len(data) / 1e6:.1f} MB)")
    print(f"test accuracy: {float(np.mean(labels == yt)):.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
