#!/usr/bin/env python3
"""End-to-end comparison demo on synthetic features.

Generates a synthetic multi-user dataset, splits it with the standard
ratios, trains the five standard backbone/layer ensembles plus the
argmax-of-prob baselines, and prints the comparison table. Synthetic
"alexnet" and "googlenet" features are simply two independent draws.

Defaults are sized to finish in a couple of minutes on a laptop; pass
--full-dims for the real 4096/1024 layer sizes.
"""

import argparse
import sys
import time

from adlkit.configs import ForestHyperparameters
from adlkit.evaluation import render_comparison
from adlkit.fusion import benchmark_configurations
from adlkit.pipeline import run_comparison
from adlkit.splits import stratified_split
from adlkit.synthetic import generate_records


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--per-class", type=int, default=60)
    parser.add_argument("--n-trees", type=int, default=120)
    parser.add_argument("--full-dims", action="store_true")
    args = parser.parse_args()

    fc_dim, pool_dim = (4096, 1024) if args.full_dims else (48, 24)
    counts = [args.per_class] * 21
    records = {
        backbone: generate_records(
            counts, seed=args.seed, feature_seed=args.seed + offset,
            backbone=backbone, fc_dim=fc_dim, pool_dim=pool_dim,
            cluster_spread=0.9,
        )
        for offset, backbone in ((0, "alexnet"), (1, "googlenet"))
    }
    split = stratified_split(records["alexnet"], (0.7504, 0.0996, 0.1500), args.seed)

    configs = benchmark_configurations(
        seed=args.seed, forest=ForestHyperparameters(n_trees=args.n_trees)
    )
    start = time.perf_counter()
    reports = run_comparison(records, configs, split, with_baseline=True)
    elapsed = time.perf_counter() - start

    comparison = render_comparison(reports)
    print(comparison.text)
    print(f"{len(reports)} columns in {elapsed:.1f}s "
          f"(fc_dim={fc_dim}, {args.n_trees} trees, seed={args.seed})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
