"""Command-line front door: split, train, predict, evaluate, compare,
gen-synthetic, and serve."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .configs import EnsembleConfig, ForestHyperparameters, LayerCombination
from .evaluation import (
    evaluate,
    format_percent,
    normalize_confusion,
    read_predictions,
    render_comparison,
    top_k,
    write_predictions,
)
from .forest import deserialize_forest, serialize_forest
from .fusion import benchmark_configurations
from .pipeline import (
    ComparisonError,
    dedupe_by_image_id,
    evaluate_forest,
    predict_records,
    run_comparison,
    select_partition,
    train_on_partition,
)
from .records import dump_feature_records, load_feature_records
from .splits import apportion, class_histogram, load_split, save_split, stratified_split
from .synthetic import DEFAULT_CLASS_WEIGHTS, generate_records
from .taxonomy import ACTIVITIES, N_ACTIVITIES

STANDARD_CONFIG_SLUGS = {
    "alexnet-prob": 0,
    "googlenet-prob": 1,
    "alexnet-fc6": 2,
    "alexnet-fc6-prob": 3,
    "googlenet-pool5-prob": 4,
}


def _parse_ratios(raw: str) -> tuple[float, float, float]:
    parts = [float(p) for p in raw.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    return (parts[0], parts[1], parts[2])


def _resolve_config(raw: str, seed: int | None) -> EnsembleConfig:
    """A config is either a standard slug or a path to a JSON config file."""
    if raw in STANDARD_CONFIG_SLUGS:
        config = benchmark_configurations(seed=seed or 0)[STANDARD_CONFIG_SLUGS[raw]]
        return config
    obj = json.loads(Path(raw).read_text(encoding="utf-8"))
    return _config_from_dict(obj, seed)


def _config_from_dict(obj: dict, seed: int | None = None) -> EnsembleConfig:
    combo = obj["combination"]
    combination = LayerCombination(
        fc_layer=combo.get("fc_layer"), include_prob=bool(combo.get("include_prob", True))
    )
    forest_obj = obj.get("forest", {})
    forest = ForestHyperparameters(
        n_trees=int(forest_obj.get("n_trees", 500)),
        max_depth=forest_obj.get("max_depth"),
        min_samples_split=int(forest_obj.get("min_samples_split", 2)),
        min_leaf_samples=int(forest_obj.get("min_leaf_samples", 1)),
        features_per_split=forest_obj.get("features_per_split", "sqrt"),
        bootstrap=bool(forest_obj.get("bootstrap", True)),
    )
    return EnsembleConfig(
        backbone=obj["backbone"],
        combination=combination,
        forest=forest,
        seed=int(obj["seed"]) if seed is None and "seed" in obj else (seed or 0),
        name=obj.get("name"),
    )


def cmd_split(args: argparse.Namespace) -> int:
    records = load_feature_records(args.features, expected_schema=None)
    split = stratified_split(records, args.ratios, args.seed)
    save_split(split, args.out)
    histogram = class_histogram(records)
    train_ids, val_ids, test_ids = set(split.train), set(split.validation), set(split.test)
    by_label = {label: [0, 0, 0] for label in ACTIVITIES}
    for record in records:
        part = 0 if record.image_id in train_ids else 1 if record.image_id in val_ids else 2
        by_label[record.label][part] += 1
    width = max(len(label.name) for label in ACTIVITIES)
    print(f"{'Activity'.ljust(width)}  {'total':>6}  {'train':>6}  {'valid':>6}  {'test':>6}")
    for label in ACTIVITIES:
        t, v, s = by_label[label]
        print(f"{label.name.ljust(width)}  {histogram[label]:>6}  {t:>6}  {v:>6}  {s:>6}")
    print(
        f"{'TOTAL'.ljust(width)}  {len(records):>6}  {len(split.train):>6}  "
        f"{len(split.validation):>6}  {len(split.test):>6}"
    )
    print(f"split written to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config, args.seed)
    records = load_feature_records(args.features, expected_schema=None)
    split = load_split(args.split) if args.split else None
    start = time.perf_counter()
    forest = train_on_partition(records, config, split, partition=args.partition)
    elapsed = time.perf_counter() - start
    serialize_forest(forest, args.out)
    print(
        f"trained {forest.n_trees} trees on {config.display_name} "
        f"(dimensionality {forest.dimensionality}) in {elapsed:.1f}s"
    )
    print(f"model written to {args.out}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    forest = deserialize_forest(args.model)
    records = load_feature_records(args.features, expected_schema=None)
    if args.split:
        records = select_partition(records, load_split(args.split), args.partition)
    rows = predict_records(forest, records)
    write_predictions(rows, args.out)
    print(f"{len(rows)} predictions written to {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.predictions:
        rows = read_predictions(args.predictions)
        if any(row.true_label is None for row in rows):
            raise ValueError("prediction file has rows without true labels")
        report = evaluate(
            [row.true_label for row in rows],
            [row.predicted_label for row in rows],
            name=args.name or "predictions",
        )
    else:
        if not (args.model and args.features and args.split):
            raise ValueError("evaluate needs --predictions or --model/--features/--split")
        forest = deserialize_forest(args.model)
        records = load_feature_records(args.features, expected_schema=None)
        split = load_split(args.split)
        subset = select_partition(records, split, args.partition)
        rows = predict_records(forest, subset)
        report = evaluate_forest(forest, records, split, partition=args.partition)
        if args.topk:
            topk_path = out_dir / "topk.jsonl"
            with open(topk_path, "w", encoding="utf-8") as fp:
                for row in rows:
                    entries = top_k(np.asarray(row.scores), args.topk)
                    fp.write(
                        json.dumps(
                            {
                                "image_id": row.image_id,
                                "true_label": row.true_label.name if row.true_label else None,
                                "top": [
                                    {"activity": lbl.name, "score": score}
                                    for lbl, score in entries
                                ],
                            },
                            separators=(",", ":"),
                        )
                        + "\n"
                    )
            print(f"top-{args.topk} tables written to {topk_path}")
    (out_dir / "report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
    )
    normalized = normalize_confusion(report.confusion)
    (out_dir / "confusion_normalized.json").write_text(
        json.dumps(normalized.tolist()) + "\n", encoding="utf-8"
    )
    table = render_comparison([report])
    (out_dir / "report.txt").write_text(table.text, encoding="utf-8")
    print(table.text)
    print(f"accuracy {format_percent(report.accuracy)}")
    print(f"reports written to {out_dir}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    features = manifest["features"]
    if not features:
        raise ValueError("manifest lists no feature files")
    for backbone, path in features.items():
        if not Path(path).is_file():
            raise ValueError(f"feature file for {backbone!r} not found: {path}")
    seed = int(manifest.get("seed", 0))
    raw_configs = manifest.get("configs", "standard")
    if raw_configs == "standard":
        configs = benchmark_configurations(seed=seed)
    else:
        configs = [_config_from_dict(obj, seed) for obj in raw_configs]
    if not configs:
        raise ValueError("manifest lists no configurations")
    records_by_backbone = {
        backbone: load_feature_records(path, expected_schema=None)
        for backbone, path in features.items()
    }
    # the split is a property of the image set, shared across backbones
    distinct = dedupe_by_image_id(
        [r for records in records_by_backbone.values() for r in records]
    )
    ratios = manifest.get("ratios", [0.75, 0.10, 0.15])
    split = stratified_split(distinct, tuple(ratios), seed)
    reports = run_comparison(
        records_by_backbone,
        configs,
        split,
        with_baseline=args.with_baseline or bool(manifest.get("with_baseline", False)),
    )
    comparison = render_comparison(reports)
    out_dir = Path(args.out or manifest.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "comparison.txt").write_text(comparison.text, encoding="utf-8")
    (out_dir / "comparison.json").write_text(
        json.dumps(comparison.data, indent=2) + "\n", encoding="utf-8"
    )
    print(comparison.text)
    print(f"comparison written to {out_dir}")
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    if args.counts:
        counts = [int(c) for c in args.counts.split(",")]
    elif args.per_class:
        counts = [args.per_class] * N_ACTIVITIES
    else:
        counts = list(apportion(args.total, DEFAULT_CLASS_WEIGHTS))
    records = generate_records(
        counts,
        seed=args.seed,
        fc_dim=args.fc_dim,
        pool_dim=args.pool_dim,
        cluster_spread=args.overlap,
        logit_noise=args.logit_noise,
        backbone=args.backbone,
    )
    dump_feature_records(records, args.out)
    print(f"{len(records)} synthetic records written to {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .annotation.service import create_app
    from .annotation.store import InMemoryStore, SqliteStore

    if args.store == ":memory:":
        store = InMemoryStore()
    else:
        store_path = Path(args.store)
        if not store_path.parent.is_dir():
            raise ValueError(f"data directory does not exist: {store_path.parent}")
        store = SqliteStore(store_path)
    if args.blob_root and not Path(args.blob_root).is_dir():
        raise ValueError(f"blob root does not exist: {args.blob_root}")
    app = create_app(
        store,
        service_secret=args.session_secret,
        admin_users=tuple(args.admin or ()),
        blob_root=args.blob_root,
    )
    if args.ui_dist:
        from fastapi.staticfiles import StaticFiles

        if not Path(args.ui_dist).is_dir():
            raise ValueError(f"UI asset directory does not exist: {args.ui_dist}")
        app.mount("/", StaticFiles(directory=args.ui_dist, html=True), name="ui")
    uvicorn.run(app, host=args.bind, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adlkit",
        description="Activity classification from CNN feature vectors "
        "with a random-forest late-fusion ensemble.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="write a stratified train/validation/test split")
    p.add_argument("--features", required=True)
    p.add_argument("--ratios", type=_parse_ratios, default=(0.75, 0.10, 0.15))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a forest on fused layer vectors")
    p.add_argument("--features", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--partition", default="train")
    p.add_argument(
        "--config",
        required=True,
        help=f"standard slug ({', '.join(STANDARD_CONFIG_SLUGS)}) or JSON config path",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write per-image predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--partition", default="test")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model or a prediction file")
    p.add_argument("--model", default=None)
    p.add_argument("--features", default=None)
    p.add_argument("--split", default=None)
    p.add_argument("--partition", default="test")
    p.add_argument("--predictions", default=None)
    p.add_argument("--topk", type=int, default=0)
    p.add_argument("--name", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="train and evaluate all manifest configurations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--with-baseline", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic feature file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--per-class", type=int, default=None)
    group.add_argument("--counts", default=None, help="21 comma-separated class counts")
    group.add_argument("--total", type=int, default=2100)
    p.add_argument("--fc-dim", type=int, default=4096)
    p.add_argument("--pool-dim", type=int, default=1024)
    p.add_argument("--overlap", type=float, default=0.5, help="fc cluster noise sd")
    p.add_argument("--logit-noise", type=float, default=0.6)
    p.add_argument("--backbone", default="synthnet")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--store", default=":memory:", help="sqlite path or :memory:")
    p.add_argument("--blob-root", default=None)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--session-secret", required=True)
    p.add_argument("--admin", action="append", default=None)
    p.add_argument("--ui-dist", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ComparisonError as exc:
        for name, err in exc.failures:
            print(f"error: {name}: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
