"""Command-line front end.

Subcommands: train, transform, evaluate, compare, plot. Every training run
writes a manifest with the resolved configuration, seed and input hash so
artifacts can be regenerated exactly. Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import DataError, Dataset, format_value, load_csv, scale_min_max, scaling_params
from .evaluation import knn_cv_accuracy, pca_project
from .evolution import RunConfig, run_evolution
from .fitness import FitnessEvaluator
from .model import Model, file_sha256
from .neighbors import build_neighbor_index
from .plotting import render_scatter, scatter_from_embedding, write_points_csv
from .trees import fold_constants

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _resolve_t(spec: str, d: int) -> int:
    try:
        t = int(spec)
    except ValueError:
        raise UsageError(f"-t must be an integer or 'cr', got {spec!r}") from None
    if t < 1:
        raise UsageError("-t must be >= 1")
    if t > d:
        raise DataError(f"requested {t} output dimensions but data has only {d} features")
    return t


def _cube_root_t(d: int) -> int:
    return max(1, min(d, int(math.floor(d ** (1.0 / 3.0) + 0.5))))


def _config_from_args(args, t: int) -> RunConfig:
    cfg = RunConfig(
        generations=args.generations,
        population_size=args.pop,
        t=t,
        k=args.k,
        theta=args.theta,
        seed=args.seed,
        threads=args.threads,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _write_embedding_csv(path, embedding: np.ndarray, ds: Dataset | None) -> None:
    t = embedding.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        header = [f"dim_{j}" for j in range(t)]
        if ds is not None and ds.labels is not None:
            header.append("class")
        fh.write(",".join(header) + "\n")
        for i in range(embedding.shape[0]):
            row = [format_value(v) for v in embedding[i]]
            if ds is not None and ds.labels is not None:
                row.append(ds.label_names[ds.labels[i]])
            fh.write(",".join(row) + "\n")


def _train(args) -> int:
    raw = load_csv(args.data, args.label)
    t = _cube_root_t(raw.d) if args.t == "cr" else _resolve_t(args.t, raw.d)
    cfg = _config_from_args(args, t)

    scaled = scale_min_max(raw)
    nidx = build_neighbor_index(scaled, cfg.k)
    evaluator = FitnessEvaluator(scaled.features, nidx, cfg.theta)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    history_path = out / "history.jsonl"
    history_fh = open(history_path, "w", encoding="utf-8")

    def progress(gen, best, mean):
        history_fh.write(json.dumps(
            {"generation": gen, "best": best, "mean": mean}, sort_keys=True
        ) + "\n")
        if not args.quiet:
            print(f"gen {gen:4d}  best {best:.6f}  mean {mean:.6f}")

    try:
        state = run_evolution(cfg, raw.d, evaluator, progress=progress)
    finally:
        history_fh.close()

    mins, maxs = scaling_params(raw)
    manifest = {
        "tool": "gpmal",
        "version": __version__,
        "config": cfg.to_dict(),
        "data": str(args.data),
        "data_sha256": file_sha256(args.data),
        "label": args.label,
        "best_fitness": state.best_ever.fitness,
    }
    model = Model(
        trees=tuple(fold_constants(tree) for tree in state.best_ever.trees),
        feature_mins=mins,
        feature_maxs=maxs,
        manifest=manifest,
    )
    model.save(out / "model.txt")

    embedding = model.transform(raw.features)
    _write_embedding_csv(out / "embedding.csv", embedding, raw)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    if not args.quiet:
        print(f"best fitness {state.best_ever.fitness:.6f}; artifacts in {out}")
    return EXIT_OK


def _transform(args) -> int:
    model = Model.load(args.model)
    ds = load_csv(args.data, args.label)
    embedding = model.transform(ds.features)
    _write_embedding_csv(args.out, embedding, ds)
    return EXIT_OK


def _load_embedding(args) -> tuple[np.ndarray, Dataset]:
    """Embedding from either --embedding CSV or --model applied to --data."""
    if args.embedding:
        ds = load_csv(args.embedding, args.label)
        return ds.features, ds
    if not args.model or not args.data:
        raise UsageError("provide either --embedding, or --model with --data")
    model = Model.load(args.model)
    ds = load_csv(args.data, args.label)
    return model.transform(ds.features), ds


def _evaluate(args) -> int:
    embedding, ds = _load_embedding(args)
    if ds.labels is None:
        raise DataError("evaluation requires a label column (use --label)")
    report = knn_cv_accuracy(
        embedding, ds.labels, dataset=Path(args.data or args.embedding).stem,
        method=args.method, folds=args.folds, k_nn=args.knn, seed=args.cv_seed,
    )
    print(report.to_json())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    return EXIT_OK


def _compare(args) -> int:
    raw = load_csv(args.data, args.label)
    if raw.labels is None:
        raise DataError("compare requires a label column (use --label)")
    t = _cube_root_t(raw.d) if args.t == "cr" else _resolve_t(args.t, raw.d)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        raise UsageError("--seeds must list at least one integer seed")

    scaled = scale_min_max(raw)
    nidx = build_neighbor_index(scaled, args.k)
    evaluator = FitnessEvaluator(scaled.features, nidx, args.theta)
    name = Path(args.data).stem

    reports = []
    for seed in seeds:
        cfg = _config_from_args(args, t)
        cfg.seed = seed
        state = run_evolution(cfg, raw.d, evaluator)
        embedding = np.asarray(
            Model(
                trees=state.best_ever.trees,
                feature_mins=scaling_params(raw)[0],
                feature_maxs=scaling_params(raw)[1],
                manifest={},
            ).transform(raw.features)
        )
        reports.append(knn_cv_accuracy(
            embedding, raw.labels, dataset=name, method="gp-mal",
            folds=args.folds, k_nn=args.knn, seed=args.cv_seed,
        ))
        if not args.quiet:
            print(f"gp-mal seed {seed}: mean accuracy "
                  f"{reports[-1].mean_accuracy:.4f}", file=sys.stderr)

    # baseline runs on the data as loaded; min-max scaling is part of the
    # evolved method's own pipeline, not the comparison protocol
    pca_emb = pca_project(raw, t)
    pca_report = knn_cv_accuracy(
        pca_emb, raw.labels, dataset=name, method="pca",
        folds=args.folds, k_nn=args.knn, seed=args.cv_seed,
    )

    rows = [r.csv_row() for r in reports] + [pca_report.csv_row()]
    header = "dataset,method,t,seed,mean_accuracy," + ",".join(
        f"fold_{i}" for i in range(len(pca_report.fold_accuracies))
    )
    text = header + "\n" + "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    return EXIT_OK


def _plot(args) -> int:
    embedding, ds = _load_embedding(args)
    if ds.labels is None:
        raise DataError("plot requires a label column (use --label)")
    spec = scatter_from_embedding(
        embedding, ds.labels, ds.label_names,
        title=args.title or Path(args.data or args.embedding).stem,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(render_scatter(spec))
    write_points_csv(spec, out.with_suffix(".csv"))
    return EXIT_OK


def _add_common_data_args(p):
    p.add_argument("--data", help="input CSV (header row, comma separated)")
    p.add_argument("--label", default=None,
                   help="label column: header name or 'last'")


def _add_run_args(p):
    p.add_argument("-t", default="2",
                   help="output dimensionality, or 'cr' for the rounded cube root")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generations", type=int, default=1000)
    p.add_argument("--pop", type=int, default=1024, help="population size")
    p.add_argument("--k", type=int, default=10, help="neighbour block size")
    p.add_argument("--theta", type=float, default=20.0,
                   help="agreement kernel width")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--quiet", action="store_true")


def _add_eval_args(p):
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--knn", type=int, default=5)
    p.add_argument("--cv-seed", type=int, default=0,
                   help="seed for the fold assignment")


def build_parser() -> _Parser:
    parser = _Parser(prog="gpmal", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="evolve a mapping and write artifacts")
    _add_common_data_args(p)
    _add_run_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_train)

    p = sub.add_parser("transform", help="apply a saved model to new data")
    p.add_argument("--model", required=True)
    _add_common_data_args(p)
    p.add_argument("--out", required=True, help="embedding CSV path")
    p.set_defaults(func=_transform)

    p = sub.add_parser("evaluate", help="cross-validated k-NN accuracy of an embedding")
    _add_common_data_args(p)
    p.add_argument("--model")
    p.add_argument("--embedding", help="precomputed embedding CSV")
    p.add_argument("--method", default="gp-mal", help="method name for the report")
    p.add_argument("--out", help="write the JSON report here too")
    _add_eval_args(p)
    p.set_defaults(func=_evaluate)

    p = sub.add_parser("compare", help="run the evolved method and PCA side by side")
    _add_common_data_args(p)
    _add_run_args(p)
    p.add_argument("--seeds", default="1", help="comma-separated seeds")
    p.add_argument("--out", help="comparison CSV path")
    _add_eval_args(p)
    p.set_defaults(func=_compare)

    p = sub.add_parser("plot", help="SVG scatter of a 2-D embedding by class")
    _add_common_data_args(p)
    p.add_argument("--model")
    p.add_argument("--embedding", help="precomputed embedding CSV")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True, help="SVG output path")
    p.set_defaults(func=_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "data", None) is None and getattr(args, "embedding", None) is None:
            raise UsageError("no input data given")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
