"""Command-line interface: ``embed``, ``benchmark``, ``synth``, ``plot``, ``split``.

Configuration precedence is flags > ``--config`` JSON file > defaults. The
resolved configuration is written next to every output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .affinity import DEFAULT_PERPLEXITY_GRID
from .classify import cv_scores
from .config import PipelineConfig
from .dataset import (IngestionConfig, MultiViewDataset, SplitSpec, _read_rows, load_multiview,
                      stratified_split)
from .errors import ConfigError, DataError, MultiSNEError
from .evaluate import run_benchmark
from .pipeline import classify_embedding, embed_dataset, reduce_views
from .plot import ScatterOptions, render_scatter
from .synth import NdsParams, generate_nds, subset_nds

log = logging.getLogger("multisne")

DELIMITERS = {"comma": ",", "tab": "\t", "whitespace": "whitespace"}


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# argument parsing


def _add_ingestion(p):
    g = p.add_argument_group("input files")
    g.add_argument("views", nargs="+", help="one delimited file per view")
    g.add_argument("--labels", help="label file, one label per row")
    g.add_argument("--delimiter", choices=sorted(DELIMITERS), default="comma")
    g.add_argument("--header", action="store_true", help="files start with a header row")
    g.add_argument("--id-column", help="join views by this column (name with --header, else index)")


def _add_pipeline(p):
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--perplexity", type=float)
    g.add_argument("--perplexity-grid",
                   help="comma-separated perplexities, or 'default' for "
                        + ",".join(f"{x:g}" for x in DEFAULT_PERPLEXITY_GRID))
    g.add_argument("--label-perplexity", type=float)
    g.add_argument("--pca-variance", type=float)
    g.add_argument("--no-pca", action="store_true")
    g.add_argument("--affinity-mode", choices=("joint", "conditional"))
    g.add_argument("--weights", help="'equal' or comma-separated weights, label view last")
    g.add_argument("--iterations", type=int, help="optimiser iterations")
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--exaggeration", type=float)
    g.add_argument("--exaggeration-iters", type=int)
    g.add_argument("--init-sd", type=float)
    g.add_argument("--dims", type=int, help="embedding dimension")
    g.add_argument("--no-gains", action="store_true")
    g.add_argument("--k", type=int, help="fixed KNN k (skips the grid search)")
    g.add_argument("--k-grid")
    g.add_argument("--cv-folds", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multisne", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a multi-view dataset")
    _add_ingestion(p)
    _add_pipeline(p)
    p.add_argument("--variant", choices=("auto", "multi", "semi", "generalized"))
    p.add_argument("--train-rate", type=float, help="stratified training fraction for the label view")
    p.add_argument("--split", help="SplitSpec JSON file (overrides --train-rate)")

    p = sub.add_parser("benchmark", help="repeated stratified-split evaluation")
    _add_ingestion(p)
    _add_pipeline(p)
    p.add_argument("--rates", help="comma-separated training rates")
    p.add_argument("--n-iter", type=int, help="repeats per rate")

    p = sub.add_parser("synth", help="write the NDS synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-per-class", type=int)
    p.add_argument("--subset", choices=("imbalanced", "small"))
    p.add_argument("--subset-seed", type=int, default=0)

    p = sub.add_parser("plot", help="render an embedding CSV as SVG")
    p.add_argument("embedding")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--params", help="params JSON to embed as SVG metadata")
    p.add_argument("--unlabelled-black", action="store_true")
    p.add_argument("--title")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)

    p = sub.add_parser("split", help="write a seeded stratified split")
    p.add_argument("--labels", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true")
    p.add_argument("-o", "--output", required=True)
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    opt = cfg.optimizer
    simple = {
        "perplexity": "perplexity",
        "label_perplexity": "label_perplexity",
        "pca_variance": "pca_variance",
        "affinity_mode": "affinity_mode",
        "k": "k",
        "cv_folds": "cv_folds",
        "seed": "seed",
        "out": "output_dir",
        "variant": "variant",
        "train_rate": "train_rate",
        "n_iter": "n_iter",
    }
    for arg, key in simple.items():
        val = getattr(args, arg, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.perplexity_grid:
        cfg.perplexity_grid = (list(DEFAULT_PERPLEXITY_GRID) if args.perplexity_grid == "default"
                               else _floats(args.perplexity_grid))
    if args.no_pca:
        cfg.use_pca = False
    if args.weights:
        cfg.weights = "equal" if args.weights == "equal" else _floats(args.weights)
    if args.k_grid:
        cfg.k_grid = _ints(args.k_grid)
    if getattr(args, "rates", None):
        cfg.rates = _floats(args.rates)
    for arg, key in (("iterations", "n_iter"), ("learning_rate", "learning_rate"),
                     ("exaggeration", "exaggeration"), ("exaggeration_iters", "exaggeration_iters"),
                     ("init_sd", "init_sd"), ("dims", "n_components")):
        val = getattr(args, arg)
        if val is not None:
            setattr(opt, key, val)
    if args.no_gains:
        opt.use_gains = False
    return cfg.validate()


def _load(args) -> MultiViewDataset:
    id_col = args.id_column
    if id_col is not None and not args.header:
        try:
            id_col = int(id_col)
        except ValueError:
            raise ConfigError("--id-column must be an index unless --header is given") from None
    schema = IngestionConfig(delimiter=DELIMITERS[args.delimiter], header=args.header, id_column=id_col)
    return load_multiview(args.views, args.labels, schema)


# ---------------------------------------------------------------------------
# commands


def _embedding_rows(ds, coords, split, predicted):
    role = np.full(ds.n_samples, "none", dtype=object)
    if split is not None:
        role[split.train_indices] = "train"
        role[split.test_indices] = "test"
    names = ds.class_names
    rows = []
    for i in range(ds.n_samples):
        true = names[ds.labels[i]] if ds.labels is not None else ""
        pred = names[predicted[i]] if i in predicted else ""
        rows.append([ds.sample_ids[i], *[repr(float(v)) for v in coords[i]], role[i], true, pred])
    return rows


def _write_embedding(out: Path, suffix: str, ds, res, predicted):
    coords = res.embedding.coords
    header = ["sample_id"] + [f"y{j + 1}" for j in range(coords.shape[1])] + \
        ["split_role", "true_label", "predicted_label"]
    write_atomic(out / f"embedding{suffix}.csv",
                 _csv_text(header, _embedding_rows(ds, coords, res.split, predicted)))
    trace = [[t, repr(float(c))] for t, c in enumerate(res.embedding.cost_trace)]
    write_atomic(out / f"cost_trace{suffix}.csv", _csv_text(["iteration", "cost"], trace))


def cmd_embed(args) -> int:
    cfg = resolve_config(args)
    ds = _load(args)
    split = None
    if args.split:
        try:
            split = SplitSpec.from_json(Path(args.split).read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read split {args.split}: {exc}") from exc
        split.validate(ds.n_samples)
    elif cfg.train_rate is not None:
        split = stratified_split(ds, cfg.train_rate, cfg.seed)
    if split is not None and ds.labels is None:
        raise DataError("a train/test split needs --labels")

    out = Path(cfg.output_dir)
    reduced = reduce_views(ds, cfg)
    grid = cfg.perplexity_grid or [cfg.perplexity]
    results = []
    for p in grid:
        res = embed_dataset(ds, cfg, p, split=split, seed=cfg.seed, reduced=reduced)
        predicted = {}
        if split is not None:
            pred = classify_embedding(res.embedding.coords, ds, split, cfg, seed=cfg.seed)
            predicted = {int(i): int(c) for i, c in zip(pred.test_indices, pred.predicted_classes)}
        cv = None
        if ds.labels is not None:
            rows = split.train_indices if split is not None else np.arange(ds.n_samples)
            scores = cv_scores(res.embedding.coords[rows], ds.labels[rows], cfg.k_grid,
                               cfg.cv_folds, cfg.seed)
            if scores:
                best = max(scores.values())
                cv = (best, min(k for k, s in scores.items() if s == best))
        results.append((p, res, predicted, cv))

    params = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "inputs": {"views": list(args.views), "labels": args.labels},
        "n_samples": ds.n_samples,
        "dims": list(ds.dims),
        "class_names": list(ds.class_names) if ds.class_names else None,
        "label_order": "first-appearance",
        "label_view_pca": False,
        "split": split.to_dict() if split is not None else None,
        "runs": [],
    }
    for p, res, predicted, cv in results:
        suffix = "" if len(grid) == 1 else f"_perp{p:g}"
        _write_embedding(out, suffix, ds, res, predicted)
        params["runs"].append({
            "perplexity": p,
            "variant": res.variant,
            "view_perplexities": res.view_perplexities,
            "final_cost": float(res.embedding.final_cost),
            "cv_accuracy": None if cv is None else cv[0],
            "cv_k": None if cv is None else cv[1],
            "files": [f"embedding{suffix}.csv", f"cost_trace{suffix}.csv"],
        })

    if len(grid) > 1:
        ranked = sorted(params["runs"], key=lambda r: (
            -(r["cv_accuracy"] if r["cv_accuracy"] is not None else -1.0), r["perplexity"]))
        rows = [[i + 1, f"{r['perplexity']:g}",
                 "" if r["cv_accuracy"] is None else repr(r["cv_accuracy"]),
                 "" if r["cv_k"] is None else r["cv_k"], repr(r["final_cost"])]
                for i, r in enumerate(ranked)]
        write_atomic(out / "grid_summary.csv",
                     _csv_text(["rank", "perplexity", "cv_accuracy", "k", "final_cost"], rows))
        best = ranked[0]["perplexity"]
        params["best_perplexity"] = best
        for p, res, predicted, _ in results:
            if p == best:
                _write_embedding(out, "", ds, res, predicted)
    write_atomic(out / "params.json", json.dumps(params, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(grid)} embedding(s) to {out}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = resolve_config(args)
    ds = _load(args)
    report = run_benchmark(ds, cfg.rates, cfg.n_iter, cfg.seed, cfg)
    out = Path(cfg.output_dir)
    table = report.summary_table()
    write_atomic(out / "benchmark.json", report.to_json() + "\n")
    write_atomic(out / "summary.txt", table)
    sys.stdout.write(table)
    return 0


def cmd_synth(args) -> int:
    params = NdsParams(seed=args.seed) if args.n_per_class is None else \
        NdsParams(seed=args.seed, n_per_class=(args.n_per_class,) * 3)
    ds = generate_nds(params)
    if args.subset:
        ds = subset_nds(ds, args.subset, args.subset_seed)
    out = Path(args.out)
    for m, X in enumerate(ds.views):
        write_atomic(out / f"view{m + 1}.csv",
                     _csv_text([f"f{j + 1}" for j in range(X.shape[1])],
                               [[repr(float(v)) for v in row] for row in X]))
    write_atomic(out / "labels.csv",
                 _csv_text(["label"], [[ds.class_names[c]] for c in ds.labels]))
    write_atomic(out / "ids.csv", _csv_text(["sample_id"], [[s] for s in ds.sample_ids]))
    meta = params.to_dict()
    meta["subset"] = args.subset
    meta["subset_seed"] = args.subset_seed if args.subset else None
    meta["n_samples"] = ds.n_samples
    meta["files"] = {"views": [f"view{m + 1}.csv" for m in range(ds.n_views)],
                     "labels": "labels.csv", "header": True}
    write_atomic(out / "params.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote NDS ({ds.n_samples} samples, dims {ds.dims}) to {out}")
    return 0


def cmd_plot(args) -> int:
    try:
        text = Path(args.embedding).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {args.embedding}: {exc}") from exc
    meta = None
    if args.params:
        try:
            meta = json.dumps(json.loads(Path(args.params).read_text(encoding="utf-8")), sort_keys=True)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read params {args.params}: {exc}") from exc
    svg = render_scatter(text, ScatterOptions(width=args.width, height=args.height,
                                              unlabelled_black=args.unlabelled_black,
                                              title=args.title, metadata=meta))
    write_atomic(args.output, svg)
    return 0


def cmd_split(args) -> int:
    _, rows = _read_rows(Path(args.labels), IngestionConfig(header=args.header))
    seq = [r[0].strip() for r in rows]
    names = list(dict.fromkeys(seq))
    labels = np.array([names.index(s) for s in seq], dtype=np.int64)
    # labels only; a dummy single-column view satisfies the dataset model
    ds = MultiViewDataset(views=(np.zeros((len(seq), 1)),), sample_ids=(),
                          labels=labels, class_names=tuple(names))
    split = stratified_split(ds, args.rate, args.seed)
    write_atomic(args.output, split.to_json() + "\n")
    return 0


COMMANDS = {
    "embed": cmd_embed,
    "benchmark": cmd_benchmark,
    "synth": cmd_synth,
    "plot": cmd_plot,
    "split": cmd_split,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except MultiSNEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
