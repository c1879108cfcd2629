"""Set-based accuracy / precision / recall and the repeated-split benchmark."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import PipelineConfig
from .dataset import MultiViewDataset, stratified_split
from .errors import DataError, MultiSNEError
from .pipeline import classify_embedding, embed_dataset, feature_affinities, reduce_views

log = logging.getLogger(__name__)

__all__ = ["EvalReport", "RateBlock", "BenchmarkReport", "compute_metrics", "run_benchmark"]

METRICS = ("accuracy", "precision", "recall")


@dataclass
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    n_test: int
    confusion: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "n_test": self.n_test,
            "confusion": self.confusion,
        }


def _as_set(x) -> frozenset:
    if isinstance(x, (int, np.integer)):
        return frozenset((int(x),))
    return frozenset(int(v) for v in x)


def compute_metrics(true_classes: Sequence, predicted_classes: Sequence,
                    n_classes: Optional[int] = None) -> EvalReport:
    """Per-sample set overlaps averaged over samples.

    accuracy  = mean |T & P| / |T | P|
    precision = mean |T & P| / |T|
    recall    = mean |T & P| / |P|

    Entries may be class indices or collections of them (multi-label). A
    sample whose true and predicted sets are both empty scores 1; an empty
    denominator otherwise scores 0. ``confusion[t][p]`` counts single-label
    pairs when every entry is a plain index.
    """
    if len(true_classes) != len(predicted_classes):
        raise DataError(f"length mismatch: {len(true_classes)} true vs {len(predicted_classes)} predicted")
    n = len(true_classes)
    if n == 0:
        raise DataError("no samples to evaluate")
    T = [_as_set(t) for t in true_classes]
    P = [_as_set(p) for p in predicted_classes]
    if n_classes is not None:
        for s in T + P:
            if any(c < 0 or c >= n_classes for c in s):
                raise DataError(f"class index outside [0, {n_classes})")

    acc = prec = rec = 0.0
    for t, p in zip(T, P):
        if not t and not p:
            acc += 1.0
            prec += 1.0
            rec += 1.0
            continue
        inter = len(t & p)
        acc += inter / len(t | p)
        prec += inter / len(t) if t else 0.0
        rec += inter / len(p) if p else 0.0

    confusion = None
    single = all(len(t) == 1 for t in T) and all(len(p) == 1 for p in P)
    if single:
        c = n_classes if n_classes is not None else 1 + max(max(t) for t in T + P)
        cm = np.zeros((c, c), dtype=np.int64)
        for t, p in zip(T, P):
            cm[next(iter(t)), next(iter(p))] += 1
        confusion = cm.tolist()
    return EvalReport(acc / n, prec / n, rec / n, n, confusion)


@dataclass
class RateBlock:
    rate: float
    perplexity: float
    reports: list                        # dicts: seed, k, metrics...
    failures: list = field(default_factory=list)
    tuning: list = field(default_factory=list)

    def _values(self, metric):
        return np.array([r[metric] for r in self.reports], dtype=float)

    def mean(self, metric: str) -> float:
        v = self._values(metric)
        return float(v.mean()) if len(v) else float("nan")

    def sd(self, metric: str) -> float:
        """Sample standard deviation (ddof=1; 0 for a single repeat)."""
        v = self._values(metric)
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "perplexity": self.perplexity,
            "tuning": self.tuning,
            "reports": self.reports,
            "failures": self.failures,
            "n_ok": len(self.reports),
            "n_failed": len(self.failures),
            "mean": {m: self.mean(m) for m in METRICS},
            "sd": {m: self.sd(m) for m in METRICS},
        }


@dataclass
class BenchmarkReport:
    blocks: list
    n_iter: int
    base_seed: int
    config: dict

    @property
    def rates(self) -> list:
        return [b.rate for b in self.blocks]

    def block(self, rate: float) -> RateBlock:
        for b in self.blocks:
            if abs(b.rate - rate) < 1e-12:
                return b
        raise KeyError(rate)

    def to_dict(self) -> dict:
        return {
            "n_iter": self.n_iter,
            "base_seed": self.base_seed,
            "seeds": [self.base_seed + r for r in range(self.n_iter)],
            "config": self.config,
            "rates": [b.to_dict() for b in self.blocks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary_table(self) -> str:
        """Aligned 'mean (sd)' table, one row per metric, one column per rate."""
        head = ["metric"] + [f"{int(round(b.rate * 100))}%" for b in self.blocks]
        rows = [head]
        for m in METRICS:
            rows.append([m] + [f"{b.mean(m):.3f} ({b.sd(m):.3f})" for b in self.blocks])
        rows.append(["perplexity"] + [f"{b.perplexity:g}" for b in self.blocks])
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in
                                   enumerate(zip(r, widths))) for r in rows) + "\n"


def _one_run(dataset, cfg, perplexity, rate, seed, features):
    split = stratified_split(dataset, rate, seed)
    res = embed_dataset(dataset, cfg, perplexity, split=split, seed=seed, features=features)
    pred = classify_embedding(res.embedding.coords, dataset, split, cfg, seed=seed)
    truth = dataset.labels[split.test_indices]
    return compute_metrics(truth, pred.predicted_classes, dataset.n_classes), pred.k_used


def run_benchmark(dataset: MultiViewDataset, rates: Sequence[float] = (0.1, 0.2, 0.5, 0.8),
                  n_iter: int = 100, base_seed: int = 0,
                  pipeline: Optional[PipelineConfig] = None) -> BenchmarkReport:
    """Repeated stratified-split evaluation of the semi-supervised pipeline.

    Repeat ``r`` uses seed ``base_seed + r`` for the split, the embedding
    initialisation and the CV folds. When ``pipeline.perplexity_grid`` is
    set, each rate first picks its perplexity on a separate tuning split
    (seed ``base_seed + n_iter``) by held-out KNN accuracy, ties going to the
    smaller value.
    """
    cfg = pipeline or PipelineConfig()
    cfg.validate()
    if dataset.labels is None:
        raise DataError("benchmark needs a labelled dataset")

    reduced = reduce_views(dataset, cfg)
    cache: dict = {}

    def features(p):
        if p not in cache:
            cache[p] = feature_affinities(reduced, dataset, p, cfg.affinity_mode)
        return cache[p]

    blocks = []
    for rate in rates:
        tuning = []
        if cfg.perplexity_grid:
            tune_seed = base_seed + n_iter
            for p in sorted(set(float(x) for x in cfg.perplexity_grid)):
                try:
                    rep, k = _one_run(dataset, cfg, p, rate, tune_seed, features(p))
                    tuning.append({"perplexity": p, "accuracy": rep.accuracy, "k": k})
                except MultiSNEError as exc:
                    tuning.append({"perplexity": p, "error": str(exc)})
            scored = [t for t in tuning if "accuracy" in t]
            if not scored:
                raise DataError(f"rate {rate}: every perplexity in the grid failed")
            best = max(t["accuracy"] for t in scored)
            perplexity = min(t["perplexity"] for t in scored if t["accuracy"] == best)
        else:
            perplexity = float(cfg.perplexity)

        reports, failures = [], []
        for r in range(n_iter):
            seed = base_seed + r
            try:
                rep, k = _one_run(dataset, cfg, perplexity, rate, seed, features(perplexity))
            except MultiSNEError as exc:
                log.warning("rate %g repeat %d failed: %s", rate, r, exc)
                failures.append({"repeat": r, "seed": seed, "error": str(exc)})
                continue
            d = rep.to_dict()
            d.update(repeat=r, seed=seed, k=k)
            reports.append(d)
        blocks.append(RateBlock(float(rate), perplexity, reports, failures, tuning))

    echo = cfg.to_dict()
    echo["rates"] = [float(r) for r in rates]
    echo["n_iter"] = n_iter
    echo["seed"] = base_seed
    return BenchmarkReport(blocks, n_iter, base_seed, echo)

