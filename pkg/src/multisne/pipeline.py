"""Glue between the stages: PCA -> affinities -> optimiser -> KNN."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .affinity import AffinityMatrix, compute_view_affinities
from .classify import Prediction, grid_search_k, knn_predict
from .config import PipelineConfig
from .dataset import LabelView, MultiViewDataset, SplitSpec, build_label_view
from .errors import ConfigError, DataError
from .preprocess import pca_reduce
from .sne import Embedding, ViewWeights, optimize

log = logging.getLogger(__name__)

__all__ = [
    "EmbedResult",
    "reduce_views",
    "feature_affinities",
    "label_affinity",
    "resolve_variant",
    "embed_dataset",
    "classify_embedding",
]


@dataclass
class EmbedResult:
    embedding: Embedding
    variant: str
    perplexity: float
    view_perplexities: list
    split: Optional[SplitSpec] = None
    label_view: Optional[LabelView] = None
    affinities: list = field(default_factory=list)


def reduce_views(dataset: MultiViewDataset, cfg: PipelineConfig) -> list:
    """PCA scores per view, fitted on the observed rows only."""
    out = []
    for m, (X, obs) in enumerate(zip(dataset.views, dataset.observed)):
        if not cfg.use_pca:
            out.append(np.asarray(X))
            continue
        red = pca_reduce(X[obs], cfg.pca_variance, name=f"view {m}")
        scores = np.zeros((dataset.n_samples, red.components_kept))
        scores[obs] = red.matrix
        out.append(scores)
    return out


def _feature_perplexity(p: float, n_active: int) -> float:
    if p > n_active - 1:
        capped = (n_active - 1) / 3.0
        log.warning("perplexity %g too large for %d samples; using %g", p, n_active, capped)
        return capped
    return float(p)


def label_perplexity(p: float, n_labelled: int) -> float:
    """Label-view perplexity, capped at a third of the labelled neighbours."""
    return float(min(p, (n_labelled - 1) / 3.0))


def feature_affinities(reduced: list, dataset: MultiViewDataset, perplexity: float,
                       mode: str = "joint") -> list:
    affs = []
    for X, obs in zip(reduced, dataset.observed):
        p = _feature_perplexity(perplexity, int(obs.sum()))
        affs.append(compute_view_affinities(X, p, mask=None if obs.all() else obs, mode=mode))
    return affs


def label_affinity(label_view: LabelView, perplexity: float, mode: str = "joint") -> AffinityMatrix:
    n_l = int(label_view.labelled_mask.sum())
    if n_l < 3:
        raise DataError(f"label view needs at least 3 labelled samples, got {n_l}")
    return compute_view_affinities(label_view.matrix, label_perplexity(perplexity, n_l),
                                   mask=label_view.labelled_mask, mode=mode)


def resolve_variant(dataset: MultiViewDataset, cfg: PipelineConfig,
                    split: Optional[SplitSpec]) -> str:
    missing = any(not o.all() for o in dataset.observed)
    v = cfg.variant
    if v == "auto":
        if missing:
            return "generalized"
        return "semi" if split is not None else "multi"
    if v in ("multi", "semi") and missing:
        raise ConfigError(f"variant {v!r} needs fully observed views; use 'generalized'")
    if v == "semi" and split is None:
        raise ConfigError("variant 'semi' needs labels and a train/test split")
    return v


def embed_dataset(dataset: MultiViewDataset, cfg: PipelineConfig, perplexity: float,
                  split: Optional[SplitSpec] = None, seed: int = 0,
                  reduced: Optional[list] = None,
                  features: Optional[list] = None) -> EmbedResult:
    """Embed all samples; with a split the label view is appended last.

    ``reduced`` / ``features`` let callers reuse split-independent work.
    """
    variant = resolve_variant(dataset, cfg, split)
    if features is None:
        if reduced is None:
            reduced = reduce_views(dataset, cfg)
        features = feature_affinities(reduced, dataset, perplexity, cfg.affinity_mode)
    affs = list(features)
    lv = None
    if split is not None and variant != "multi":
        lv = build_label_view(dataset, split)
        lp = cfg.label_perplexity if cfg.label_perplexity is not None else perplexity
        affs.append(label_affinity(lv, lp, cfg.affinity_mode))

    if cfg.weights == "equal":
        weights = ViewWeights.equal(len(affs))
    else:
        if len(cfg.weights) != len(affs):
            raise ConfigError(f"{len(cfg.weights)} weights given for {len(affs)} views")
        weights = ViewWeights(tuple(cfg.weights))

    emb = optimize(affs, weights, cfg.optimizer, seed=seed, sample_ids=dataset.sample_ids)
    return EmbedResult(
        embedding=emb,
        variant=variant,
        perplexity=float(perplexity),
        view_perplexities=[a.perplexity_target for a in affs],
        split=split,
        label_view=lv,
        affinities=affs,
    )


def classify_embedding(coords, dataset: MultiViewDataset, split: SplitSpec,
                       cfg: PipelineConfig, seed: int = 0) -> Prediction:
    """KNN on the embedding: training rows vote, test rows are predicted."""
    tr = np.asarray(split.train_indices)
    te = np.asarray(split.test_indices)
    y = dataset.labels
    k = cfg.k if cfg.k is not None else grid_search_k(coords[tr], y[tr], cfg.k_grid, cfg.cv_folds, seed)
    k = min(k, len(tr))
    return knn_predict(coords[tr], y[tr], coords[te], k, test_indices=te)
