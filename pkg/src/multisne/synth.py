"""Noisy-data-view synthetic benchmark (NDS) and its imbalanced /
small-sample subsets.

Three classes A, B, C over four views. View ``v`` (v = 0, 1, 2) shifts the
mean of class ``v`` only, so each of those views isolates one class from
the other two; view 3 is 1000 features of pure noise. Every entry is drawn
as ``N(mu, sd) + N(noise_mean, noise_sd)`` and then passed through
``x + poly_coef * x**poly_degree``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import MultiViewDataset
from .errors import ConfigError, DataError

__all__ = ["NdsParams", "generate_nds", "subset_nds", "SUBSET_COUNTS"]

CLASS_NAMES = ("A", "B", "C")

SUBSET_COUNTS = {
    # class A is taken whole in the imbalanced subset
    "imbalanced": {"A": None, "B": 20, "C": 30},
    "small": {"A": 10, "B": 10, "C": 10},
}


@dataclass(frozen=True)
class NdsParams:
    n_per_class: tuple = (100, 100, 100)
    dims: tuple = (100, 100, 100, 1000)
    base_mean: float = 0.0
    mean_offset: float = 1.0
    sd: float = 1.0
    noise_mean: float = 0.0
    noise_sd: float = 0.5
    poly_coef: float = 0.3
    poly_degree: int = 2
    seed: int = 0

    def validate(self) -> None:
        if len(self.n_per_class) != 3 or min(self.n_per_class) < 1:
            raise ConfigError("NDS needs three classes with at least one sample each")
        if len(self.dims) != 4 or min(self.dims) < 1:
            raise ConfigError("NDS needs four views with at least one feature each")
        if self.sd <= 0 or self.noise_sd < 0:
            raise ConfigError("standard deviations must be positive")
        if self.poly_degree < 1:
            raise ConfigError("poly_degree must be >= 1")

    def class_means(self) -> np.ndarray:
        """(4, 3) array: mean of each class in each view."""
        mu = np.full((4, 3), self.base_mean)
        for v in range(3):
            mu[v, v] += self.mean_offset
        return mu

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_per_class"] = list(self.n_per_class)
        d["dims"] = list(self.dims)
        d["class_means"] = self.class_means().tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def generate_nds(params: NdsParams = NdsParams()) -> MultiViewDataset:
    params.validate()
    rng = np.random.default_rng(params.seed)
    labels = np.repeat(np.arange(3), params.n_per_class)
    n = len(labels)
    mu = params.class_means()
    views = []
    for v, p in enumerate(params.dims):
        X = rng.normal(mu[v][labels][:, None], params.sd, size=(n, p))
        X += rng.normal(params.noise_mean, params.noise_sd, size=(n, p))
        X = X + params.poly_coef * X ** params.poly_degree
        views.append(X)
    return MultiViewDataset(
        views=tuple(views),
        sample_ids=tuple(f"nds{i:04d}" for i in range(n)),
        labels=labels,
        class_names=CLASS_NAMES,
    )


def subset_nds(dataset: MultiViewDataset, kind: str, seed: int = 0) -> MultiViewDataset:
    """Seeded per-class subsample ("imbalanced": A all, B 20, C 30;
    "small": 10 per class). Row order of the source is preserved."""
    if kind not in SUBSET_COUNTS:
        raise ConfigError(f"unknown subset kind {kind!r}; choose from {sorted(SUBSET_COUNTS)}")
    if dataset.labels is None or dataset.n_classes != 3:
        raise DataError("subset_nds needs a labelled three-class dataset")
    rng = np.random.default_rng(seed)
    keep = []
    for c, name in enumerate(dataset.class_names):
        members = np.flatnonzero(dataset.labels == c)
        want = SUBSET_COUNTS[kind][CLASS_NAMES[c]]
        if want is None:
            keep.append(members)
            continue
        if want > len(members):
            raise DataError(f"class {name}: requested {want} samples but only {len(members)} exist")
        keep.append(rng.choice(members, size=want, replace=False))
    return dataset.subset(np.sort(np.concatenate(keep)))
