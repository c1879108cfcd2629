"""K-nearest-neighbour classification of embedded test samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError

__all__ = [
    "DEFAULT_K_GRID",
    "Prediction",
    "Classifier",
    "KNNClassifier",
    "knn_predict",
    "stratified_folds",
    "grid_search_k",
]

DEFAULT_K_GRID = (1, 3, 5, 7, 9, 11, 15, 21)


@dataclass(frozen=True)
class Prediction:
    test_indices: np.ndarray
    predicted_classes: np.ndarray
    k_used: int


class Classifier:
    """Minimal fit/predict interface for classifiers on embedding coordinates."""

    def fit(self, X, y) -> "Classifier":
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError


def knn_predict(train_coords, train_classes, test_coords, k: int,
                test_indices: Optional[Sequence[int]] = None) -> Prediction:
    """Majority vote among the ``k`` nearest training points.

    Equal distances are ordered by training index; tied votes go to the
    smallest class index.
    """
    Xtr = np.asarray(train_coords, dtype=float)
    ytr = np.asarray(train_classes, dtype=np.int64)
    Xte = np.asarray(test_coords, dtype=float)
    if Xtr.ndim == 1:
        Xtr = Xtr[:, None]
    if Xte.ndim == 1:
        Xte = Xte[:, None]
    n_tr = Xtr.shape[0]
    if n_tr == 0:
        raise DataError("empty training set")
    if len(ytr) != n_tr:
        raise DataError("train_coords and train_classes differ in length")
    if not 1 <= k <= n_tr:
        raise ConfigError(f"k={k} must lie in [1, {n_tr}]")
    if test_indices is None:
        test_indices = np.arange(Xte.shape[0])
    test_indices = np.asarray(test_indices, dtype=np.int64)
    if Xte.shape[0] == 0:
        return Prediction(test_indices, np.zeros(0, dtype=np.int64), int(k))

    D = cdist(Xte, Xtr, "sqeuclidean")
    nearest = np.argsort(D, axis=1, kind="stable")[:, :k]
    n_classes = int(ytr.max()) + 1
    votes = np.zeros((Xte.shape[0], n_classes), dtype=np.int64)
    np.add.at(votes, (np.repeat(np.arange(Xte.shape[0]), k), ytr[nearest].ravel()), 1)
    # argmax returns the first maximum, i.e. the smallest tied class
    return Prediction(test_indices, votes.argmax(axis=1), int(k))


class KNNClassifier(Classifier):
    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y):
        self.X_ = np.asarray(X, dtype=float)
        self.y_ = np.asarray(y, dtype=np.int64)
        return self

    def predict(self, X):
        return knn_predict(self.X_, self.y_, X, self.k).predicted_classes


def stratified_folds(classes, folds: int, seed: int) -> np.ndarray:
    """Fold id per sample; each class is shuffled then dealt round-robin,
    continuing the deal across classes so fold sizes stay balanced."""
    y = np.asarray(classes, dtype=np.int64)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    pos = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        members = members[rng.permutation(len(members))]
        fold_of[members] = (pos + np.arange(len(members))) % folds
        pos += len(members)
    return fold_of


def cv_scores(train_coords, train_classes, k_grid, folds: int, seed: int) -> dict:
    """Mean fold accuracy for every feasible k."""
    X = np.asarray(train_coords, dtype=float)
    y = np.asarray(train_classes, dtype=np.int64)
    folds = min(folds, len(y))
    fold_of = stratified_folds(y, folds, seed)
    min_train = min(int(np.sum(fold_of != f)) for f in range(folds))
    scores = {}
    for k in sorted(set(int(k) for k in k_grid)):
        if k > min_train:
            continue
        accs = []
        for f in range(folds):
            held = fold_of == f
            pred = knn_predict(X[~held], y[~held], X[held], k).predicted_classes
            accs.append(float(np.mean(pred == y[held])))
        scores[k] = float(np.mean(accs))
    return scores


def grid_search_k(train_coords, train_classes, k_grid: Sequence[int] = DEFAULT_K_GRID,
                  folds: int = 5, seed: int = 0) -> int:
    """k with the best mean stratified-CV accuracy (ties -> smaller k).

    Grid values larger than the smallest fold-training set are skipped.
    """
    if len(k_grid) == 0:
        raise ConfigError("k grid is empty")
    if any(int(k) < 1 for k in k_grid):
        raise ConfigError("k values must be positive")
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    grid = sorted(set(int(k) for k in k_grid))
    if len(grid) == 1:
        return grid[0]
    if len(train_classes) < 2:
        raise DataError("grid search needs at least 2 training samples")
    scores = cv_scores(train_coords, train_classes, grid, folds, seed)
    if not scores:
        return 1
    best = max(scores.values())
    return min(k for k, s in scores.items() if s == best)
