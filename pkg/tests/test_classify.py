import numpy as np
import pytest

from oracles import cv_oracle, knn_oracle
from multisne.classify import (KNNClassifier, cv_scores, grid_search_k, knn_predict,
                               stratified_folds)
from multisne.errors import ConfigError, DataError


def test_examples():
    tr = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]])
    assert knn_predict(tr, [0, 1, 2], [[1.0, 1.0]], 1).predicted_classes.tolist() == [1]
    left = np.c_[np.full(5, -10.0), np.arange(5.0)]
    right = np.c_[np.full(5, 10.0), np.arange(5.0)]
    p = knn_predict(np.r_[left, right], [0] * 5 + [1] * 5, [[9.0, 0.0]], 3)
    assert p.predicted_classes.tolist() == [1]


def test_random_matches_oracle():
    r = np.random.default_rng(5)
    X, y = r.normal(size=(40, 2)), r.integers(0, 3, 40)
    T = r.normal(size=(10, 2))
    got = knn_predict(X, y, T, 5, test_indices=np.arange(100, 110))
    assert got.predicted_classes.tolist() == knn_oracle(X, y, T, 5)
    assert got.test_indices.tolist() == list(range(100, 110)) and got.k_used == 5


def test_tie_rules():
    # equidistant neighbours: index order decides who is in the top k
    tr = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert knn_predict(tr, [2, 0, 1], [[0.0, 0.0]], 1).predicted_classes.tolist() == [2]
    # split vote: smallest class wins
    assert knn_predict(tr[:2], [2, 0], [[0.0, 0.0]], 2).predicted_classes.tolist() == [0]


def test_errors():
    with pytest.raises(DataError):
        knn_predict(np.zeros((0, 2)), [], [[0, 0]], 1)
    with pytest.raises(ConfigError):
        knn_predict(np.zeros((2, 2)), [0, 1], [[0, 0]], 3)
    with pytest.raises(ConfigError):
        grid_search_k(np.zeros((4, 2)), [0, 1, 0, 1], [])


def test_properties():
    r = np.random.default_rng(8)
    X, y = r.normal(size=(30, 2)), r.integers(0, 4, 30)
    assert knn_predict(X, y, X, 1).predicted_classes.tolist() == y.tolist()
    th = 1.1
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    T = r.normal(size=(15, 2))
    for k in (1, 3, 7):
        a = knn_predict(X, y, T, k).predicted_classes
        b = knn_predict(X @ R + 4, y, T @ R + 4, k).predicted_classes
        assert a.tolist() == b.tolist()


def test_duplicate_majority_keeps_prediction():
    tr = np.array([[0.0], [1.0], [1.5], [-2.0]])
    y = np.array([1, 1, 0, 0])
    before = knn_predict(tr, y, [[0.4]], 3).predicted_classes[0]
    assert before == 1
    after = knn_predict(np.r_[tr, [[1.0]]], np.r_[y, 1], [[0.4]], 3).predicted_classes[0]
    assert after == 1


def test_classifier_interface():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    clf = KNNClassifier(k=1).fit(X, [0, 0, 1, 1])
    assert clf.predict([[0.2], [10.4]]).tolist() == [0, 1]


def test_folds_stratified():
    y = np.repeat([0, 1, 2], [10, 7, 5])
    f = stratified_folds(y, 5, 0)
    assert np.bincount(f).max() - np.bincount(f).min() <= 1
    for c in range(3):
        counts = np.bincount(f[y == c], minlength=5)
        assert counts.max() - counts.min() <= 1
    assert np.array_equal(f, stratified_folds(y, 5, 0))


def test_grid_search_examples():
    X = np.r_[np.zeros((10, 2)), np.full((10, 2), 50.0)] + np.random.default_rng(0).normal(0, 0.1, (20, 2))
    y = np.repeat([0, 1], 10)
    assert grid_search_k(X, y, [3, 5, 1], folds=5) == 1
    assert grid_search_k(X, y, [1]) == 1


def test_grid_search_matches_oracle():
    r = np.random.default_rng(21)
    X = np.r_[r.normal(0, 1.5, (25, 2)), r.normal(2, 1.5, (25, 2))]
    y = np.repeat([0, 1], 25)
    grid = [1, 5, 15]
    f = stratified_folds(y, 5, 3)
    ref = cv_oracle(X, y, f, grid)
    got = cv_scores(X, y, grid, 5, 3)
    assert got == pytest.approx(ref, abs=1e-15)
    best = max(ref.values())
    assert grid_search_k(X, y, grid, 5, 3) == min(k for k, v in ref.items() if v == best)


def test_grid_skips_infeasible_k():
    X = np.arange(10.0)[:, None]
    y = np.repeat([0, 1], 5)
    assert 21 not in cv_scores(X, y, [1, 21], 5, 0)
