import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisne.affinity import (calibrate_row, compute_view_affinities, shannon_entropy,
                               squared_distances)
from multisne.errors import ConfigError


def naive_sq(X):
    n = len(X)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = sum((a - b) ** 2 for a, b in zip(X[i], X[j]))
    return D


def row_perplexity(d, sigma):
    w = np.exp(-(d - d.min()) / (2 * sigma ** 2))
    p = w / w.sum()
    nz = p[p > 0]
    return 2 ** -(nz * np.log2(nz)).sum()


def test_distance_examples(rng):
    assert squared_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))[0, 1] == 25.0
    assert not squared_distances(np.ones((4, 3))).any()
    X = rng.normal(size=(20, 3))
    assert np.allclose(squared_distances(X), naive_sq(X), atol=1e-12)


def test_distance_mask():
    D = squared_distances(np.arange(4.0)[:, None], mask=np.array([1, 1, 0, 1], bool))
    assert np.isinf(D[2, [0, 1, 3]]).all() and np.isinf(D[[0, 1, 3], 2]).all()
    assert D[0, 3] == 9.0


def test_entropy_examples():
    assert shannon_entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)
    assert shannon_entropy(np.array([0.0, 1.0, 0.0])) == 0.0
    assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        shannon_entropy([1.5, -0.5])


def test_uniform_rows():
    d = np.array([0.0, 2.0, 2.0, 2.0, 2.0])
    _, row = calibrate_row(d, 2.0, 0)
    assert np.allclose(row[1:], 0.25) and row[0] == 0.0
    d = np.array([0.0, 1.0, 4.0, 9.0])
    # unequal distances only approach uniform as sigma grows; the search
    # stops once the perplexity is within tolerance
    _, row = calibrate_row(d, 3.0, 0)
    assert abs(2 ** shannon_entropy(row) - 3.0) < 1e-3
    assert np.allclose(row[1:], 1 / 3, atol=0.02)


def test_calibration_against_sigma_scan(rng):
    X = rng.normal(size=(30, 4))
    D = naive_sq(X)
    sigma, row = calibrate_row(D[0], 10.0, 0)
    assert abs(2 ** shannon_entropy(row) - 10.0) < 1e-3
    d = D[0, 1:]
    grid = np.geomspace(1e-2, 1e2, 10_000)
    perps = np.array([row_perplexity(d, s) for s in grid])
    best = grid[np.argmin(np.abs(perps - 10.0))]
    step = grid[1] / grid[0]
    assert best / step ** 2 <= sigma <= best * step ** 2
    # the row itself follows the Gaussian kernel
    ref = np.exp(-d / (2 * sigma ** 2))
    assert np.allclose(row[1:], ref / ref.sum(), atol=1e-12)


def test_equilateral_joint():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    a = compute_view_affinities(X, 2.0)
    off = a.joint[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 1 / 6)


def test_mask_subset_consistency(rng):
    X = rng.normal(size=(4, 3))
    mask = np.array([True, True, False, True])
    a = compute_view_affinities(X, 1.5, mask=mask)
    b = compute_view_affinities(X[mask], 1.5)
    assert np.allclose(a.joint[np.ix_(mask, mask)], b.joint, atol=1e-15)
    assert not a.joint[2].any() and not a.joint[:, 2].any()
    assert np.isnan(a.sigmas[2])


def test_perplexity_too_large():
    with pytest.raises(ConfigError):
        compute_view_affinities(np.arange(5.0)[:, None], 4.5)


def test_duplicate_points_clamped():
    X = np.zeros((5, 2))
    a = compute_view_affinities(X, 2.0)
    assert a.clamped.all()
    assert np.allclose(a.conditional[~np.eye(5, dtype=bool)], 0.25)


def test_label_like_ties_spread_over_class():
    # one-hot rows: distance 0 within a class, 2 across
    onehot = np.repeat(np.eye(2), [6, 4], axis=0)
    a = compute_view_affinities(onehot, 2.0)
    row = a.conditional[0]
    assert row[6:].sum() < 1e-6
    assert np.allclose(row[1:6], row[1:6].mean(), atol=1e-9)


def test_conditional_mode(rng):
    X = rng.normal(size=(10, 2))
    a = compute_view_affinities(X, 3.0, mode="conditional")
    assert np.allclose(a.joint, a.conditional / 10)
    with pytest.raises(ConfigError):
        compute_view_affinities(X, 3.0, mode="bogus")


@settings(max_examples=40, deadline=None)
@given(n=st.integers(5, 30), d=st.integers(1, 5), seed=st.integers(0, 10_000),
       frac=st.floats(0.1, 0.9))
def test_contracts(n, d, seed, frac):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    target = 1.0 + frac * (n - 3)
    a = compute_view_affinities(X, target)
    J = a.joint
    assert np.allclose(J, J.T) and (J >= 0).all() and not np.diag(J).any()
    assert abs(J.sum() - 1.0) < 1e-9
    assert np.all(np.abs(a.conditional.sum(axis=1) - 1.0) < 1e-9)
    ok = np.abs(a.achieved_perplexity - target) < 1e-3
    assert np.all(ok | a.clamped)

    # permutation conjugation
    perm = r.permutation(n)
    b = compute_view_affinities(X[perm], target)
    assert np.allclose(b.joint, J[np.ix_(perm, perm)], atol=1e-12)

    # rigid motion
    Q, _ = np.linalg.qr(r.normal(size=(d, d)))
    c = compute_view_affinities(X @ Q + r.normal(size=d), target)
    assert np.allclose(c.joint, J, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_entropy_monotone_in_sigma(seed):
    d = np.random.default_rng(seed).random(12) * 5
    sig = np.geomspace(0.05, 20, 60)
    h = [np.log2(row_perplexity(d, s)) for s in sig]
    assert np.all(np.diff(h) >= -1e-12)
