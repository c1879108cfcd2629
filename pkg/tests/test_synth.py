import json

import numpy as np
import pytest
from scipy import stats

from multisne.errors import ConfigError, DataError
from multisne.synth import NdsParams, generate_nds, subset_nds


@pytest.fixture(scope="module")
def nds():
    return generate_nds(NdsParams())


def test_defaults(nds):
    assert (nds.n_samples, nds.n_views) == (300, 4)
    assert nds.dims == (100, 100, 100, 1000)
    assert nds.class_counts().tolist() == [100, 100, 100]
    assert nds.class_names == ("A", "B", "C")


def test_deterministic(nds):
    again = generate_nds(NdsParams())
    assert all(np.array_equal(a, b) for a, b in zip(nds.views, again.views))
    other = generate_nds(NdsParams(seed=1))
    assert not np.array_equal(nds.views[0], other.views[0])


def test_mean_structure():
    mu = NdsParams().class_means()
    assert np.all(mu[3] == mu[3, 0])
    for v in range(3):
        others = [c for c in range(3) if c != v]
        assert mu[v, others[0]] == mu[v, others[1]] != mu[v, v]


def _rejections(X, labels, a, b, rng, n_sub=50, width=20):
    hits = 0
    for _ in range(n_sub):
        cols = rng.choice(X.shape[1], size=width, replace=False)
        s = X[:, cols].mean(axis=1)
        if stats.ttest_ind(s[labels == a], s[labels == b], equal_var=False).pvalue < 0.01:
            hits += 1
    return hits


def test_noise_view_has_no_class_signal(nds):
    rng = np.random.default_rng(0)
    y = nds.labels
    for a, b in ((0, 1), (0, 2), (1, 2)):
        # P(Binomial(50, 0.01) > 3) is about 0.002
        assert _rejections(nds.views[3], y, a, b, rng) <= 3
    # positive control: the signal view separates its class every time
    assert _rejections(nds.views[0], y, 0, 1, rng) >= 45


def _centroid_accuracy(X, y, rng):
    idx = rng.permutation(len(y))
    tr, te = idx[: len(y) // 2], idx[len(y) // 2:]
    cents = np.stack([X[tr][y[tr] == c].mean(axis=0) for c in range(3)])
    pred = ((X[te][:, None] - cents[None]) ** 2).sum(-1).argmin(axis=1)
    return float(np.mean(pred == y[te]))


def test_single_views_do_not_separate_all_classes(nds):
    rng = np.random.default_rng(1)
    for v in range(4):
        assert _centroid_accuracy(nds.views[v], nds.labels, rng) < 0.8
    joint = np.hstack(nds.views[:3])
    assert _centroid_accuracy(joint, nds.labels, rng) > 0.9


def test_subsets(nds):
    im = subset_nds(nds, "imbalanced", seed=2)
    assert im.n_samples == 150 and im.class_counts().tolist() == [100, 20, 30]
    sm = subset_nds(nds, "small", seed=2)
    assert sm.n_samples == 30 and sm.class_counts().tolist() == [10, 10, 10]
    assert subset_nds(nds, "small", 2).sample_ids == sm.sample_ids
    assert subset_nds(nds, "small", 3).sample_ids != sm.sample_ids


def test_subset_rows_stay_aligned(nds):
    sub = subset_nds(nds, "imbalanced", seed=5)
    rows = [int(s[3:]) for s in sub.sample_ids]
    for m in range(4):
        assert np.array_equal(sub.views[m], nds.views[m][rows])
    assert np.array_equal(sub.labels, nds.labels[rows])


def test_subset_errors(nds):
    with pytest.raises(ConfigError):
        subset_nds(nds, "huge")
    tiny = generate_nds(NdsParams(n_per_class=(5, 5, 5), dims=(2, 2, 2, 2)))
    with pytest.raises(DataError):
        subset_nds(tiny, "imbalanced")


def test_params_json():
    d = json.loads(NdsParams().to_json())
    assert d["dims"] == [100, 100, 100, 1000] and d["noise_sd"] == 0.5
    with pytest.raises(ConfigError):
        NdsParams(dims=(1, 2, 3)).validate()
