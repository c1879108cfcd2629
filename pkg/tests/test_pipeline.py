import json

import numpy as np
import pytest

from multisne.affinity import compute_view_affinities
from multisne.config import PipelineConfig
from multisne.dataset import MultiViewDataset, SplitSpec, build_label_view
from multisne.errors import ConfigError
from multisne.pipeline import embed_dataset, label_perplexity, resolve_variant
from multisne.sne import OptimizerConfig, build_indicator, optimize
from multisne.synth import NdsParams, generate_nds, subset_nds

OPT = OptimizerConfig(n_iter=100, exaggeration_iters=30, momentum_switch_iter=30)


@pytest.fixture(scope="module")
def ds():
    return subset_nds(generate_nds(NdsParams(dims=(15, 15, 15, 40))), "small", 0)


def test_variant_resolution(ds):
    cfg = PipelineConfig()
    split = SplitSpec(np.arange(15), np.arange(15, 30), 0.5, 0)
    assert resolve_variant(ds, cfg, None) == "multi"
    assert resolve_variant(ds, cfg, split) == "semi"
    holes = MultiViewDataset(views=ds.views, sample_ids=ds.sample_ids, labels=ds.labels,
                             class_names=ds.class_names,
                             observed=(np.r_[False, np.ones(29, bool)],) + (np.ones(30, bool),) * 3)
    assert resolve_variant(holes, cfg, None) == "generalized"
    with pytest.raises(ConfigError):
        resolve_variant(holes, PipelineConfig(variant="multi"), None)
    with pytest.raises(ConfigError):
        resolve_variant(ds, PipelineConfig(variant="semi"), None)


def test_label_perplexity_cap():
    assert label_perplexity(30, 10) == 3.0
    assert label_perplexity(2, 10) == 2.0


def test_semi_with_everything_labelled_equals_multi(ds):
    X = ds.views[0][:, :5]
    feat = compute_view_affinities(X, 5.0)
    everyone = SplitSpec(np.arange(30), np.array([], dtype=np.int64), 0.5, 0)
    lv = build_label_view(ds, everyone)
    masked = compute_view_affinities(lv.matrix, 5.0, mask=lv.labelled_mask)
    plain = compute_view_affinities(lv.matrix, 5.0)
    a = optimize([feat, masked], None, OPT, 1, ds.sample_ids,
                 indicators=[None, build_indicator(lv.labelled_mask)])
    b = optimize([feat, plain], None, OPT, 1, ds.sample_ids)
    assert np.array_equal(a.cost_trace, b.cost_trace)
    assert np.array_equal(a.coords, b.coords)


def test_generalized_with_full_masks_equals_multi(ds):
    cfg = PipelineConfig(perplexity=5, optimizer=OPT)
    full = MultiViewDataset(views=ds.views, sample_ids=ds.sample_ids, labels=ds.labels,
                            class_names=ds.class_names, observed=(np.ones(30, bool),) * 4)
    a = embed_dataset(full, PipelineConfig(perplexity=5, optimizer=OPT, variant="generalized"), 5, seed=2)
    b = embed_dataset(ds, cfg, 5, seed=2)
    assert a.variant == "generalized" and b.variant == "multi"
    assert np.array_equal(a.embedding.cost_trace, b.embedding.cost_trace)


def test_generalized_with_missing_rows(ds):
    obs = np.ones(30, bool)
    obs[[0, 5, 17]] = False
    holes = MultiViewDataset(views=ds.views, sample_ids=ds.sample_ids, labels=ds.labels,
                             class_names=ds.class_names, observed=(obs,) + (np.ones(30, bool),) * 3)
    res = embed_dataset(holes, PipelineConfig(perplexity=5, optimizer=OPT), 5, seed=0)
    assert res.variant == "generalized"
    assert not res.affinities[0].joint[0].any()
    assert np.all(np.isfinite(res.embedding.coords))


def test_semi_appends_label_view_last(ds):
    split = SplitSpec(np.arange(0, 30, 2), np.arange(1, 30, 2), 0.5, 0)
    res = embed_dataset(ds, PipelineConfig(perplexity=5, optimizer=OPT), 5, split=split)
    assert len(res.affinities) == 5
    assert res.affinities[-1].active_mask.tolist() == [i % 2 == 0 for i in range(30)]
    assert res.embedding.config_echo["weights"] == pytest.approx([0.2] * 5)


def test_weights_count_checked(ds):
    with pytest.raises(ConfigError):
        embed_dataset(ds, PipelineConfig(perplexity=5, optimizer=OPT, weights=[1, 1]), 5)


def test_config_roundtrip(tmp_path):
    cfg = PipelineConfig(perplexity=12, k=3)
    p = tmp_path / "c.json"
    p.write_text(cfg.to_json())
    back = PipelineConfig.from_file(p)
    assert back.to_dict() == cfg.to_dict()
    p.write_text(json.dumps({"perplexty": 3}))
    with pytest.raises(ConfigError, match="unknown"):
        PipelineConfig.from_file(p)
    with pytest.raises(ConfigError):
        PipelineConfig(pca_variance=0).validate()
