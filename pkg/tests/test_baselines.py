import itertools

import numpy as np
import pytest

from mixseg import segcost
from mixseg.baselines import fit_simple_mix, fit_simple_seg
from mixseg.em import EMConfig, dp_segment, fit
from mixseg.metrics import ari, hausdorff_nearest
from mixseg.simulate import SimSpec, generate_cosine
from mixseg.types import ModelConfig
from mixseg.wavelet import WaveletConfig, project_dataset

from oracles import brute_force_segmentation


def test_simple_mix_easy_data():
    b = generate_cosine(SimSpec(n=100, d=50, alpha=1.0, seed=2))
    y = project_dataset(b.dataset, WaveletConfig(3))
    rep = fit_simple_mix(y, 3, EMConfig(seed=2))
    assert ari(b.z_true, rep.partition) >= 0.9
    assert rep.extra["good_restarts"] >= 10


def test_simple_mix_single_cluster():
    y = np.random.default_rng(0).normal(size=(10, 4, 2))
    rep = fit_simple_mix(y, 1, EMConfig(n_restarts=1))
    assert rep.partition.tolist() == [1] * 10
    assert np.allclose(rep.params.mu[0], y.mean(axis=0))


def test_simple_mix_matches_em_with_one_timepoint():
    rng = np.random.default_rng(1)
    for seed in range(5):
        z = rng.integers(0, 2, 60)
        y = rng.normal(size=(60, 1, 3)) + np.where(z[:, None, None] == 0, -3.0, 3.0)
        em = EMConfig(seed=seed, rel_tol=1e-13, max_iter=2000, n_restarts=3)
        a = fit_simple_mix(y, 2, em, shared_variance=False)
        b = fit(y, ModelConfig(2, (0, 0)), em)
        assert abs(a.loglik - b.loglik) <= 1e-8 * (1 + abs(b.loglik))


def test_simple_seg_recovers_shift():
    y = np.random.default_rng(3).normal(scale=0.3, size=(8, 15, 2))
    y[:, 9:] += 2
    T = fit_simple_seg(y, 1)
    assert T.tolist() == [0, 9, 15]
    tab = segcost.cost_table(segcost.build_stats(y), np.ones(8))
    assert tuple(T.tolist()) == brute_force_segmentation(tab, 1)[0]


def test_simple_seg_is_unit_weight_dp():
    y = np.random.default_rng(4).normal(size=(5, 10, 2))
    tab = segcost.cost_table(segcost.build_stats(y), np.ones(5))
    for L in range(4):
        assert np.array_equal(fit_simple_seg(y, L), dp_segment(tab, L)[0])
    assert fit_simple_seg(y, 0).tolist() == [0, 10]


def test_simple_seg_on_cosine_data():
    b = generate_cosine(SimSpec(n=100, d=50, alpha=1.0, seed=5))
    y = project_dataset(b.dataset, WaveletConfig(3))
    T = fit_simple_seg(y, 5)
    assert len(T) == 7
    assert hausdorff_nearest(b.params_true.T, T, 50) <= 0.1


def test_simple_seg_errors():
    y = np.zeros((2, 3, 1))
    with pytest.raises(ValueError):
        fit_simple_seg(y, 3)
    with pytest.raises(ValueError):
        fit_simple_seg(y, -1)
