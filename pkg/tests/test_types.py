import numpy as np
import pytest

from mixseg.types import (CoefficientTensor, FitReport, FunctionalDataset, ModelConfig, ModelParams,
                          canonicalize, check_responsibilities, hard_assign, validate_params)

from helpers import random_params


def params_1():
    return ModelParams(pi=[1.0], T=[(0, 4)], mu=[[[0.5, 1.0]]], sigma=[[[1.0, 2.0]]])


def codes(v):
    return [x.code for x in v]


def test_single_component_is_identifiable():
    assert validate_params(params_1(), ModelConfig(1, (0,)), 4, 2) == []


def test_duplicate_clusters_violate_id3():
    T = (0, 2, 4)
    mu = np.array([[0.0, 1.0], [1.0, 0.0]])
    var = np.ones((2, 2))
    p = ModelParams(pi=[0.5, 0.5], T=(T, T), mu=(mu, mu), sigma=(var, var))
    assert codes(validate_params(p, ModelConfig(2, (1, 1)), 4, 2)) == ["ID.3"]


def test_p_too_small_violates_id2():
    p = ModelParams(pi=[1.0], T=[(0, 1, 3)], mu=[[[0.0], [1.0]]], sigma=[[[1.0], [1.0]]])
    assert codes(validate_params(p, ModelConfig(1, (1,)), 3, 1)) == ["ID.2"]


def test_adjacent_equal_segments_violate_id1():
    p = ModelParams(pi=[1.0], T=[(0, 1, 3)], mu=[[[0.0, 1.0], [0.0, 1.0]]], sigma=[[[1.0, 1.0], [1.0, 1.0]]])
    assert codes(validate_params(p, ModelConfig(1, (1,)), 3, 2)) == ["ID.1"]
    # a variance difference in one coordinate is enough
    p = ModelParams(pi=[1.0], T=[(0, 1, 3)], mu=[[[0.0, 1.0], [0.0, 1.0]]], sigma=[[[1.0, 1.0], [1.0, 2.0]]])
    assert validate_params(p, ModelConfig(1, (1,)), 3, 2) == []


def test_zero_weight_violates_id4():
    base = params_1()
    p = ModelParams(pi=[1.0, 0.0], T=base.T * 2, mu=(base.mu[0], base.mu[0] + 1), sigma=base.sigma * 2)
    assert codes(validate_params(p, ModelConfig(2, (0, 0)), 4, 2)) == ["ID.4"]


def test_validate_is_pure():
    p = random_params(np.random.default_rng(0), 6, 3, (1, 2))
    cfg = ModelConfig(2, (1, 2))
    assert validate_params(p, cfg, 6, 3) == validate_params(p, cfg, 6, 3)


def test_shape_mismatch_is_structural():
    with pytest.raises(ValueError):
        validate_params(params_1(), ModelConfig(1, (0,)), 5, 2)
    with pytest.raises(ValueError):
        validate_params(params_1(), ModelConfig(2, (0, 0)), 4, 2)


def test_hard_assign():
    assert hard_assign([[0.2, 0.8]]).tolist() == [2]
    assert hard_assign([[0.5, 0.5]]).tolist() == [1]
    assert hard_assign(np.ones((4, 1))).tolist() == [1] * 4


def test_check_responsibilities():
    with pytest.raises(ValueError):
        check_responsibilities([[0.6, 0.6]])
    with pytest.raises(ValueError):
        check_responsibilities([[1.2, -0.2]])


def test_model_config_sorts_and_checks():
    cfg = ModelConfig(3, (3, 1, 2), min_segment_len=2)
    assert cfg.L == (1, 2, 3)
    cfg.check_feasible(8)
    with pytest.raises(ValueError):
        cfg.check_feasible(7)
    with pytest.raises(ValueError):
        ModelConfig(2, (1,))
    assert ModelConfig.from_dict(cfg.to_dict()) == cfg


def test_params_invariants():
    with pytest.raises(ValueError):
        ModelParams(pi=[0.5, 0.4], T=[(0, 2)] * 2, mu=[[[0.0]]] * 2, sigma=[[[1.0]]] * 2)
    with pytest.raises(ValueError):
        ModelParams(pi=[1.0], T=[(0, 2, 2)], mu=[[[0.0], [1.0]]], sigma=[[[1.0], [1.0]]])
    with pytest.raises(ValueError):
        ModelParams(pi=[1.0], T=[(0, 2)], mu=[[[0.0]]], sigma=[[[0.0]]])


def test_canonicalize_is_label_invariant():
    rng = np.random.default_rng(1)
    p = random_params(rng, 10, 3, (2, 1, 1, 0))
    s = rng.dirichlet(np.ones(4), size=5)
    ref, s_ref = canonicalize(p, s)
    assert list(ref.L) == sorted(ref.L)
    for perm in ([3, 2, 1, 0], [1, 0, 3, 2]):
        q, s_q = canonicalize(p.permuted(perm), s[:, perm])
        assert q.to_dict() == ref.to_dict()
        assert np.array_equal(s_q, s_ref)


def test_json_round_trips():
    rng = np.random.default_rng(2)
    p = random_params(rng, 8, 2, (0, 2))
    assert ModelParams.from_dict(p.to_dict()).to_dict() == p.to_dict()
    s = rng.dirichlet(np.ones(2), size=3)
    rep = FitReport(p, s, hard_assign(s), (-3.0, -2.0), 2, True)
    back = FitReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict() and back.loglik == -2.0


def test_tensor_invariants():
    with pytest.raises(ValueError):
        FunctionalDataset(np.array([[[np.nan]]]))
    with pytest.raises(ValueError):
        CoefficientTensor(np.zeros((1, 2, 3)), level=1, source_H=8)
    y = CoefficientTensor(np.zeros((2, 3, 4)), level=3, source_H=32)
    assert (y.n, y.d, y.p) == (2, 3, 4)
