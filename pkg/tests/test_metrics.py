import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixseg.metrics import (EvalReport, ari, evaluate, hausdorff, hausdorff_nearest, nce, optimal_permutation,
                            param_errors, segmentation_ari)
from mixseg.types import ModelParams

from helpers import random_params
from oracles import brute_force_permutation, pair_count_ari

partitions = st.integers(1, 4).flatmap(lambda K: st.tuples(
    st.just(K), st.integers(2, 25).flatmap(lambda n: st.tuples(
        st.lists(st.integers(1, K), min_size=n, max_size=n), st.lists(st.integers(1, K), min_size=n, max_size=n)))))


def test_ari_examples():
    assert ari([1, 1, 2, 2, 3], [1, 1, 2, 2, 3]) == 1.0
    assert ari([1, 1, 1, 2, 2, 2], [1] * 6) == 0.0
    # 15 pairs: 4 together in both, 6 together in truth, 7 together in estimate
    expected = (4 - 6 * 7 / 15) / (0.5 * (6 + 7) - 6 * 7 / 15)
    assert ari([1, 1, 1, 2, 2, 2], [1, 1, 2, 2, 2, 2]) == pytest.approx(expected)
    assert expected == pytest.approx(pair_count_ari([1, 1, 1, 2, 2, 2], [1, 1, 2, 2, 2, 2]))


def test_ari_matches_reference_implementations():
    sk = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        a, b = rng.integers(1, 4, n), rng.integers(1, 5, n)
        assert ari(a, b) == pytest.approx(pair_count_ari(a, b), abs=1e-12)
        assert ari(a, b) == pytest.approx(sk.adjusted_rand_score(a, b), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(partitions, st.permutations([1, 2, 3, 4]))
def test_ari_nce_properties(case, perm):
    K, (a, b) = case
    a, b = np.array(a), np.array(b)
    relabel = np.array(perm)[:K] if sorted(perm[:K]) == list(range(1, K + 1)) else np.arange(1, K + 1)
    assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-12)
    assert ari(a, relabel[b - 1]) == pytest.approx(ari(a, b), abs=1e-12)
    assert -1 <= ari(a, b) <= 1
    assert nce(a, a, K) == 0
    assert 0 <= nce(a, b, K) <= 1
    assert (nce(a, b, K) == 0) == (ari(a, b) == 1.0)
    assert nce(a, relabel[b - 1], K) == nce(a, b, K)


def test_permutation_examples():
    perm, miss = optimal_permutation([1, 1, 2, 2], [2, 2, 1, 1], 2)
    assert perm.tolist() == [1, 0] and miss == 0
    assert optimal_permutation([1, 1, 2, 2], [2, 2, 2, 2], 2)[1] == 2
    assert nce([1, 1, 2, 2], [1, 2, 1, 2], 2) == 0.5


def test_permutation_matches_brute_force():
    rng = np.random.default_rng(1)
    for K in range(1, 6):
        for _ in range(10):
            a, b = rng.integers(1, K + 1, 20), rng.integers(1, K + 1, 20)
            perm, miss = optimal_permutation(a, b, K)
            assert miss == brute_force_permutation(a.tolist(), b.tolist(), K)
            # the returned matching realises that count
            inv = np.argsort(perm)
            assert int((inv[b - 1] + 1 != a).sum()) == miss


def test_hausdorff_examples():
    T = [(0, 25, 50), (0, 10, 20, 50)]
    assert hausdorff(T, T, 50, [0, 1]) == 0.0
    assert hausdorff(T, [(0, 30, 50), (0, 10, 20, 50)], 50, [0, 1]) == pytest.approx(0.1)
    assert hausdorff(T, [(0, 10, 20, 50), (0, 25, 50)], 50, [1, 0]) == 0.0
    assert hausdorff(T, [(0, 10, 20, 50), (0, 25, 50)], 50, [0, 1]) is None


def test_hausdorff_triangle_inequality():
    rng = np.random.default_rng(2)
    d = 30
    for _ in range(100):
        Ls = rng.integers(0, 4, 3)
        draw = lambda: [np.concatenate([[0], np.sort(rng.choice(np.arange(1, d), l, replace=False)), [d]])
                        for l in Ls]
        a, b, c = draw(), draw(), draw()
        ident = list(range(3))
        assert hausdorff(a, c, d, ident) <= hausdorff(a, b, d, ident) + hausdorff(b, c, d, ident) + 1e-12


def test_hausdorff_nearest():
    assert hausdorff_nearest([(0, 25, 50), (0, 10, 20, 50)], [0, 10, 24, 50], 50) == pytest.approx(4 / 50)
    assert hausdorff_nearest([(0, 50)], [0, 50], 50) == 0.0
    assert hausdorff_nearest([(0, 5, 50)], [0, 50], 50) == 1.0


def test_param_errors():
    rng = np.random.default_rng(3)
    p = random_params(rng, 10, 2, (1, 2))
    errs = param_errors(p, p, [0, 1])
    assert all(not e.any() for e in errs)
    mu = [m.copy() for m in p.mu]
    mu[1][2, 0] += 0.3
    q = ModelParams(p.pi, p.T, tuple(mu), p.sigma)
    errs = param_errors(p, q, [0, 1])
    assert errs[1][2, 0] == pytest.approx(0.3) and np.count_nonzero(errs[1]) == 1
    with pytest.raises(ValueError):
        param_errors(p, q, [1, 0])


def test_evaluate_report():
    rng = np.random.default_rng(4)
    p = random_params(rng, 10, 2, (1, 2))
    z = np.array([1, 1, 2, 2, 2])
    rep = evaluate(z, p, 3 - z, p.permuted([1, 0]))
    assert rep.ari == 1.0 and rep.nce == 0.0 and rep.hausdorff == 0.0
    assert rep.to_dict()["permutation"] == [2, 1]
    assert isinstance(rep, EvalReport)
    assert segmentation_ari(p.T, p.T, [0, 1]) == 1.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        ari([1, 2], [1, 2, 1])
