import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mixseg.types import FunctionalDataset
from mixseg.wavelet import WaveletConfig, dwt_haar_approx, dwt_haar_full, idwt_haar, project_dataset

from oracles import haar_matrix


def test_constant_signal_scales_by_sqrt_width():
    out = dwt_haar_approx(np.full(8, 2.5), 3)
    assert out.shape == (1,)
    assert out[0] == pytest.approx(2.5 * 2 ** 1.5, abs=1e-12)


def test_antisymmetric_pair_vanishes():
    assert dwt_haar_approx(np.array([1.0, -1.0]), 1)[0] == pytest.approx(0.0, abs=1e-15)


def test_matches_explicit_basis_matrix():
    rng = np.random.default_rng(3)
    x = rng.normal(size=32)
    for J in range(6):
        assert np.allclose(dwt_haar_approx(x, J), haar_matrix(32, J) @ x, atol=1e-12)


def test_impulse_level_one():
    x = np.zeros(8)
    x[0] = 1
    approx, details = dwt_haar_full(x, 1)
    h = 1 / np.sqrt(2)
    assert np.allclose(approx, [h, 0, 0, 0])
    assert len(details) == 1 and np.allclose(details[0], [h, 0, 0, 0])


def test_zero_signal():
    approx, details = dwt_haar_full(np.zeros(16), 4)
    assert not approx.any() and not any(dt.any() for dt in details)


def test_round_trip_and_parseval():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1e3, 1e3, size=64)
    for J in range(7):
        approx, details = dwt_haar_full(x, J)
        assert np.abs(idwt_haar(approx, details) - x).max() < 1e-10
        energy = (approx ** 2).sum() + sum((dt ** 2).sum() for dt in details)
        assert energy == pytest.approx((x ** 2).sum(), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 16, elements=st.floats(-100, 100)), arrays(np.float64, 16, elements=st.floats(-100, 100)),
       st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 4))
def test_linearity(x, z, a, b, J):
    lhs = dwt_haar_approx(a * x + b * z, J)
    rhs = a * dwt_haar_approx(x, J) + b * dwt_haar_approx(z, J)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_operates_on_last_axis():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(3, 5, 16))
    out = dwt_haar_approx(X, 2)
    assert out.shape == (3, 5, 4)
    assert np.allclose(out[1, 2], dwt_haar_approx(X[1, 2], 2))


@pytest.mark.parametrize("H,J,p", [(32, 3, 4), (336, 3, 42), (8, 0, 8)])
def test_project_dataset_dimension(H, J, p):
    X = np.random.default_rng(2).normal(size=(2, 3, H))
    y = project_dataset(FunctionalDataset(X), WaveletConfig(J))
    assert y.y.shape == (2, 3, p) and y.p == p and y.level == J and y.source_H == H
    if J == 0:
        assert np.array_equal(y.y, X)


def test_rejects_indivisible_length():
    with pytest.raises(ValueError, match="divisible"):
        dwt_haar_approx(np.zeros(12), 3)
    with pytest.raises(ValueError):
        project_dataset(FunctionalDataset(np.zeros((1, 1, 12))), WaveletConfig(3))


def test_rejects_bad_config():
    with pytest.raises(ValueError):
        WaveletConfig(level=-1)
