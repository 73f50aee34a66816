import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satsec.beamform import (
    BeamformingMatrix,
    constraint_residuals,
    matched_filter_weights,
    null_space_projector,
    zf_nulling_weights,
    zf_nulling_weights_estimated,
    zfbf_weights,
)
from satsec.channel import AttenuationProfile, ChannelRealization, sample_channel
from satsec.errors import DimensionError, DimensionInfeasible


def eye_chan(M, K, e_index):
    I = np.eye(M, dtype=complex)
    return ChannelRealization(I[:, :K], I[:, e_index], 1.0)


def random_chan(seed, M, K):
    return sample_channel(seed, M, K, AttenuationProfile.uniform(K, 0.8, 0.8), 1e-4)


def test_projector_axis_aligned():
    P = null_space_projector(np.array([[1, 0, 0]]))
    np.testing.assert_allclose(P, np.diag([0, 1, 1]), atol=1e-15)


@given(st.integers(0, 2**32), st.integers(2, 9), st.data())
def test_projector_axioms_and_rank(seed, M, data):
    r = data.draw(st.integers(1, M - 1))
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((r, M)) + 1j * rng.standard_normal((r, M))
    P = null_space_projector(C)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-12)
    # rank oracle from an independent SVD
    assert np.trace(P).real == pytest.approx(M - np.linalg.matrix_rank(C), abs=1e-10)
    assert np.max(np.abs(C @ P)) <= 1e-10 * np.linalg.norm(C)


def test_projector_rank_deficient():
    row = np.array([1.0, 1j, 0.0, 2.0])
    P = null_space_projector(np.vstack([row, 2 * row]))
    assert np.trace(P).real == pytest.approx(3, abs=1e-10)


def test_projector_needs_room():
    with pytest.raises(DimensionInfeasible):
        null_space_projector(np.eye(3))


def test_nulling_orthogonal_channels():
    bf = zf_nulling_weights(eye_chan(3, 2, 2))
    np.testing.assert_allclose(bf.W, np.eye(3)[:, :2], atol=1e-15)


def test_nulling_needs_more_elements():
    with pytest.raises(DimensionInfeasible):
        zf_nulling_weights(random_chan(1, 5, 5))
    with pytest.raises(DimensionInfeasible):
        zfbf_weights(random_chan(1, 4, 5))


@pytest.mark.parametrize("seed", range(5))
def test_nulling_residuals(seed):
    chan = random_chan(seed, 8, 5)
    bf = zf_nulling_weights(chan)
    cross, eaves = constraint_residuals(chan, bf)
    assert cross <= 1e-10 and eaves <= 1e-10
    assert np.all(np.abs(np.sum(chan.H * bf.W, axis=0)) > 0)


def test_zfbf_leaves_eavesdropper():
    chan = random_chan(3, 8, 5)
    bf = zfbf_weights(chan)
    cross, eaves = constraint_residuals(chan, bf)
    assert cross <= 1e-10
    assert eaves > 1e-3


def test_zfbf_single_user_is_matched_filter():
    chan = random_chan(4, 6, 1)
    w = zfbf_weights(chan).W[:, 0]
    mf = chan.H[:, 0].conj() / np.linalg.norm(chan.H[:, 0])
    assert abs(abs(np.vdot(w, mf)) - 1) < 1e-12
    np.testing.assert_allclose(matched_filter_weights(chan).W[:, 0], w, atol=1e-12)


def test_zfbf_orthogonal_channels_is_matched():
    chan = eye_chan(4, 3, 3)
    np.testing.assert_allclose(zfbf_weights(chan).W, np.eye(4)[:, :3], atol=1e-15)


def test_estimated_equals_exact_for_zero_error():
    chan = random_chan(5, 8, 5)
    np.testing.assert_array_equal(zf_nulling_weights_estimated(chan, chan.h_e).W, zf_nulling_weights(chan).W)


def test_estimated_leakage_persists():
    M, K = 12, 2
    I = np.eye(M, dtype=complex)
    H = I[:, :K]
    h_e = (I[:, 2] + I[:, 3] + I[:, 0]) / np.sqrt(3)
    h_hat = I[:, 5]
    chan = ChannelRealization(H, h_e, 1.0)
    bf = zf_nulling_weights_estimated(chan, h_hat)
    _, eaves = constraint_residuals(chan, bf)
    assert eaves > 0.1


def test_estimated_trivial():
    I = np.eye(3, dtype=complex)
    chan = ChannelRealization(I[:, :1], I[:, 2], 1.0)
    np.testing.assert_allclose(zf_nulling_weights_estimated(chan, I[:, 1]).W[:, 0], I[:, 0], atol=1e-15)
    with pytest.raises(DimensionError):
        zf_nulling_weights_estimated(chan, np.ones(2))


@given(st.integers(0, 2**32), st.floats(1e-3, 1e3))
def test_nulling_invariant_to_eavesdropper_scale(seed, c):
    chan = random_chan(seed % 2**63, 8, 5)
    W1 = zf_nulling_weights(chan).W
    W2 = zf_nulling_weights(chan.with_eavesdropper(c * chan.h_e)).W
    np.testing.assert_allclose(W2, W1, atol=1e-12, rtol=0)


@given(st.integers(0, 2**32))
def test_nulling_optimal_within_null_space(seed):
    chan = random_chan(seed % 2**63, 8, 4)
    W = zf_nulling_weights(chan).W
    rng = np.random.default_rng(seed)
    for k in range(chan.K):
        C = np.array([chan.H[:, j] for j in range(chan.K) if j != k] + [chan.h_e])
        P = null_space_projector(C)
        best = abs(chan.H[:, k] @ W[:, k])
        for _ in range(20):
            v = P @ (rng.standard_normal(8) + 1j * rng.standard_normal(8))
            v /= np.linalg.norm(v)
            assert np.max(np.abs(C @ v)) <= 1e-10
            assert abs(chan.H[:, k] @ v) <= best + 1e-9


def test_weights_idempotent_and_phase_convention():
    chan = random_chan(9, 8, 5)
    W = zf_nulling_weights(chan).W
    for k in range(5):
        C = np.array([chan.H[:, j] for j in range(5) if j != k] + [chan.h_e])
        w2 = null_space_projector(C) @ W[:, k]
        assert np.max(np.abs(w2 - W[:, k])) <= 1e-12
        i = np.argmax(np.abs(W[:, k]))
        assert W[i, k].imag == 0 and W[i, k].real > 0


def test_beamforming_matrix_validation_and_json():
    with pytest.raises(DimensionError):
        BeamformingMatrix(np.ones((3, 2)))
    bf = BeamformingMatrix.normalized(np.ones((3, 2)) + 1j)
    back = BeamformingMatrix.from_json(bf.to_json())
    np.testing.assert_array_equal(back.W, bf.W)
