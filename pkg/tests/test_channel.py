import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from satsec.channel import (
    AntennaGains,
    AttenuationProfile,
    ChannelRealization,
    CovarianceCsi,
    EstimatedCsi,
    amplitude_from_db_loss,
    build_channel,
    dbm_to_watts,
    outer_covariance,
    sample_channel,
    sample_phases,
    trial_seed,
    watts_to_dbm,
)
from satsec.errors import DimensionError


def test_build_channel_scales_columns():
    gains = AntennaGains(np.array([[1, 2], [3, 4]]), np.array([1, 1]))
    chan = build_channel(gains, AttenuationProfile([0.5, 1.0], 1.0), 1.0)
    np.testing.assert_array_equal(chan.H, [[0.5, 2], [1.5, 4]])
    np.testing.assert_array_equal(chan.h_e, [1, 1])


def test_build_channel_identity_and_zero():
    G = np.arange(6).reshape(3, 2) + 1j
    g_e = np.ones(3)
    chan = build_channel(AntennaGains(G, g_e), AttenuationProfile.uniform(2, 1.0, 1.0), 1e-4)
    np.testing.assert_array_equal(chan.H, G)
    np.testing.assert_array_equal(chan.h_e, g_e)
    zero = build_channel(AntennaGains(G, g_e), AttenuationProfile.uniform(2, 0.0, 1.0), 1e-4)
    assert not np.any(zero.H)


def test_build_channel_rejects_mismatch():
    with pytest.raises(DimensionError):
        build_channel(AntennaGains(np.ones((3, 2)), np.ones(3)), AttenuationProfile.uniform(3, 1, 1), 1.0)
    with pytest.raises(DimensionError):
        AntennaGains(np.ones((3, 2)), np.ones(4))
    with pytest.raises(DimensionError):
        build_channel(AntennaGains(np.ones((3, 2)), np.ones(3)), AttenuationProfile.uniform(2, 1, 1), 0.0)


@given(st.floats(0.01, 10.0), st.integers(0, 2**32))
def test_build_channel_linear_in_attenuation(c, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    gains = AntennaGains(G, rng.standard_normal(4))
    a = AttenuationProfile(rng.uniform(0.1, 1, 3), 0.7)
    H1 = build_channel(gains, a, 1.0).H
    H2 = build_channel(gains, AttenuationProfile(c * a.alpha, 0.7), 1.0).H
    np.testing.assert_allclose(H2, c * H1, rtol=1e-15, atol=0)


def test_sample_channel_moduli_exact():
    chan = sample_channel(123, 8, 5, AttenuationProfile.uniform(5, 0.8, 0.8), 1e-4)
    assert np.all(np.abs(chan.H) == np.float64(0.8)) or np.allclose(np.abs(chan.H), 0.8, rtol=2e-16)
    np.testing.assert_allclose(np.abs(chan.h_e), 0.8, rtol=2e-16)


def test_sample_channel_deterministic():
    a = AttenuationProfile.uniform(3, 0.8, 0.5)
    c1 = sample_channel(99, 6, 3, a, 1e-4)
    c2 = sample_channel(99, 6, 3, a, 1e-4)
    assert c1.H.tobytes() == c2.H.tobytes() and c1.h_e.tobytes() == c2.h_e.tobytes()
    assert not np.array_equal(c1.H, sample_channel(100, 6, 3, a, 1e-4).H)


def test_entries_independent_of_shape():
    small = sample_channel(5, 4, 2, AttenuationProfile.uniform(2, 1, 1), 1.0)
    big = sample_channel(5, 9, 6, AttenuationProfile.uniform(6, 1, 1), 1.0)
    np.testing.assert_array_equal(big.H[:4, :2], small.H)
    np.testing.assert_array_equal(big.h_e[:4], small.h_e)


def test_phases_uniform_ks():
    phases = np.concatenate([sample_phases(s, 1000, k) for s in range(20) for k in range(5)])
    assert phases.size == 10**5
    assert phases.min() >= 0 and phases.max() < 2 * np.pi
    res = stats.kstest(phases, stats.uniform(loc=0, scale=2 * np.pi).cdf)
    assert res.pvalue > 0.01


def test_trial_seed_is_stable():
    assert trial_seed(0, 3) == trial_seed(0, 3)
    assert len({trial_seed(7, t) for t in range(1000)}) == 1000


def test_outer_covariance_examples():
    np.testing.assert_array_equal(outer_covariance([1, 2]), [[1, 2], [2, 4]])
    np.testing.assert_array_equal(outer_covariance([1, 1j]), [[1, 1j], [-1j, 1]])


@given(st.integers(0, 2**32), st.integers(1, 9))
def test_outer_covariance_quadratic_form(seed, M):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    w = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    w /= np.linalg.norm(w)
    R = outer_covariance(h)
    assert np.max(np.abs(R - R.conj().T)) <= 1e-14 * np.vdot(h, h).real
    lhs = np.vdot(w, R @ w)
    assert abs(lhs - abs(h @ w) ** 2) <= 1e-12 * max(1.0, np.vdot(h, h).real)


def test_channel_json_round_trip(chan85):
    doc = json.loads(chan85.to_json())
    assert set(doc) == {"H", "h_e", "sigma2_watts"}
    assert len(doc["H"]) == 8 and len(doc["H"][0]) == 5 and len(doc["H"][0][0]) == 2
    back = ChannelRealization.from_json(chan85.to_json())
    np.testing.assert_array_equal(back.H, chan85.H)
    np.testing.assert_array_equal(back.h_e, chan85.h_e)
    assert back.sigma2 == chan85.sigma2


def test_channel_json_rejects_unknown_keys(chan85):
    doc = chan85.to_dict()
    doc["extra"] = 1
    with pytest.raises(DimensionError, match="extra"):
        ChannelRealization.from_dict(doc)


def test_channel_is_read_only(chan85):
    with pytest.raises(ValueError):
        chan85.H[0, 0] = 0


def test_csi_validation():
    CovarianceCsi(np.eye(3))
    with pytest.raises(DimensionError):
        CovarianceCsi(np.array([[1, 1j], [1j, 1]]))
    with pytest.raises(DimensionError):
        CovarianceCsi(-np.eye(2))
    with pytest.raises(DimensionError):
        EstimatedCsi(np.ones(3), np.eye(2))


def test_unit_conversions():
    assert dbm_to_watts(-10) == pytest.approx(1e-4, rel=1e-15)
    assert watts_to_dbm(1e-4) == pytest.approx(-10)
    assert amplitude_from_db_loss(0) == 1.0
    assert amplitude_from_db_loss(20) == pytest.approx(0.1)
