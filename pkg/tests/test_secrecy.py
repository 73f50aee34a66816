import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satsec.channel import ChannelRealization, outer_covariance
from satsec.errors import DimensionError, TableExhausted
from satsec.secrecy import (
    GaussianMapping,
    TableMapping,
    required_sinr,
    secrecy_rate,
    secrecy_sinr,
    sinr_eavesdropper,
    sinr_legitimate,
    sinr_report,
    synthetic_rate_table,
)


def chan_of(H, h_e, sigma2):
    return ChannelRealization(np.array(H, dtype=complex), np.array(h_e, dtype=complex), sigma2)


def test_sinr_single_user():
    chan = chan_of([[1], [0]], [0, 0], 1e-4)
    assert sinr_legitimate(0, chan, np.array([[1], [0]]), [1e-2]) == pytest.approx(100)


def test_sinr_full_overlap():
    chan = chan_of([[1, 0], [0, 1]], [0, 0], 1.0)
    W = np.array([[1, 1], [0, 0]])
    assert sinr_legitimate(0, chan, W, [1, 1]) == pytest.approx(0.5)


def test_sinr_zero_power():
    chan = chan_of([[1, 0], [0, 1]], [1, 1], 1.0)
    assert sinr_legitimate(1, chan, np.eye(2), [0, 0]) == 0.0


def test_sinr_errors():
    chan = chan_of([[1, 0], [0, 1]], [1, 1], 1.0)
    with pytest.raises(IndexError):
        sinr_legitimate(2, chan, np.eye(2), [1, 1])
    with pytest.raises(DimensionError):
        sinr_legitimate(0, chan, np.eye(2), [1, -1])
    with pytest.raises(DimensionError):
        sinr_legitimate(0, chan, np.eye(3), [1, 1])


def test_eavesdropper_examples():
    chan = chan_of([[1, 0], [0, 1], [0, 0]], [0, 0, 1], 1.0)
    assert sinr_eavesdropper(0, chan, np.eye(3)[:, :2], [3, 4]) == 0.0
    one = chan_of([[1], [0]], [1, 0], 1.0)
    assert sinr_eavesdropper(0, one, np.array([[1], [0]]), [2]) == pytest.approx(2)


@given(st.floats(0.1, 10.0))
def test_eavesdropper_scaling(c):
    W = np.array([[1, 0.6], [0, 0.8]])
    base = chan_of([[1, 0], [0, 1]], [0.3, 0.7j], 1.0)
    scaled = base.with_eavesdropper(c * base.h_e)
    p = [1.0, 2.0]
    # with one interferer the noise term breaks exact invariance, so compare against direct evaluation
    te = np.abs(base.h_e @ W) ** 2
    expect = p[0] * c**2 * te[0] / (1.0 + p[1] * c**2 * te[1])
    assert sinr_eavesdropper(0, scaled, W, p) == pytest.approx(expect, rel=1e-12)
    alone = chan_of([[1], [0]], [0.3, 0.7j], 1e-300)
    w = np.array([[1], [0]])
    g1 = sinr_eavesdropper(0, alone, w, [1.0])
    g2 = sinr_eavesdropper(0, alone.with_eavesdropper(c * alone.h_e), w, [1.0])
    assert g2 == pytest.approx(c**2 * g1, rel=1e-12)


def test_eavesdropper_interference_limited_invariance():
    W = np.array([[1, 0.6], [0, 0.8]])
    base = chan_of([[1, 0], [0, 1]], [0.3, 0.7j], 1e-300)
    g1 = sinr_eavesdropper(0, base, W, [1.0, 2.0])
    g2 = sinr_eavesdropper(0, base.with_eavesdropper(5.0 * base.h_e), W, [1.0, 2.0])
    assert g2 == pytest.approx(g1, rel=1e-12)


def test_secrecy_sinr_examples():
    assert secrecy_sinr(3, 1) == 1
    assert secrecy_sinr(7.5, 0) == 7.5
    assert secrecy_sinr(2.2, 2.2) == 0
    assert secrecy_sinr(1, 3) < 0


def test_secrecy_rate_examples():
    assert secrecy_rate(1) == 1.0
    assert secrecy_rate(3) == 2.0
    assert secrecy_rate(-0.5) == 0.0
    with pytest.raises(ValueError):
        secrecy_rate(-1)


def test_required_sinr_examples():
    assert required_sinr(2) == 3
    assert required_sinr(0) == 0
    table = TableMapping((1.0, 2.0), (2.0, 5.0))
    assert required_sinr(1.5, table) == pytest.approx(10**0.5, rel=1e-12)
    assert required_sinr(1.0, table) == pytest.approx(10**0.2)
    with pytest.raises(TableExhausted):
        required_sinr(2.5, table)
    with pytest.raises(ValueError):
        required_sinr(-1)


@given(st.floats(0.0, 1e6))
def test_rate_round_trip(g):
    back = required_sinr(secrecy_rate(g), GaussianMapping())
    assert back == pytest.approx(g, rel=1e-12, abs=1e-300)


def test_table_validation():
    with pytest.raises(DimensionError):
        TableMapping((1.0, 1.0), (2.0, 3.0))
    with pytest.raises(DimensionError):
        TableMapping((1.0, 2.0), (3.0, 2.0))
    with pytest.raises(DimensionError):
        TableMapping.from_csv("a,b\n1,2\n")
    with pytest.raises(DimensionError, match="dB"):
        TableMapping.from_csv("efficiency_bps_hz,required_sinr_db\n1,x\n")


def test_shipped_table_dominates_shannon():
    table = synthetic_rate_table()
    assert table.dominates_shannon()
    for eff in table.efficiency:
        assert required_sinr(eff, table) > required_sinr(eff, GaussianMapping())
    # between grid points the stepwise lookup rounds up, so dominance still holds
    for r in np.linspace(0.0, table.efficiency[-1], 97):
        assert required_sinr(r, table) >= required_sinr(r, GaussianMapping())


def test_table_from_csv_file(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("# comment\nefficiency_bps_hz,required_sinr_db\n0.5,1.0\n1.0,3.0\n")
    t = TableMapping.from_csv(str(path))
    assert t.efficiency == (0.5, 1.0)


@given(st.integers(0, 2**32))
def test_sinr_matches_direct_form(seed):
    rng = np.random.default_rng(seed)
    M, K = 5, 3
    H = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    h_e = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    W = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    p = rng.uniform(0, 2, K)
    chan = ChannelRealization(H, h_e, 0.3)
    rep = sinr_report(chan, W, p)
    for k in range(K):
        T = np.abs(H.T @ W) ** 2
        direct = p[k] * T[k, k] / (0.3 + T[k] @ p - p[k] * T[k, k])
        got = sinr_legitimate(k, chan, W, p)
        assert got == pytest.approx(direct, rel=1e-12)
        assert rep.gamma_k[k] == pytest.approx(got, rel=1e-12)
        assert rep.gamma_ek[k] == pytest.approx(sinr_eavesdropper(k, chan, W, p), rel=1e-12)
    R = outer_covariance(h_e)
    assert np.allclose(R, R.conj().T)
