"""Beamforming weights via null-space projection.

The weight for beam k is the normalised projection of ``conj(h_k)`` onto the
null space of a constraint matrix whose rows are transposed channels that must
see no signal from beam k.  The projector is built from an SVD with rank
tolerance ``1e-12 * s_max`` instead of the closed-form pseudo-inverse, which
is singular for M > K.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from satsec.channel import complex_from_json, complex_to_json
from satsec.errors import DimensionError, DimensionInfeasible, ZeroGain

RANK_RTOL = 1e-12
ZERO_GAIN_RTOL = 1e-14


@dataclass(frozen=True)
class BeamformingMatrix:
    """M x K weights; every column has unit norm."""

    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=complex)
        if W.ndim != 2:
            raise DimensionError(f"W must be 2-D, got shape {W.shape}")
        norms = np.linalg.norm(W, axis=0)
        if not np.all(np.abs(norms - 1.0) <= 1e-12):
            raise DimensionError(f"beamforming columns must have unit norm, got {norms}")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def M(self):
        return self.W.shape[0]

    @property
    def K(self):
        return self.W.shape[1]

    def to_json(self):
        return json.dumps({"W": complex_to_json(self.W)})

    @classmethod
    def from_json(cls, text):
        return cls(complex_from_json(json.loads(text)["W"]))

    @classmethod
    def normalized(cls, W):
        W = np.array(W, dtype=complex)
        return cls(W / np.linalg.norm(W, axis=0))


def _null_basis(C, M):
    if C.shape[0] == 0:
        return np.eye(M, dtype=complex)
    _, s, vh = np.linalg.svd(C, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    return vh[rank:].conj().T


def null_space_projector(C) -> np.ndarray:
    """Orthogonal projector P onto ``{w : C w = 0}`` for ``C`` of shape r x M, r < M."""
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    r, M = C.shape
    if r >= M:
        raise DimensionInfeasible(f"{r} constraint rows need more than {M} antenna elements")
    V = _null_basis(C, M)
    return V @ V.conj().T


def _fix_phase(w):
    i = int(np.argmax(np.abs(w)))
    out = w * (np.abs(w[i]) / w[i])
    out[i] = np.abs(w[i])
    return out


def _project_weights(H, extra_rows):
    M, K = H.shape
    W = np.empty((M, K), dtype=complex)
    for k in range(K):
        rows = [H[:, j] for j in range(K) if j != k]
        rows.extend(extra_rows)
        C = np.array(rows, dtype=complex).reshape(len(rows), M)
        V = _null_basis(C, M)
        hk = H[:, k]
        v = V @ (V.conj().T @ hk.conj())
        nv = np.linalg.norm(v)
        if nv <= ZERO_GAIN_RTOL * np.linalg.norm(hk):
            raise ZeroGain(k, float(nv))
        W[:, k] = _fix_phase(v / nv)
    return BeamformingMatrix(W)


def zf_nulling_weights(chan) -> BeamformingMatrix:
    """Zero-force the other users and null the eavesdropper ``h_e`` (needs M > K)."""
    return zf_nulling_weights_estimated(chan, chan.h_e)


def zf_nulling_weights_estimated(chan, h_hat_e) -> BeamformingMatrix:
    """As :func:`zf_nulling_weights` but nulling an estimate of the eavesdropper."""
    if chan.M <= chan.K:
        raise DimensionInfeasible(f"eavesdropper nulling needs M > K (M={chan.M}, K={chan.K})")
    h_hat_e = np.asarray(h_hat_e, dtype=complex).reshape(-1)
    if h_hat_e.shape[0] != chan.M:
        raise DimensionError(f"h_hat_e has length {h_hat_e.shape[0]}, expected {chan.M}")
    return _project_weights(chan.H, [h_hat_e])


def zfbf_weights(chan) -> BeamformingMatrix:
    """Zero-forcing on the legitimate users only (needs M >= K)."""
    if chan.M < chan.K:
        raise DimensionInfeasible(f"zero-forcing needs M >= K (M={chan.M}, K={chan.K})")
    return _project_weights(chan.H, [])


def matched_filter_weights(chan) -> BeamformingMatrix:
    """Conventional beam steering ``w_k = conj(h_k) / ||h_k||``."""
    H = chan.H
    norms = np.linalg.norm(H, axis=0)
    for k in np.flatnonzero(norms == 0):
        raise ZeroGain(int(k), 0.0)
    W = H.conj() / norms
    return BeamformingMatrix(np.column_stack([_fix_phase(W[:, k]) for k in range(H.shape[1])]))


def equal_gain_weights(M, K) -> BeamformingMatrix:
    """Channel-independent ``w_k = 1 / sqrt(M)`` for every beam."""
    return BeamformingMatrix(np.full((M, K), 1.0 / np.sqrt(M), dtype=complex))


def constraint_residuals(chan, bf, h_e=None):
    """Relative residuals ``|h^T w_k| / ||h||`` of co-channel and eavesdropper constraints."""
    W = bf.W
    H = chan.H
    h_e = chan.h_e if h_e is None else np.asarray(h_e, dtype=complex)
    cross = np.abs(H.T @ W) / np.linalg.norm(H, axis=0)[:, None]
    np.fill_diagonal(cross, 0.0)
    ne = np.linalg.norm(h_e)
    eaves = np.abs(h_e @ W) / ne if ne > 0 else np.zeros(W.shape[1])
    return float(cross.max(initial=0.0)), float(eaves.max(initial=0.0))
