"""Downlink channel model: attenuation, antenna gains, overall channels.

``H = G A`` with ``A = diag(alpha)``, and ``h_e = alpha_e g_e``.  The sampler
draws unit-modulus gains with independent uniform phases, one counter-based
Philox stream per channel column, so entry ``(m, k)`` depends only on
``(seed, m, k)`` and never on ``M``, ``K`` or call order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from satsec.errors import DimensionError

RNG_NAME = "philox-column-v1"

# third counter word of the per-column Philox stream
STREAM_LEGIT = 0
STREAM_EAVES = 1
STREAM_CSI_ERROR = 2


def _as_complex_matrix(x, name):
    a = np.array(x, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError(f"{name} has non-finite entries")
    return a


def _as_complex_vector(x, name):
    a = np.array(x, dtype=complex)
    if a.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class AttenuationProfile:
    """Amplitude attenuation factors of the K users and the eavesdropper."""

    alpha: np.ndarray
    alpha_e: float

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        if alpha.size == 0 or not np.all(np.isfinite(alpha)) or np.any(alpha < 0):
            raise DimensionError("alpha must be a nonempty vector of finite values >= 0")
        alpha_e = float(self.alpha_e)
        if not np.isfinite(alpha_e) or alpha_e < 0:
            raise DimensionError("alpha_e must be finite and >= 0")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alpha_e", alpha_e)

    @classmethod
    def uniform(cls, K, alpha, alpha_e):
        return cls(np.full(K, float(alpha)), alpha_e)

    @property
    def K(self):
        return self.alpha.size


@dataclass(frozen=True)
class AntennaGains:
    """Square-root antenna gains: ``G`` (M x K) and eavesdropper ``g_e`` (M)."""

    G: np.ndarray
    g_e: np.ndarray

    def __post_init__(self):
        G = _as_complex_matrix(self.G, "G")
        g_e = _as_complex_vector(self.g_e, "g_e")
        if g_e.shape[0] != G.shape[0]:
            raise DimensionError(f"g_e has {g_e.shape[0]} rows, G has {G.shape[0]}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "g_e", g_e)


@dataclass(frozen=True)
class ChannelRealization:
    """Overall channels: column k of ``H`` is h_k; ``sigma2`` in watts."""

    H: np.ndarray
    h_e: np.ndarray
    sigma2: float

    def __post_init__(self):
        H = _as_complex_matrix(self.H, "H")
        h_e = _as_complex_vector(self.h_e, "h_e")
        if H.shape[0] < 1 or H.shape[1] < 1:
            raise DimensionError(f"H must be at least 1x1, got {H.shape}")
        if h_e.shape[0] != H.shape[0]:
            raise DimensionError(f"h_e has length {h_e.shape[0]}, H has {H.shape[0]} rows")
        sigma2 = float(self.sigma2)
        if not np.isfinite(sigma2) or sigma2 <= 0:
            raise DimensionError(f"sigma2 must be positive (watts), got {self.sigma2}")
        H.setflags(write=False)
        h_e.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h_e", h_e)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def M(self):
        return self.H.shape[0]

    @property
    def K(self):
        return self.H.shape[1]

    def with_eavesdropper(self, h_e):
        return ChannelRealization(self.H, h_e, self.sigma2)

    def to_dict(self):
        return {
            "H": complex_to_json(self.H),
            "h_e": complex_to_json(self.h_e),
            "sigma2_watts": self.sigma2,
        }

    @classmethod
    def from_dict(cls, d):
        missing = {"H", "h_e", "sigma2_watts"} - set(d)
        if missing:
            raise DimensionError(f"channel document missing keys: {sorted(missing)}")
        extra = set(d) - {"H", "h_e", "sigma2_watts"}
        if extra:
            raise DimensionError(f"channel document has unknown keys: {sorted(extra)}")
        return cls(complex_from_json(d["H"]), complex_from_json(d["h_e"]), d["sigma2_watts"])

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def complex_to_json(a):
    """Nested lists of ``[re, im]`` pairs, row-major."""
    a = np.asarray(a, dtype=complex)
    pairs = np.stack([a.real, a.imag], axis=-1)
    return pairs.tolist()


def complex_from_json(obj):
    a = np.array(obj, dtype=float)
    if a.ndim < 1 or a.shape[-1] != 2:
        raise DimensionError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


# ---------------------------------------------------------------------------
# eavesdropper CSI variants


def _check_covariance(R, name):
    R = np.array(R, dtype=complex)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise DimensionError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(R))))
    if np.max(np.abs(R - R.conj().T)) > 1e-12 * scale:
        raise DimensionError(f"{name} is not Hermitian")
    tr = float(np.real(np.trace(R)))
    if np.min(np.linalg.eigvalsh(R)) < -1e-10 * max(abs(tr), 1e-300):
        raise DimensionError(f"{name} is not positive semidefinite")
    return R


@dataclass(frozen=True)
class PerfectCsi:
    h_e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h_e", _as_complex_vector(self.h_e, "h_e"))


@dataclass(frozen=True)
class CovarianceCsi:
    """Only the a-priori ``E{(h_e h_e^H)^T}`` is known."""

    R_hat_e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R_hat_e", _check_covariance(self.R_hat_e, "R_hat_e"))


@dataclass(frozen=True)
class EstimatedCsi:
    """Estimate ``h_hat_e`` with error covariance ``R_delta_e``."""

    h_hat_e: np.ndarray
    R_delta_e: np.ndarray

    def __post_init__(self):
        h = _as_complex_vector(self.h_hat_e, "h_hat_e")
        R = _check_covariance(self.R_delta_e, "R_delta_e")
        if R.shape[0] != h.shape[0]:
            raise DimensionError("R_delta_e and h_hat_e dimensions differ")
        object.__setattr__(self, "h_hat_e", h)
        object.__setattr__(self, "R_delta_e", R)


# ---------------------------------------------------------------------------


def build_channel(gains: AntennaGains, atten: AttenuationProfile, sigma2: float) -> ChannelRealization:
    """Scale column k of G by alpha_k and g_e by alpha_e."""
    K = gains.G.shape[1]
    if atten.K != K:
        raise DimensionError(f"alpha has length {atten.K}, G has {K} columns")
    if not sigma2 > 0:
        raise DimensionError(f"sigma2 must be positive (watts), got {sigma2}")
    return ChannelRealization(gains.G * atten.alpha[None, :], atten.alpha_e * gains.g_e, sigma2)


def phase_stream(seed, column, stream=STREAM_LEGIT):
    """Generator for one channel column; independent of every other column."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DimensionError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, column, stream, 0]))


def sample_phases(seed, M, column, stream=STREAM_LEGIT):
    return phase_stream(seed, column, stream).uniform(0.0, 2.0 * np.pi, M)


def sample_channel(seed, M, K, atten: AttenuationProfile, sigma2, gain_magnitude=None) -> ChannelRealization:
    """Draw ``h_mk = alpha_k |g_mk| exp(j phase)`` with uniform phases.

    ``gain_magnitude`` optionally supplies ``|G|`` (M x K) and ``|g_e|`` (M) as
    a pair; by default every gain has unit modulus, so ``|H[m, k]| = alpha_k``.
    """
    if M < 1 or K < 1:
        raise DimensionError(f"need M >= 1 and K >= 1, got M={M}, K={K}")
    if atten.K != K:
        raise DimensionError(f"alpha has length {atten.K}, expected K={K}")
    phases = np.empty((M, K))
    for k in range(K):
        phases[:, k] = sample_phases(seed, M, k, STREAM_LEGIT)
    phase_e = sample_phases(seed, M, 0, STREAM_EAVES)
    G = np.exp(1j * phases)
    g_e = np.exp(1j * phase_e)
    if gain_magnitude is not None:
        mag, mag_e = gain_magnitude
        G = G * np.asarray(mag, dtype=float)
        g_e = g_e * np.asarray(mag_e, dtype=float)
    return build_channel(AntennaGains(G, g_e), atten, sigma2)


def trial_seed(base_seed, trial):
    """64-bit seed for Monte Carlo trial ``trial`` of a run keyed by ``base_seed``."""
    ss = np.random.SeedSequence([int(base_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def outer_covariance(h) -> np.ndarray:
    """``R = (h h^H)^T = conj(h) h^T``."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    return np.outer(h.conj(), h)


def dbm_to_watts(dbm):
    return 10.0 ** ((float(dbm) - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * np.log10(float(w)) + 30.0


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def amplitude_from_db_loss(loss_db):
    """Amplitude factor after ``loss_db`` dB of attenuation (0 dB -> 1)."""
    return 10.0 ** (-np.asarray(loss_db, dtype=float) / 20.0)
