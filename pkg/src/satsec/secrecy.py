"""SINR and secrecy-rate algebra, and secrecy-rate -> SINR threshold mappings.

All quantities are linear (not dB); rates are in bits/s/Hz (base-2 logs).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from satsec.channel import outer_covariance
from satsec.errors import DimensionError, TableExhausted

TABLE_HEADER = ("efficiency_bps_hz", "required_sinr_db")


def _weights(W):
    return np.asarray(getattr(W, "W", W), dtype=complex)


def _check_inputs(k, chan, W, p):
    W = _weights(W)
    p = np.asarray(p, dtype=float).reshape(-1)
    K = chan.K
    if W.shape != (chan.M, K):
        raise DimensionError(f"W has shape {W.shape}, expected {(chan.M, K)}")
    if p.shape != (K,):
        raise DimensionError(f"p has length {p.size}, expected {K}")
    if np.any(p < 0):
        raise DimensionError("powers must be nonnegative")
    if not 0 <= k < K:
        raise IndexError(f"beam index {k} out of range for K={K}")
    return W, p


def _quad(R, w):
    return float(np.real(np.vdot(w, R @ w)))


def _sinr(R, k, W, p, sigma2):
    gains = np.array([_quad(R, W[:, j]) for j in range(W.shape[1])])
    interference = p @ gains - p[k] * gains[k]
    return p[k] * gains[k] / (sigma2 + interference)


def sinr_legitimate(k, chan, W, p) -> float:
    """SINR of user k: ``P_k w_k^H R_k w_k / (sigma2 + sum_{j!=k} P_j w_j^H R_k w_j)``."""
    W, p = _check_inputs(k, chan, W, p)
    return _sinr(outer_covariance(chan.H[:, k]), k, W, p, chan.sigma2)


def sinr_eavesdropper(k, chan, W, p) -> float:
    """SINR of the eavesdropper wiretapping beam k."""
    W, p = _check_inputs(k, chan, W, p)
    return _sinr(outer_covariance(chan.h_e), k, W, p, chan.sigma2)


def secrecy_sinr(gamma_k, gamma_ek):
    """``(gamma_k - gamma_ek) / (1 + gamma_ek)``; negative values are kept."""
    return (gamma_k - gamma_ek) / (1.0 + gamma_ek)


def secrecy_rate(gamma_s) -> float:
    """Secrecy rate in bits/s/Hz, clamped at zero."""
    if gamma_s <= -1:
        raise ValueError(f"secrecy SINR must exceed -1, got {gamma_s}")
    return max(0.0, float(np.log1p(gamma_s) / np.log(2.0)))


@dataclass(frozen=True)
class SinrReport:
    gamma_k: np.ndarray
    gamma_ek: np.ndarray
    gamma_s: np.ndarray


def sinr_report(chan, W, p) -> SinrReport:
    """All K legitimate, eavesdropper and secrecy SINRs at once (vectorised)."""
    W, p = _check_inputs(0, chan, W, p)
    T = np.abs(chan.H.T @ W) ** 2  # T[k, j] = |h_k^T w_j|^2
    Te = np.abs(chan.h_e @ W) ** 2
    sig = p * np.diag(T)
    interf = T @ p - sig
    g = sig / (chan.sigma2 + interf)
    sig_e = p * Te
    ge = sig_e / (chan.sigma2 + (Te @ p - sig_e))
    return SinrReport(g, ge, secrecy_sinr(g, ge))


# ---------------------------------------------------------------------------
# rate -> SINR threshold


@dataclass(frozen=True)
class GaussianMapping:
    """Gaussian inputs: ``gamma = 2^R - 1``."""

    name: str = "gaussian"

    def threshold(self, rate):
        return float(np.expm1(rate * np.log(2.0)))


@dataclass(frozen=True)
class TableMapping:
    """Stepwise MODCOD table: least-efficiency row with efficiency >= R."""

    efficiency: tuple
    required_sinr_db: tuple
    name: str = "table"

    def __post_init__(self):
        eff = tuple(float(x) for x in self.efficiency)
        thr = tuple(float(x) for x in self.required_sinr_db)
        if not eff or len(eff) != len(thr):
            raise DimensionError("rate table needs matching, nonempty columns")
        if any(b <= a for a, b in zip(eff, eff[1:])):
            raise DimensionError("rate table efficiencies must be strictly ascending")
        if any(b <= a for a, b in zip(thr, thr[1:])):
            raise DimensionError("rate table thresholds must be strictly ascending")
        object.__setattr__(self, "efficiency", eff)
        object.__setattr__(self, "required_sinr_db", thr)

    def threshold(self, rate):
        for eff, thr in zip(self.efficiency, self.required_sinr_db):
            if eff >= rate:
                return 10.0 ** (thr / 10.0)
        raise TableExhausted(
            f"spectral efficiency {rate} exceeds table maximum {self.efficiency[-1]}"
        )

    def dominates_shannon(self):
        return all(
            10.0 ** (thr / 10.0) > 2.0 ** eff - 1.0
            for eff, thr in zip(self.efficiency, self.required_sinr_db)
        )

    @classmethod
    def from_csv(cls, source, name="table"):
        """Parse ``efficiency_bps_hz,required_sinr_db`` CSV text or a path.

        Lines starting with ``#`` are ignored.
        """
        if hasattr(source, "read"):
            text = source.read()
        elif isinstance(source, str) and "\n" in source:
            text = source
        else:
            with open(source, newline="") as fh:
                text = fh.read()
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        reader = csv.reader(io.StringIO("\n".join(lines)))
        header = tuple(h.strip() for h in next(reader, ()))
        if header != TABLE_HEADER:
            raise DimensionError(f"rate table header must be {','.join(TABLE_HEADER)}, got {header}")
        eff, thr = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DimensionError(f"rate table row {lineno}: expected 2 fields")
            try:
                eff.append(float(row[0]))
                thr.append(float(row[1]))
            except ValueError:
                raise DimensionError(
                    f"rate table row {lineno}: expected numbers (bits/s/Hz, dB)"
                ) from None
        return cls(tuple(eff), tuple(thr), name=name)


def synthetic_rate_table() -> TableMapping:
    """Shipped NON-NORMATIVE fixture table (dominates the Shannon threshold)."""
    text = resources.files("satsec").joinpath("data/synthetic_rate_table.csv").read_text()
    return TableMapping.from_csv(text, name="synthetic_table")


def required_sinr(rate_target, mapping=GaussianMapping()) -> float:
    """Linear secrecy-SINR target needed for ``rate_target`` bits/s/Hz."""
    if rate_target < 0:
        raise ValueError(f"rate target must be >= 0, got {rate_target}")
    return float(mapping.threshold(float(rate_target)))
