"""Fixed-point power control for individual secrecy-SINR targets.

With effective gains ``Theta`` the update for beam k is

    I_k(p) = gamma_k / (mu_k(p) - (1 + gamma_k) mu_ek(p))
    mu_k   = b_k / (sigma2 + p . ht_k)      (b_k / sigma2 without CSI variants)
    mu_ek  = Theta_ek / (sigma2 + p . ht_e)

and ``p <- I(p)`` is iterated from ``p0 = 0``.  Equivalently
``I_k = gamma_k / f_k(p)`` with ``f_k = b_k/(sigma2 + p.ht_k) - c_k/(sigma2 + p.ht_e)``
and ``c_k = (1 + gamma_k) Theta_ek``; the probe below evaluates the sign
conditions on ``f``, its gradient and the scalability discriminant directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from satsec.channel import CovarianceCsi, EstimatedCsi, PerfectCsi
from satsec.errors import DimensionError, Infeasible, NotConverged, ZeroGain

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000
REL_EPS = 1e-30
MIN_GAIN = 1e-20
POWER_CEILING = 1e20  # watts; past this the iteration counts as divergent


class Variant(str, enum.Enum):
    FIXED_BF = "fixed_bf"
    UNKNOWN_CSI = "unknown_csi"
    IMPERFECT_CSI = "imperfect_csi"


_CSI_FOR_VARIANT = {
    Variant.FIXED_BF: PerfectCsi,
    Variant.UNKNOWN_CSI: CovarianceCsi,
    Variant.IMPERFECT_CSI: EstimatedCsi,
}


@dataclass(frozen=True)
class InterferenceCoefficients:
    theta_kk: np.ndarray
    theta_kj: np.ndarray
    theta_ek: np.ndarray
    theta_ej: np.ndarray
    b: np.ndarray
    c: np.ndarray
    h_tilde_k: np.ndarray
    h_tilde_e: np.ndarray
    gamma: np.ndarray
    sigma2: float
    variant: Variant

    @property
    def K(self):
        return self.b.size

    @classmethod
    def from_gains(cls, theta_kj, theta_e, gamma, sigma2, variant=Variant.FIXED_BF):
        """Assemble from the full gain matrix ``theta_kj[k, j]`` and eavesdropper gains.

        ``theta_kj[k, k]`` is the useful gain ``Theta_kk``.
        """
        variant = Variant(variant)
        T = np.array(theta_kj, dtype=float)
        te = np.array(theta_e, dtype=float).reshape(-1)
        K = te.size
        if T.shape != (K, K):
            raise DimensionError(f"theta_kj has shape {T.shape}, expected {(K, K)}")
        gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (K,)).copy()
        if np.any(gamma < 0):
            raise DimensionError("targets gamma must be nonnegative")
        if not sigma2 > 0:
            raise DimensionError("sigma2 must be positive")
        if np.any(T < 0) or np.any(te < 0) or not (np.all(np.isfinite(T)) and np.all(np.isfinite(te))):
            raise DimensionError("effective gains must be finite and nonnegative")
        theta_kk = np.diag(T).copy()
        ht_k = T.copy()
        np.fill_diagonal(ht_k, 0.0)
        if variant is not Variant.FIXED_BF:
            ht_k[:] = 0.0
        ht_e = np.tile(te, (K, 1))
        np.fill_diagonal(ht_e, 0.0)
        return cls(
            theta_kk=theta_kk,
            theta_kj=T,
            theta_ek=te,
            theta_ej=te.copy(),
            b=theta_kk.copy(),
            c=(1.0 + gamma) * te,
            h_tilde_k=ht_k,
            h_tilde_e=ht_e,
            gamma=gamma,
            sigma2=float(sigma2),
            variant=variant,
        )

    def with_gamma(self, gamma):
        return InterferenceCoefficients.from_gains(
            self.theta_kj, self.theta_ek, gamma, self.sigma2, self.variant
        )


def _weights(W):
    return np.asarray(getattr(W, "W", W), dtype=complex)


def _quad_forms(R, W):
    return np.real(np.einsum("mk,mn,nk->k", W.conj(), R, W))


def coefficients(chan, W, gamma, csi=None, variant=Variant.FIXED_BF) -> InterferenceCoefficients:
    """Effective gains of weights ``W`` on ``chan`` for the given CSI regime.

    ``csi`` defaults to perfect knowledge of ``chan.h_e`` for ``FIXED_BF``.
    """
    variant = Variant(variant)
    W = _weights(W)
    if W.shape != (chan.M, chan.K):
        raise DimensionError(f"W has shape {W.shape}, expected {(chan.M, chan.K)}")
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (chan.K,))
    if csi is None and variant is Variant.FIXED_BF:
        csi = PerfectCsi(chan.h_e)
    expected = _CSI_FOR_VARIANT[variant]
    if not isinstance(csi, expected):
        raise DimensionError(
            f"variant {variant.value} needs {expected.__name__}, got {type(csi).__name__}"
        )
    T = np.abs(chan.H.T @ W) ** 2
    if variant is Variant.FIXED_BF:
        te = np.abs(csi.h_e @ W) ** 2
    elif variant is Variant.UNKNOWN_CSI:
        te = _quad_forms(csi.R_hat_e, W)
    else:
        te = _quad_forms(csi.R_delta_e, W)
    te = np.maximum(te, 0.0)
    return InterferenceCoefficients.from_gains(T, te, gamma, chan.sigma2, variant)


def _mus(coeffs, p):
    s2 = coeffs.sigma2
    mu_k = coeffs.b / (s2 + coeffs.h_tilde_k @ p)
    mu_e = coeffs.theta_ek / (s2 + coeffs.h_tilde_e @ p)
    return mu_k, mu_e


def update_denominator(coeffs, p):
    mu_k, mu_e = _mus(coeffs, p)
    return mu_k - (1.0 + coeffs.gamma) * mu_e


def power_update(coeffs: InterferenceCoefficients, p) -> np.ndarray:
    """One synchronous update ``I(p)``; raises :class:`Infeasible` on a nonpositive denominator."""
    p = np.asarray(p, dtype=float)
    if p.shape != (coeffs.K,):
        raise DimensionError(f"p has shape {p.shape}, expected {(coeffs.K,)}")
    if np.any(p < 0):
        raise DimensionError("powers must be nonnegative")
    den = update_denominator(coeffs, p)
    bad = np.flatnonzero(~(den > 0))
    if bad.size:
        k = int(bad[np.argmin(den[bad])]) if np.all(np.isfinite(den[bad])) else int(bad[0])
        raise Infeasible(k, float(den[k]))
    return coeffs.gamma / den


def model_secrecy_sinr(coeffs, p):
    """Secrecy SINR of every beam as seen through ``coeffs`` at powers ``p``."""
    p = np.asarray(p, dtype=float)
    mu_k, mu_e = _mus(coeffs, p)
    g = p * mu_k
    ge = p * mu_e
    return (g - ge) / (1.0 + ge)


def _residual(coeffs, p):
    gs = model_secrecy_sinr(coeffs, p)
    g = coeffs.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(g > 0, np.abs(gs - g) / np.where(g > 0, g, 1.0), np.abs(gs))
    return float(np.max(r)) if r.size else 0.0


@dataclass
class PowerSolution:
    p: np.ndarray
    converged: bool
    iterations: int
    residual: float
    trace: list = field(default_factory=list)

    @property
    def total(self):
        return float(np.sum(self.p))

    def to_dict(self):
        return {
            "powers_w": [float(x) for x in self.p],
            "total_power_w": self.total,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "trace": [
                {"iter": n, "total_power_w": float(tot), "powers_w": [float(x) for x in pv]}
                for n, pv, tot in self.trace
            ],
        }

    def trace_csv(self):
        K = self.p.size
        head = "iter,total_power_w," + ",".join(f"p_{k + 1}" for k in range(K))
        lines = [head]
        for n, pv, tot in self.trace:
            lines.append(f"{n},{tot!r}," + ",".join(repr(float(x)) for x in pv))
        return "\n".join(lines) + "\n"


def fixed_point_solve(
    coeffs: InterferenceCoefficients,
    p0=None,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    trace_every=1,
) -> PowerSolution:
    """Iterate ``p <- I(p)`` until the relative power step and the SINR residual are both <= tol."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    p = np.zeros(coeffs.K) if p0 is None else np.array(p0, dtype=float)
    if p.shape != (coeffs.K,) or np.any(p < 0):
        raise DimensionError("p0 must be a nonnegative vector of length K")
    trace = [(0, p.copy(), float(p.sum()))]
    n = 0
    residual = np.inf
    for n in range(1, max_iter + 1):
        try:
            p_new = power_update(coeffs, p)
        except Infeasible as exc:
            exc.iteration = n
            exc.trace = trace
            raise
        if not np.all(p_new <= POWER_CEILING):
            k = int(np.argmax(np.where(np.isfinite(p_new), p_new, np.inf)))
            den = float(update_denominator(coeffs, p)[k])
            raise Infeasible(k, den, iteration=n, trace=trace, diverged=True)
        step = float(np.max(np.abs(p_new - p) / np.maximum(p, REL_EPS))) if p.size else 0.0
        p = p_new
        if n % trace_every == 0:
            trace.append((n, p.copy(), float(p.sum())))
        if step <= tol:
            residual = _residual(coeffs, p)
            if residual <= tol:
                if trace[-1][0] != n:
                    trace.append((n, p.copy(), float(p.sum())))
                return PowerSolution(p, True, n, residual, trace)
    if trace[-1][0] != n:
        trace.append((n, p.copy(), float(p.sum())))
    raise NotConverged(PowerSolution(p, False, n, _residual(coeffs, p), trace))


def closed_form_power(chan, W, gamma) -> np.ndarray:
    """``P_k = gamma_k sigma2 / |h_k^T w_k|^2`` for interference- and eavesdropper-free weights."""
    W = _weights(W)
    gains = np.abs(np.sum(chan.H * W, axis=0)) ** 2
    for k in np.flatnonzero(gains < MIN_GAIN):
        raise ZeroGain(int(k), float(gains[k]))
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), gains.shape)
    return gamma * chan.sigma2 / gains


# ---------------------------------------------------------------------------
# sufficient conditions for a standard interference function


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    margin: float  # worst (smallest) margin; +inf when vacuous
    margins: np.ndarray  # worst margin per beam

    def to_dict(self):
        return {
            "passed": self.passed,
            "margin": _finite_or_none(self.margin),
            "margins": [_finite_or_none(m) for m in self.margins],
        }


@dataclass(frozen=True)
class ConditionReport:
    variant: Variant
    cond1: ConditionResult
    cond2: dict | None
    cond3: ConditionResult | None
    overall: bool

    def to_dict(self):
        return {
            "variant": self.variant.value,
            "cond1": self.cond1.to_dict(),
            "cond2": None if self.cond2 is None else {k: v.to_dict() for k, v in self.cond2.items()},
            "cond3": None if self.cond3 is None else self.cond3.to_dict(),
            "overall": self.overall,
        }


def _finite_or_none(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _result(per_beam):
    per_beam = np.asarray(per_beam, dtype=float)
    worst = float(per_beam.min(initial=np.inf))
    return ConditionResult(bool(worst > 0), worst, per_beam)


def _elementwise_margin(lhs, rhs):
    mask = (lhs != 0) | (rhs != 0)
    if not np.any(mask):
        return np.inf
    return float(np.min((lhs - rhs)[mask]))


def check_standard_conditions(coeffs: InterferenceCoefficients) -> ConditionReport:
    """Evaluate the sufficient conditions; structural zeros are excluded from strict comparisons."""
    b, c = coeffs.b, coeffs.c
    cond1 = _result(b - c)
    if coeffs.variant is not Variant.FIXED_BF:
        return ConditionReport(coeffs.variant, cond1, None, None, cond1.passed)

    K = coeffs.K
    names = ("bk_hk_gt_ck_he", "bk_he_gt_ck_hk", "bk_hkhk_gt_ck_hehe", "bk_hehe_gt_ck_hkhk")
    per = {name: np.full(K, np.inf) for name in names}
    cond3 = np.full(K, np.inf)
    for k in range(K):
        hk = coeffs.h_tilde_k[k]
        he = coeffs.h_tilde_e[k]
        per[names[0]][k] = _elementwise_margin(b[k] * hk, c[k] * he)
        per[names[1]][k] = _elementwise_margin(b[k] * he, c[k] * hk)
        per[names[2]][k] = _elementwise_margin(b[k] * np.outer(hk, hk), c[k] * np.outer(he, he))
        per[names[3]][k] = _elementwise_margin(b[k] * np.outer(he, he), c[k] * np.outer(hk, hk))
        worst = np.inf
        for j in range(K):
            if j == k:
                continue
            lhs = np.sqrt(b[k] * hk[j]) * he
            rhs = np.sqrt(c[k] * he[j]) * hk
            worst = min(worst, _elementwise_margin(lhs, rhs))
        cond3[k] = worst
    cond2 = {name: _result(v) for name, v in per.items()}
    cond3 = _result(cond3)
    overall = cond1.passed and all(r.passed for r in cond2.values()) and cond3.passed
    return ConditionReport(coeffs.variant, cond1, cond2, cond3, overall)


# ---------------------------------------------------------------------------
# quantities from the standard-function argument, evaluated numerically


def proof_f(coeffs, p):
    """``f_k(p) = b_k/(sigma2 + p.ht_k) - c_k/(sigma2 + p.ht_e)``; ``I_k = gamma_k / f_k``."""
    p = np.asarray(p, dtype=float)
    s2 = coeffs.sigma2
    return coeffs.b / (s2 + coeffs.h_tilde_k @ p) - coeffs.c / (s2 + coeffs.h_tilde_e @ p)


def proof_phi(coeffs, p):
    """Gradient of ``f``: row k is ``d f_k / d p``."""
    p = np.asarray(p, dtype=float)
    s2 = coeffs.sigma2
    x = s2 + coeffs.h_tilde_k @ p
    y = s2 + coeffs.h_tilde_e @ p
    return (coeffs.c / y**2)[:, None] * coeffs.h_tilde_e - (coeffs.b / x**2)[:, None] * coeffs.h_tilde_k


def proof_psi(coeffs, p):
    """Numerator of ``phi`` over the positive factor ``(sigma2 + p.ht_k)^2 (sigma2 + p.ht_e)^2``."""
    p = np.asarray(p, dtype=float)
    s2 = coeffs.sigma2
    x = s2 + coeffs.h_tilde_k @ p
    y = s2 + coeffs.h_tilde_e @ p
    return (coeffs.c * x**2)[:, None] * coeffs.h_tilde_e - (coeffs.b * y**2)[:, None] * coeffs.h_tilde_k


def proof_delta(coeffs, p, rho):
    """Scalability discriminant; ``rho I_k(p) > I_k(rho p)`` iff ``delta_k < 0`` (when f > 0)."""
    p = np.asarray(p, dtype=float)
    s2 = coeffs.sigma2
    b, c = coeffs.b, coeffs.c
    x = coeffs.h_tilde_k @ p
    y = coeffs.h_tilde_e @ p
    return (
        s2**3 * (1 - rho) * (b - c)
        + s2**2 * (1 - rho**2) * (b * y - c * x)
        + s2 * rho * (1 - rho) * (b * y**2 - c * x**2)
    )


@dataclass
class ProbeReport:
    n_samples: int
    monotone_direction: str
    positivity_violations: int
    monotonicity_violations: int
    scalability_violations: int
    infeasible_samples: int
    delta_disagreements: int
    worst_positivity: float
    worst_monotonicity: float
    worst_scalability: float

    @property
    def violations(self):
        return self.positivity_violations + self.monotonicity_violations + self.scalability_violations

    def to_dict(self):
        d = dict(self.__dict__)
        for key in ("worst_positivity", "worst_monotonicity", "worst_scalability"):
            d[key] = _finite_or_none(d[key])
        d["violations"] = self.violations
        return d


def _power_scale(coeffs):
    g = float(np.mean(coeffs.gamma)) or 1.0
    bmean = float(np.mean(coeffs.b)) or 1.0
    return g * coeffs.sigma2 / bmean


def standard_property_probe(coeffs: InterferenceCoefficients, seed=0, n_samples=1000, rel_tol=1e-12) -> ProbeReport:
    """Sample ``p >= p' >= 0`` and ``rho in (1, 10]``; check positivity, monotonicity, scalability.

    Monotonicity is tested as nondecreasing for ``FIXED_BF`` and nonincreasing for
    the no-/imperfect-CSI variants, whose ``f`` increases with ``p``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 7, 0]))
    K = coeffs.K
    increasing = coeffs.variant is Variant.FIXED_BF
    scale = _power_scale(coeffs)
    gamma = coeffs.gamma
    f_norm = coeffs.sigma2 / max(float(coeffs.b.max()), 1e-300)  # f is in units of b / sigma2

    pos_v = mono_v = scal_v = infeas = delta_bad = 0
    worst_pos = worst_mono = worst_scal = np.inf
    for _ in range(n_samples):
        mag = scale * 10.0 ** rng.uniform(-3.0, 3.0)
        p_lo = mag * rng.uniform(0.0, 1.0, K) * (rng.uniform(size=K) > 0.2)
        p_hi = p_lo + mag * rng.uniform(0.0, 1.0, K) * (rng.uniform(size=K) > 0.2)
        rho = 1.0 + 9.0 * (1.0 - rng.uniform())

        f_hi = proof_f(coeffs, p_hi)
        f_lo = proof_f(coeffs, p_lo)
        f_rho = proof_f(coeffs, rho * p_hi)
        ok = (f_hi > 0) & (f_lo > 0) & (f_rho > 0)
        worst_pos = min(worst_pos, float(min(f_hi.min(), f_lo.min())) * f_norm)
        n_bad = int(np.sum(~((f_hi > 0) & (f_lo > 0))))
        pos_v += n_bad
        if not np.all(ok):
            infeas += 1
        if not np.any(ok):
            continue
        I_hi = gamma[ok] / f_hi[ok]
        I_lo = gamma[ok] / f_lo[ok]
        I_rho = gamma[ok] / f_rho[ok]
        ref = np.maximum(np.maximum(I_hi, I_lo), REL_EPS)
        mono = (I_hi - I_lo) / ref if increasing else (I_lo - I_hi) / ref
        worst_mono = min(worst_mono, float(mono.min()))
        mono_v += int(np.sum(mono < -rel_tol))
        scal = (rho * I_hi - I_rho) / np.maximum(rho * I_hi, REL_EPS)
        pos_gamma = gamma[ok] > 0
        worst_scal = min(worst_scal, float(scal[pos_gamma].min(initial=np.inf)))
        scal_fail = (scal <= 0) & pos_gamma
        scal_v += int(np.sum(scal_fail))
        d = proof_delta(coeffs, p_hi, rho)[ok]
        # the discriminant sign is only informative away from round-off
        strong = np.abs(scal) > 1e-9
        delta_bad += int(np.sum(strong & pos_gamma & ((d < 0) != (scal > 0))))
    return ProbeReport(
        n_samples=n_samples,
        monotone_direction="nondecreasing" if increasing else "nonincreasing",
        positivity_violations=pos_v,
        monotonicity_violations=mono_v,
        scalability_violations=scal_v,
        infeasible_samples=infeas,
        delta_disagreements=delta_bad,
        worst_positivity=worst_pos,
        worst_monotonicity=worst_mono,
        worst_scalability=worst_scal,
    )
