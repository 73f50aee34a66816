"""Monte Carlo harness: scheme dispatch, parameter sweeps, budgeted SINR
balancing and maximum-user search.

Every trial ``t`` draws its channel from ``trial_seed(base_seed, t)``, so the
same draws are shared across sweep points and schemes, and growing
``n_trials`` never changes earlier trials.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from satsec import __version__
from satsec.beamform import (
    BeamformingMatrix,
    equal_gain_weights,
    matched_filter_weights,
    zf_nulling_weights,
    zf_nulling_weights_estimated,
    zfbf_weights,
)
from satsec.channel import (
    RNG_NAME,
    STREAM_CSI_ERROR,
    AttenuationProfile,
    CovarianceCsi,
    EstimatedCsi,
    amplitude_from_db_loss,
    db_to_linear,
    dbm_to_watts,
    phase_stream,
    sample_channel,
    trial_seed,
)
from satsec.errors import DimensionError, DimensionInfeasible, Infeasible, NotConverged, ZeroGain
from satsec.powerctl import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Variant,
    closed_form_power,
    coefficients,
    fixed_point_solve,
)
from satsec.secrecy import GaussianMapping, TableMapping, required_sinr, sinr_report, synthetic_rate_table

SCHEMA_VERSION = 1
THREADS_ENV = "SATSEC_THREADS"

# zero-forcing on the users only; eavesdropper-agnostic, see README
DEFAULT_FIXED_BF = "zf"

FIXED_BEAMFORMERS = {
    "mrt": matched_filter_weights,
    "zf": zfbf_weights,
    "equal": lambda chan: equal_gain_weights(chan.M, chan.K),
}


def fixed_weights(chan, weights):
    if isinstance(weights, BeamformingMatrix):
        if weights.W.shape != (chan.M, chan.K):
            raise DimensionError(f"fixed weights have shape {weights.W.shape}, channel is {(chan.M, chan.K)}")
        return weights
    try:
        return FIXED_BEAMFORMERS[weights](chan)
    except KeyError:
        raise DimensionError(
            f"unknown fixed beamformer {weights!r}; choose from {sorted(FIXED_BEAMFORMERS)}"
        ) from None


# ---------------------------------------------------------------------------
# schemes


@dataclass(frozen=True)
class FixedBF:
    weights: object = DEFAULT_FIXED_BF
    name = "fixed_bf"


@dataclass(frozen=True)
class JointZFNulling:
    name = "joint_zf_nulling"


@dataclass(frozen=True)
class ZfbfUnknownCsi:
    """ZFBF with only the eavesdropper covariance known.

    ``R_hat_e=None`` uses the isotropic prior ``(||h_e||^2 / M) I``, which is
    ``alpha_e^2 I`` under the unit-modulus sampler.
    """

    R_hat_e: np.ndarray | None = None
    name = "zfbf_unknown_csi"


@dataclass(frozen=True)
class JointImperfectCsi:
    """Nulling of an estimate ``h_hat_e = h_e - delta``, ``delta ~ CN(0, error_var * g I)``.

    ``g`` is the mean per-element eavesdropper gain; a given ``h_hat_e`` /
    ``R_delta_e`` overrides the drawn error.
    """

    h_hat_e: np.ndarray | None = None
    R_delta_e: np.ndarray | None = None
    error_var: float = 0.1
    name = "joint_imperfect_csi"


@dataclass(frozen=True)
class FixedPowerFixedBF:
    """Equal split ``p_tot / K`` (or explicit ``p_fixed``) with the fixed beamformer."""

    p_fixed: np.ndarray | None = None
    p_tot: float | None = None
    weights: object = DEFAULT_FIXED_BF
    name = "fixed_power_fixed_bf"


SCHEME_NAMES = (
    "fixed_bf",
    "joint_zf_nulling",
    "zfbf_unknown_csi",
    "joint_imperfect_csi",
    "fixed_power_fixed_bf",
)


def make_scheme(name, *, fixed_beamformer=DEFAULT_FIXED_BF, csi_error_var=0.1, p_tot=None, alpha_e=None, M=None):
    if name == "fixed_bf":
        return FixedBF(fixed_beamformer)
    if name == "joint_zf_nulling":
        return JointZFNulling()
    if name == "zfbf_unknown_csi":
        R = None if alpha_e is None or M is None else alpha_e**2 * np.eye(M)
        return ZfbfUnknownCsi(R)
    if name == "joint_imperfect_csi":
        return JointImperfectCsi(error_var=csi_error_var)
    if name == "fixed_power_fixed_bf":
        return FixedPowerFixedBF(p_tot=p_tot, weights=fixed_beamformer)
    raise DimensionError(f"unknown scheme {name!r}; choose from {list(SCHEME_NAMES)}")


@dataclass
class TrialResult:
    scheme: str
    feasible: bool
    powers: np.ndarray | None = None
    converged: bool = False
    iterations: int = 0
    residual: float = float("nan")
    error: str | None = None
    trace: list = field(default_factory=list)

    @property
    def total(self):
        return float(np.sum(self.powers)) if self.powers is not None else float("nan")


def _estimated_csi(chan, scheme, seed):
    M = chan.M
    gain = float(np.mean(np.abs(chan.h_e) ** 2))
    var = scheme.error_var * gain
    h_hat = scheme.h_hat_e
    if h_hat is None:
        rng = phase_stream(seed, 0, STREAM_CSI_ERROR)
        delta = np.sqrt(var / 2.0) * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
        h_hat = chan.h_e - delta
    R = scheme.R_delta_e if scheme.R_delta_e is not None else var * np.eye(M)
    return EstimatedCsi(h_hat, R)


def solve_instance(chan, scheme, gamma, seed=0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, trace_every=1):
    """Minimum-power allocation for one channel draw under ``scheme``.

    Infeasible, non-convergent and zero-gain outcomes are reported with
    ``feasible=False`` rather than raised.
    """
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (chan.K,))
    name = scheme.name
    try:
        if isinstance(scheme, JointZFNulling):
            W = zf_nulling_weights(chan)
            p = closed_form_power(chan, W, gamma)
            return TrialResult(name, True, p, True, 0, 0.0)
        if isinstance(scheme, FixedPowerFixedBF):
            W = fixed_weights(chan, scheme.weights)
            if scheme.p_fixed is not None:
                p = np.broadcast_to(np.asarray(scheme.p_fixed, dtype=float), (chan.K,)).copy()
            elif scheme.p_tot is not None:
                p = np.full(chan.K, scheme.p_tot / chan.K)
            else:
                raise DimensionError("fixed-power scheme needs p_fixed or p_tot")
            gs = sinr_report(chan, W, p).gamma_s
            ok = bool(np.all(gs >= gamma * (1.0 - 1e-12)))
            with np.errstate(divide="ignore", invalid="ignore"):
                shortfall = float(np.max(np.where(gamma > 0, (gamma - gs) / gamma, -gs)))
            return TrialResult(name, ok, p, ok, 0, max(shortfall, 0.0), None if ok else "targets not met")
        if isinstance(scheme, FixedBF):
            W = fixed_weights(chan, scheme.weights)
            coeffs = coefficients(chan, W, gamma, variant=Variant.FIXED_BF)
        elif isinstance(scheme, ZfbfUnknownCsi):
            W = zfbf_weights(chan)
            R = scheme.R_hat_e
            if R is None:
                R = float(np.mean(np.abs(chan.h_e) ** 2)) * np.eye(chan.M)
            coeffs = coefficients(chan, W, gamma, CovarianceCsi(R), Variant.UNKNOWN_CSI)
        elif isinstance(scheme, JointImperfectCsi):
            csi = _estimated_csi(chan, scheme, seed)
            W = zf_nulling_weights_estimated(chan, csi.h_hat_e)
            coeffs = coefficients(chan, W, gamma, csi, Variant.IMPERFECT_CSI)
        else:
            raise DimensionError(f"unknown scheme {scheme!r}")
        sol = fixed_point_solve(coeffs, tol=tol, max_iter=max_iter, trace_every=trace_every)
        return TrialResult(name, True, sol.p, True, sol.iterations, sol.residual, None, sol.trace)
    except (Infeasible, ZeroGain, DimensionInfeasible) as exc:
        return TrialResult(name, False, error=f"{type(exc).__name__}: {exc}")
    except NotConverged as exc:
        s = exc.solution
        return TrialResult(name, False, s.p, False, s.iterations, s.residual, f"NotConverged: {exc}", s.trace)


# ---------------------------------------------------------------------------
# budgeted SINR balancing


@dataclass
class BalanceResult:
    gamma_db: float
    gamma_linear: float
    status: str  # "ok", "infeasible" (even the lower bracket fails) or "saturated"
    total_power: float


def max_common_sinr(chan, scheme, p_tot, tol_db=0.01, bracket_db=(-20.0, 60.0), seed=0, tol=DEFAULT_TOL):
    """Largest uniform target (dB) the scheme meets within ``p_tot`` watts.

    Joint nulling is solved exactly (powers are linear in the target); other
    schemes bisect the target in dB.
    """
    if not p_tot > 0:
        raise ValueError("p_tot must be positive")
    if isinstance(scheme, JointZFNulling):
        try:
            unit = closed_form_power(chan, zf_nulling_weights(chan), 1.0)
        except (ZeroGain, DimensionInfeasible):
            return BalanceResult(float("-inf"), 0.0, "infeasible", 0.0)
        g = p_tot / float(np.sum(unit))
        return BalanceResult(10.0 * np.log10(g), g, "ok", p_tot)

    def attempt(db):
        r = solve_instance(chan, scheme, 10.0 ** (db / 10.0), seed=seed, tol=tol)
        return r if r.feasible and r.total <= p_tot else None

    lo, hi = bracket_db
    r_lo = attempt(lo)
    if r_lo is None:
        return BalanceResult(float("-inf"), 0.0, "infeasible", 0.0)
    r_hi = attempt(hi)
    if r_hi is not None:
        return BalanceResult(hi, 10.0 ** (hi / 10.0), "saturated", r_hi.total)
    best = r_lo
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        r = attempt(mid)
        if r is None:
            hi = mid
        else:
            lo, best = mid, r
    return BalanceResult(lo, 10.0 ** (lo / 10.0), "ok", best.total)


# ---------------------------------------------------------------------------
# configuration

SWEEP_KINDS = (
    "none",
    "iter_trace",
    "antenna_elements",
    "beams",
    "eaves_atten",
    "secrecy_target",
    "user_atten",
    "csi_comparison",
    "air_interface",
    "max_users",
)


@dataclass(frozen=True)
class Sweep:
    """``values`` units: M or K counts, dB loss (eaves_atten), dB target
    (secrecy_target, iter_trace), linear amplitude (user_atten), watts
    (csi_comparison, max_users), bits/s/Hz (air_interface)."""

    kind: str = "none"
    values: tuple = ()
    user: int = 1

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise DimensionError(f"sweep.kind: unknown kind {self.kind!r}; choose from {list(SWEEP_KINDS)}")
        vals = tuple(float(v) for v in self.values)
        if self.kind != "none" and not vals:
            raise DimensionError(f"sweep.values: must be nonempty for kind {self.kind!r}")
        if self.kind in ("antenna_elements", "beams"):
            if any(v != int(v) or v < 1 for v in vals):
                raise DimensionError("sweep.values: counts must be positive integers")
            vals = tuple(int(v) for v in vals)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SchemeSpec:
    """A scheme plus optional per-scheme attenuation overrides and a display label."""

    name: str
    label: str | None = None
    alpha: float | None = None
    alpha_e: float | None = None

    def __post_init__(self):
        if self.name not in SCHEME_NAMES:
            raise DimensionError(f"schemes: unknown scheme {self.name!r}; choose from {list(SCHEME_NAMES)}")

    @property
    def display(self):
        return self.label or self.name


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 8
    K: int = 5
    n_trials: int = 1000
    base_seed: int = 0
    alpha: object = 0.8  # scalar or length-K list
    alpha_e: float = 0.8
    sigma2_dbm: float = -10.0
    gamma0_db: float = 6.0
    sweep: Sweep = Sweep()
    schemes: tuple = (SchemeSpec("fixed_bf"), SchemeSpec("joint_zf_nulling"))
    p_tot: float | None = None
    fixed_beamformer: str = DEFAULT_FIXED_BF
    csi_error_var: float = 0.1
    rate_table: str | None = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    tol_db: float = 0.01
    trace_trial: int | None = None
    trace_every: int = 1
    threads: int = 0  # 0: take SATSEC_THREADS or 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise DimensionError("n_trials: must be >= 1")
        if self.M < 1 or self.K < 1:
            raise DimensionError("M, K: must be >= 1")
        if self.fixed_beamformer not in FIXED_BEAMFORMERS:
            raise DimensionError(
                f"fixed_beamformer: unknown {self.fixed_beamformer!r}; choose from {sorted(FIXED_BEAMFORMERS)}"
            )
        if not self.tol > 0:
            raise DimensionError("tol: must be positive")
        if self.p_tot is not None and not self.p_tot > 0:
            raise DimensionError("p_tot: must be positive (watts)")
        if self.csi_error_var < 0:
            raise DimensionError("csi_error_var: must be >= 0")
        if not self.schemes:
            raise DimensionError("schemes: must be nonempty")
        schemes = tuple(s if isinstance(s, SchemeSpec) else SchemeSpec(s) for s in self.schemes)
        object.__setattr__(self, "schemes", schemes)

    @property
    def sigma2(self):
        return dbm_to_watts(self.sigma2_dbm)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["alpha"] = self.alpha if np.isscalar(self.alpha) else [float(a) for a in self.alpha]
        d["sweep"]["values"] = list(self.sweep.values)
        d["schemes"] = [
            {k: v for k, v in dataclasses.asdict(s).items() if v is not None} for s in self.schemes
        ]
        return d

    @classmethod
    def from_dict(cls, d, where="config"):
        if not isinstance(d, dict):
            raise DimensionError(f"{where}: expected an object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise DimensionError(f"{where}: unknown key(s) {unknown}")
        kw = dict(d)
        if "sweep" in kw:
            sw = kw["sweep"]
            if not isinstance(sw, dict):
                raise DimensionError(f"{where}.sweep: expected an object")
            bad = sorted(set(sw) - {"kind", "values", "user"})
            if bad:
                raise DimensionError(f"{where}.sweep: unknown key(s) {bad}")
            kw["sweep"] = Sweep(**sw)
        if "schemes" in kw:
            specs = []
            for i, s in enumerate(kw["schemes"]):
                if isinstance(s, str):
                    specs.append(SchemeSpec(s))
                elif isinstance(s, dict):
                    bad = sorted(set(s) - {"name", "label", "alpha", "alpha_e"})
                    if bad:
                        raise DimensionError(f"{where}.schemes[{i}]: unknown key(s) {bad}")
                    specs.append(SchemeSpec(**s))
                else:
                    raise DimensionError(f"{where}.schemes[{i}]: expected a name or an object")
            kw["schemes"] = tuple(specs)
        for key in ("M", "K", "n_trials", "base_seed", "max_iter", "trace_every", "threads"):
            if key in kw and not (isinstance(kw[key], int) and not isinstance(kw[key], bool)):
                raise DimensionError(f"{where}.{key}: expected an integer count")
        for key, unit in (("sigma2_dbm", "dBm"), ("gamma0_db", "dB"), ("alpha_e", "linear amplitude"),
                          ("p_tot", "watts"), ("tol", "relative tolerance"), ("tol_db", "dB"),
                          ("csi_error_var", "fraction of eavesdropper gain")):
            if key in kw and kw[key] is not None and not isinstance(kw[key], (int, float)):
                raise DimensionError(f"{where}.{key}: expected a number ({unit}), got {kw[key]!r}")
        try:
            return cls(**kw)
        except TypeError as exc:
            raise DimensionError(f"{where}: {exc}") from None

    def resolved_threads(self):
        if self.threads > 0:
            return self.threads
        return max(1, int(os.environ.get(THREADS_ENV, "1") or 1))


def _atten(cfg, K, spec=None, alpha=None, alpha_e=None):
    a = alpha if alpha is not None else (spec.alpha if spec and spec.alpha is not None else cfg.alpha)
    ae = alpha_e if alpha_e is not None else (spec.alpha_e if spec and spec.alpha_e is not None else cfg.alpha_e)
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = np.full(K, float(a))
    elif a.size != K:
        raise DimensionError(f"alpha: expected {K} entries, got {a.size}")
    return AttenuationProfile(a, ae)


def _scheme_for(cfg, spec, M, atten, p_tot=None):
    return make_scheme(
        spec.name,
        fixed_beamformer=cfg.fixed_beamformer,
        csi_error_var=cfg.csi_error_var,
        p_tot=p_tot if p_tot is not None else cfg.p_tot,
        alpha_e=atten.alpha_e,
        M=M,
    )


def _map_trials(cfg, fn):
    threads = cfg.resolved_threads()
    idx = range(cfg.n_trials)
    if threads <= 1:
        return [fn(t) for t in idx]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, idx))


# ---------------------------------------------------------------------------
# result tables


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name, **where):
        return [r[name] for r in self.rows if all(r.get(k) == v for k, v in where.items())]

    def to_csv(self):
        lines = [",".join(self.columns)]
        for r in self.rows:
            lines.append(",".join(_fmt(r.get(c)) for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_json(self):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": [{c: _jsonable(r.get(c)) for c in self.columns} for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if np.isnan(v) else repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def _metadata(cfg, **extra):
    meta = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "rng": RNG_NAME,
        "base_seed": cfg.base_seed,
        "sigma2_watts": cfg.sigma2,
        "config": cfg.to_dict(),
    }
    meta.update(extra)
    return meta


POWER_COLUMNS = [
    "sweep",
    "sweep_value",
    "scheme",
    "n_trials",
    "n_feasible",
    "feasibility_rate",
    "mean_total_power_w",
    "std_total_power_w",
    "mean_beam_powers_w",
]


def _aggregate(sweep, value, label, results, extra=None):
    feas = [r for r in results if r.feasible]
    row = {
        "sweep": sweep,
        "sweep_value": value,
        "scheme": label,
        "n_trials": len(results),
        "n_feasible": len(feas),
        "feasibility_rate": len(feas) / len(results),
    }
    if feas:
        tot = np.array([r.total for r in feas])
        P = np.array([r.powers for r in feas])
        row.update(
            mean_total_power_w=float(tot.mean()),
            std_total_power_w=float(tot.std()),
            mean_beam_powers_w=[float(x) for x in P.mean(axis=0)],
        )
    else:
        row.update(mean_total_power_w=None, std_total_power_w=None, mean_beam_powers_w=None)
    if extra:
        row.update(extra)
    return row


def _run_point(cfg, M, K, gamma, spec, alpha=None, alpha_e=None, p_tot=None):
    atten = _atten(cfg, K, spec, alpha, alpha_e)
    scheme = _scheme_for(cfg, spec, M, atten, p_tot)
    sigma2 = cfg.sigma2

    def one(t):
        seed = trial_seed(cfg.base_seed, t)
        chan = sample_channel(seed, M, K, atten, sigma2)
        return solve_instance(chan, scheme, gamma, seed=seed, tol=cfg.tol, max_iter=cfg.max_iter)

    return _map_trials(cfg, one)


def _power_sweep(cfg):
    kind = cfg.sweep.kind
    values = cfg.sweep.values if kind != "none" else (float("nan"),)
    rows = []
    for v in values:
        M, K = cfg.M, cfg.K
        gamma = db_to_linear(cfg.gamma0_db)
        alpha = alpha_e = None
        if kind == "antenna_elements":
            M = int(v)
        elif kind == "beams":
            K = int(v)
        elif kind == "eaves_atten":
            alpha_e = float(amplitude_from_db_loss(v))
        elif kind == "secrecy_target":
            gamma = db_to_linear(v)
        elif kind == "user_atten":
            u = cfg.sweep.user - 1
            if not 0 <= u < K:
                raise DimensionError(f"sweep.user: {cfg.sweep.user} out of range 1..{K}")
            alpha = _atten(cfg, K).alpha.copy()
            alpha[u] = v
        for spec in cfg.schemes:
            results = _run_point(cfg, M, K, gamma, spec, alpha, alpha_e)
            rows.append(_aggregate(kind, None if np.isnan(v) else v, spec.display, results))
    return ResultTable(list(POWER_COLUMNS), rows, _metadata(cfg))


def _air_interface_sweep(cfg):
    table = TableMapping.from_csv(cfg.rate_table, name="table") if cfg.rate_table else synthetic_rate_table()
    mappings = (GaussianMapping(), table)
    cols = POWER_COLUMNS[:3] + ["mapping", "required_sinr_linear"] + POWER_COLUMNS[3:]
    rows = []
    for eff in cfg.sweep.values:
        for mapping in mappings:
            gamma = required_sinr(eff, mapping)
            for spec in cfg.schemes:
                results = _run_point(cfg, cfg.M, cfg.K, gamma, spec)
                rows.append(
                    _aggregate("air_interface", eff, spec.display, results,
                               {"mapping": mapping.name, "required_sinr_linear": gamma})
                )
    return ResultTable(cols, rows, _metadata(cfg, rate_table=cfg.rate_table or "synthetic (non-normative)"))


def _csi_comparison(cfg):
    cols = ["sweep", "sweep_value", "scheme", "n_trials", "n_feasible", "feasibility_rate",
            "n_saturated", "mean_gamma_db", "std_gamma_db"]
    rows = []
    atten_base = _atten(cfg, cfg.K)
    for p_tot in cfg.sweep.values:
        for spec in cfg.schemes:
            atten = _atten(cfg, cfg.K, spec)
            scheme = _scheme_for(cfg, spec, cfg.M, atten, p_tot)

            def one(t, atten=atten, scheme=scheme, p_tot=p_tot):
                seed = trial_seed(cfg.base_seed, t)
                chan = sample_channel(seed, cfg.M, cfg.K, atten, cfg.sigma2)
                return max_common_sinr(chan, scheme, p_tot, cfg.tol_db, seed=seed, tol=cfg.tol)

            res = _map_trials(cfg, one)
            ok = [r for r in res if r.status != "infeasible"]
            g = np.array([r.gamma_db for r in ok])
            rows.append({
                "sweep": "csi_comparison",
                "sweep_value": p_tot,
                "scheme": spec.display,
                "n_trials": len(res),
                "n_feasible": len(ok),
                "feasibility_rate": len(ok) / len(res),
                "n_saturated": sum(r.status == "saturated" for r in res),
                "mean_gamma_db": float(g.mean()) if ok else None,
                "std_gamma_db": float(g.std()) if ok else None,
            })
    del atten_base
    return ResultTable(cols, rows, _metadata(cfg))


def iteration_trace(cfg):
    """Per-iteration power of the first scheme on one draw, for each target in ``sweep.values``.

    Uses ``cfg.trace_trial`` or else the first trial on which every target converges.
    """
    spec = cfg.schemes[0]
    atten = _atten(cfg, cfg.K, spec)
    scheme = _scheme_for(cfg, spec, cfg.M, atten)
    targets = cfg.sweep.values if cfg.sweep.kind == "iter_trace" else (cfg.gamma0_db,)
    candidates = [cfg.trace_trial] if cfg.trace_trial is not None else range(cfg.n_trials)
    chosen = None
    for t in candidates:
        seed = trial_seed(cfg.base_seed, t)
        chan = sample_channel(seed, cfg.M, cfg.K, atten, cfg.sigma2)
        results = [solve_instance(chan, scheme, db_to_linear(g), seed=seed, tol=cfg.tol,
                                  max_iter=cfg.max_iter, trace_every=cfg.trace_every) for g in targets]
        if all(r.feasible for r in results):
            chosen = (t, results)
            break
    cols = ["gamma0_db", "scheme", "trial", "iter", "total_power_w"] + [f"p_{k + 1}" for k in range(cfg.K)]
    rows = []
    meta = _metadata(cfg)
    if chosen is None:
        meta["note"] = "no trial converged for every target"
        meta["trial"] = None
        return ResultTable(cols, rows, meta)
    t, results = chosen
    meta["trial"] = t
    meta["iterations"] = {repr(g): r.iterations for g, r in zip(targets, results)}
    for g, r in zip(targets, results):
        for n, pv, tot in r.trace:
            row = {"gamma0_db": g, "scheme": spec.display, "trial": t, "iter": n, "total_power_w": tot}
            row.update({f"p_{k + 1}": float(x) for k, x in enumerate(pv)})
            rows.append(row)
    return ResultTable(cols, rows, meta)


def max_users(cfg):
    """Largest K (counting up from 1) with feasibility >= 0.5 and mean power <= p_tot, per scheme.

    Nulling schemes are searched up to ``M - 1`` users, the others up to ``M``;
    the whole K -> power curve is returned as rows.
    """
    p_tot = cfg.p_tot if cfg.p_tot is not None else (cfg.sweep.values[0] if cfg.sweep.values else None)
    if p_tot is None or not p_tot > 0:
        raise DimensionError("p_tot: max_users needs a positive power budget (watts)")
    gamma = db_to_linear(cfg.gamma0_db)
    cols = ["scheme", "K", "n_trials", "n_feasible", "feasibility_rate", "mean_total_power_w", "within_budget"]
    rows = []
    best = {}
    for spec in cfg.schemes:
        k_cap = cfg.M - 1 if spec.name in ("joint_zf_nulling", "joint_imperfect_csi") else cfg.M
        count = 0
        streak = True
        for K in range(1, k_cap + 1):
            results = _run_point(cfg, cfg.M, K, gamma, spec, p_tot=p_tot)
            feas = [r for r in results if r.feasible]
            rate = len(feas) / len(results)
            mean = float(np.mean([r.total for r in feas])) if feas else None
            ok = rate >= 0.5 and mean is not None and mean <= p_tot
            if streak and ok:
                count = K
            streak = streak and ok
            rows.append({
                "scheme": spec.display, "K": K, "n_trials": len(results), "n_feasible": len(feas),
                "feasibility_rate": rate, "mean_total_power_w": mean, "within_budget": ok,
            })
        best[spec.display] = count
    return ResultTable(cols, rows, _metadata(cfg, p_tot=p_tot, max_users=best))


def monte_carlo_sweep(cfg: ExperimentConfig) -> ResultTable:
    kind = cfg.sweep.kind
    if kind == "iter_trace":
        return iteration_trace(cfg)
    if kind == "csi_comparison":
        return _csi_comparison(cfg)
    if kind == "air_interface":
        return _air_interface_sweep(cfg)
    if kind == "max_users":
        return max_users(cfg)
    return _power_sweep(cfg)


# ---------------------------------------------------------------------------
# figure presets

_JOINT_FIXED = (SchemeSpec("fixed_bf"), SchemeSpec("joint_zf_nulling"))


def preset(name, **overrides) -> ExperimentConfig:
    """Experiment configuration for one of ``PRESETS``; keyword overrides are applied last."""
    base = dict(M=8, K=5, alpha=0.8, alpha_e=0.8, sigma2_dbm=-10.0, gamma0_db=6.0)
    if name == "fig3":
        base.update(sweep=Sweep("iter_trace", (6.0, 8.0)), schemes=(SchemeSpec("fixed_bf"),))
    elif name == "fig4":
        base.update(sweep=Sweep("antenna_elements", tuple(range(6, 21))), schemes=_JOINT_FIXED)
    elif name == "fig5":
        base.update(M=15, sweep=Sweep("beams", tuple(range(2, 13))), schemes=_JOINT_FIXED)
    elif name == "fig6":
        base.update(sweep=Sweep("eaves_atten", tuple(float(x) for x in range(0, 21, 2))), schemes=_JOINT_FIXED)
    elif name == "fig7":
        base.update(alpha_e=1.0, sweep=Sweep("secrecy_target", tuple(float(x) for x in range(0, 11))),
                    schemes=_JOINT_FIXED)
    elif name == "fig8":
        base.update(sweep=Sweep("user_atten", (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2), user=1),
                    schemes=_JOINT_FIXED)
    elif name == "fig9":
        base.update(alpha_e=1.0, sweep=Sweep("csi_comparison", (1.0, 10.0, 100.0, 1000.0)),
                    schemes=(SchemeSpec("joint_zf_nulling", "known_csi"),
                             SchemeSpec("zfbf_unknown_csi", "unknown_csi")))
    elif name == "fig10":
        base.update(alpha_e=1.0, sweep=Sweep("air_interface", (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5)),
                    schemes=(SchemeSpec("joint_zf_nulling"),))
    elif name == "table1":
        base.update(M=20, alpha=1.0, alpha_e=1.0, p_tot=10.0, sweep=Sweep("max_users", (10.0,)),
                    schemes=(
                        SchemeSpec("fixed_power_fixed_bf", "fixed_power_fixed_bf[ae=1]"),
                        SchemeSpec("fixed_bf", "power_control_fixed_bf[ae=1]"),
                        SchemeSpec("fixed_bf", "power_control_fixed_bf[ae=0.5]", alpha_e=0.5),
                        SchemeSpec("joint_zf_nulling", "joint[ae=1]"),
                        SchemeSpec("joint_zf_nulling", "joint[ae=0.5]", alpha_e=0.5),
                    ))
    else:
        raise DimensionError(f"unknown preset {name!r}; choose from {list(PRESETS)}")
    base.update(overrides)
    return ExperimentConfig(**base)


PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "table1")

TABLE1_TARGETS = {
    "fixed_power_fixed_bf[ae=1]": 4,
    "power_control_fixed_bf[ae=1]": 9,
    "power_control_fixed_bf[ae=0.5]": 13,
    "joint[ae=1]": 20,
    "joint[ae=0.5]": 21,
}
