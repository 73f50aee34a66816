"""Command-line front end.

Subcommands: ``solve``, ``sweep``, ``balance``, ``capacity``, ``check`` and
``preset``.  Exit codes: 0 success, 1 invalid input, 2 infeasible instance.
dB/dBm values are converted to linear units here, before calling the library.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile

import numpy as np

from satsec import __version__
from satsec.beamform import zf_nulling_weights, zf_nulling_weights_estimated, zfbf_weights
from satsec.channel import AttenuationProfile, ChannelRealization, CovarianceCsi, dbm_to_watts, sample_channel
from satsec.errors import SatsecError
from satsec.experiments import (
    DEFAULT_FIXED_BF,
    FIXED_BEAMFORMERS,
    PRESETS,
    SCHEME_NAMES,
    ExperimentConfig,
    FixedBF,
    JointImperfectCsi,
    ZfbfUnknownCsi,
    _estimated_csi,
    fixed_weights,
    make_scheme,
    max_common_sinr,
    max_users,
    monte_carlo_sweep,
    preset,
    solve_instance,
)
from satsec.powerctl import Variant, check_standard_conditions, coefficients, standard_property_probe
from satsec.secrecy import sinr_report

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _number(unit, positive=False):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number in {unit}, got {text!r}") from None
        if not np.isfinite(v) or (positive and v <= 0):
            raise argparse.ArgumentTypeError(f"expected a {'positive ' if positive else ''}finite number in {unit}, got {text!r}")
        return v

    return parse


def _count(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return v


def _alpha_list(text):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected linear amplitude(s), comma-separated, got {text!r}") from None
    return vals[0] if len(vals) == 1 else vals


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".satsec-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, out):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _format_for(args):
    if args.format:
        return args.format
    return "json" if args.out and args.out.endswith(".json") else "csv"


def _load_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# argument groups


def _add_run_options(p):
    p.add_argument("--seed", type=_count, help="base seed (nonnegative integer)")
    p.add_argument("--trials", type=_count, help="Monte Carlo trials per sweep point")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default from --out suffix, else csv)")
    p.add_argument("--tol", type=_number("relative tolerance", positive=True), help="fixed-point tolerance")
    p.add_argument("--threads", type=_count, help="worker threads (overrides SATSEC_THREADS)")
    p.add_argument("--sigma2-dbm", type=_number("dBm"), help="noise power")
    p.add_argument("--fixed-beamformer", choices=sorted(FIXED_BEAMFORMERS), help="fixed beamformer")


def _add_instance_options(p):
    p.add_argument("--channel", help="channel JSON file (H, h_e as [re, im] pairs, sigma2_watts)")
    p.add_argument("--seed", type=_count, default=0, help="draw seed when no --channel is given")
    p.add_argument("--M", type=_count, default=8, help="antenna elements")
    p.add_argument("--K", type=_count, default=5, help="beams/users")
    p.add_argument("--alpha", type=_alpha_list, default=0.8, help="user attenuation (linear amplitude, or K comma-separated)")
    p.add_argument("--alpha-e", type=_number("linear amplitude"), default=0.8, help="eavesdropper attenuation")
    p.add_argument("--sigma2-dbm", type=_number("dBm"), help="noise power (overrides the channel file)")
    p.add_argument("--scheme", choices=SCHEME_NAMES, default="fixed_bf")
    p.add_argument("--fixed-beamformer", choices=sorted(FIXED_BEAMFORMERS), default=None)
    p.add_argument("--csi-error-var", type=_number("fraction of eavesdropper gain"), default=0.1)
    p.add_argument("--tol", type=_number("relative tolerance", positive=True), default=1e-8)
    p.add_argument("--out", help="output path (stdout when omitted)")


def build_parser():
    parser = _Parser(prog="satsec", description="Secrecy-constrained multibeam power control.")
    parser.add_argument("--version", action="version", version=f"satsec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="minimum-power allocation for one instance")
    _add_instance_options(p)
    p.add_argument("--gamma-db", type=_number("dB"), default=6.0, help="secrecy SINR target")
    p.add_argument("--p-tot", type=_number("watts", positive=True), help="budget for fixed_power_fixed_bf")

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    p.add_argument("config", help="experiment config (JSON)")
    _add_run_options(p)

    p = sub.add_parser("balance", help="largest common secrecy SINR under a power budget")
    _add_instance_options(p)
    p.add_argument("--p-tot", type=_number("watts", positive=True), required=True)
    p.add_argument("--tol-db", type=_number("dB", positive=True), default=0.01)

    p = sub.add_parser("capacity", help="maximum number of users under a power budget")
    p.add_argument("config", nargs="?", help="experiment config (JSON); table1 preset when omitted")
    p.add_argument("--p-tot", type=_number("watts", positive=True))
    p.add_argument("--gamma-db", type=_number("dB"))
    _add_run_options(p)

    p = sub.add_parser("check", help="sufficient-condition report and property probe")
    _add_instance_options(p)
    p.add_argument("--gamma-db", type=_number("dB"), default=6.0)
    p.add_argument("--samples", type=_count, default=1000, help="probe samples")

    p = sub.add_parser("preset", help="run a named figure/table experiment")
    p.add_argument("name", choices=PRESETS)
    _add_run_options(p)
    return parser


# ---------------------------------------------------------------------------
# helpers


def _instance(args):
    if args.channel:
        try:
            chan = ChannelRealization.from_dict(_load_json(args.channel, "channel file"))
        except SatsecError as exc:
            raise UsageError(f"channel file {args.channel}: {exc}") from None
        if args.sigma2_dbm is not None:
            chan = ChannelRealization(chan.H, chan.h_e, dbm_to_watts(args.sigma2_dbm))
        return chan
    if args.M < 1 or args.K < 1:
        raise UsageError("--M and --K must be >= 1")
    alpha = args.alpha if isinstance(args.alpha, list) else [args.alpha] * args.K
    atten = AttenuationProfile(alpha, args.alpha_e)
    sigma2 = dbm_to_watts(-10.0 if args.sigma2_dbm is None else args.sigma2_dbm)
    return sample_channel(args.seed, args.M, args.K, atten, sigma2)


def _scheme(args, p_tot=None):
    return make_scheme(
        args.scheme,
        fixed_beamformer=args.fixed_beamformer or DEFAULT_FIXED_BF,
        csi_error_var=args.csi_error_var,
        p_tot=p_tot,
    )


def _apply_overrides(cfg, args, **extra):
    changes = dict(extra)
    for flag, key in (("seed", "base_seed"), ("trials", "n_trials"), ("tol", "tol"), ("threads", "threads"),
                      ("sigma2_dbm", "sigma2_dbm"), ("fixed_beamformer", "fixed_beamformer")):
        v = getattr(args, flag, None)
        if v is not None:
            changes[key] = v
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _config_from_file(path):
    return ExperimentConfig.from_dict(_load_json(path, "config file"), where=os.path.basename(path))


def _emit_table(table, args):
    text = table.to_json() if _format_for(args) == "json" else table.to_csv()
    _emit(text, args.out)


def _dump(obj, out):
    _emit(json.dumps(obj, indent=2) + "\n", out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args):
    chan = _instance(args)
    scheme = _scheme(args, args.p_tot)
    gamma = 10.0 ** (args.gamma_db / 10.0)
    r = solve_instance(chan, scheme, gamma, seed=args.seed, tol=args.tol)
    doc = {
        "scheme": r.scheme,
        "gamma0_db": args.gamma_db,
        "sigma2_watts": chan.sigma2,
        "feasible": r.feasible,
        "converged": r.converged,
        "iterations": r.iterations,
        "residual": r.residual if np.isfinite(r.residual) else None,
        "error": r.error,
        "trace": [{"iter": n, "total_power_w": t, "powers_w": [float(x) for x in pv]} for n, pv, t in r.trace],
    }
    if r.powers is not None:
        doc["powers_w"] = [float(x) for x in r.powers]
        doc["total_power_w"] = r.total
        W = _weights_for(chan, scheme, args.seed)
        if W is not None:
            rep = sinr_report(chan, W, r.powers)
            doc["sinr_legitimate"] = rep.gamma_k.tolist()
            doc["sinr_eavesdropper"] = rep.gamma_ek.tolist()
            doc["secrecy_sinr"] = rep.gamma_s.tolist()
    _dump(doc, args.out)
    if not r.feasible:
        print(f"infeasible: {r.error}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _weights_for(chan, scheme, seed):
    try:
        if isinstance(scheme, ZfbfUnknownCsi):
            return zfbf_weights(chan)
        if isinstance(scheme, JointImperfectCsi):
            return zf_nulling_weights_estimated(chan, _estimated_csi(chan, scheme, seed).h_hat_e)
        if hasattr(scheme, "weights"):
            return fixed_weights(chan, scheme.weights)
        return zf_nulling_weights(chan)
    except SatsecError:
        return None


def cmd_sweep(args):
    cfg = _apply_overrides(_config_from_file(args.config), args)
    _emit_table(monte_carlo_sweep(cfg), args)
    return EXIT_OK


def cmd_balance(args):
    chan = _instance(args)
    scheme = _scheme(args, args.p_tot)
    if isinstance(scheme, ZfbfUnknownCsi) and scheme.R_hat_e is None:
        scheme = ZfbfUnknownCsi(float(np.mean(np.abs(chan.h_e) ** 2)) * np.eye(chan.M))
    res = max_common_sinr(chan, scheme, args.p_tot, tol_db=args.tol_db, seed=args.seed, tol=args.tol)
    _dump({
        "scheme": scheme.name,
        "p_tot_w": args.p_tot,
        "sigma2_watts": chan.sigma2,
        "gamma_db": res.gamma_db if np.isfinite(res.gamma_db) else None,
        "gamma_linear": res.gamma_linear,
        "status": res.status,
        "total_power_w": res.total_power,
    }, args.out)
    return EXIT_OK


def cmd_capacity(args):
    cfg = _config_from_file(args.config) if args.config else preset("table1")
    extra = {}
    if args.p_tot is not None:
        extra["p_tot"] = args.p_tot
    if args.gamma_db is not None:
        extra["gamma0_db"] = args.gamma_db
    cfg = _apply_overrides(cfg, args, **extra)
    table = max_users(cfg)
    _emit_table(table, args)
    if args.out:
        print(json.dumps(table.metadata["max_users"]))
    return EXIT_OK


def cmd_check(args):
    chan = _instance(args)
    gamma = 10.0 ** (args.gamma_db / 10.0)
    scheme = _scheme(args)
    if isinstance(scheme, FixedBF):
        coeffs = coefficients(chan, fixed_weights(chan, scheme.weights), gamma, variant=Variant.FIXED_BF)
    elif isinstance(scheme, ZfbfUnknownCsi):
        R = float(np.mean(np.abs(chan.h_e) ** 2)) * np.eye(chan.M)
        coeffs = coefficients(chan, zfbf_weights(chan), gamma, CovarianceCsi(R), Variant.UNKNOWN_CSI)
    elif isinstance(scheme, JointImperfectCsi):
        csi = _estimated_csi(chan, scheme, args.seed)
        W = zf_nulling_weights_estimated(chan, csi.h_hat_e)
        coeffs = coefficients(chan, W, gamma, csi, Variant.IMPERFECT_CSI)
    else:
        raise UsageError(f"check applies to fixed-point schemes, not {scheme.name}")
    report = check_standard_conditions(coeffs)
    probe = standard_property_probe(coeffs, seed=args.seed, n_samples=args.samples)
    _dump({"conditions": report.to_dict(), "probe": probe.to_dict()}, args.out)
    return EXIT_OK


def cmd_preset(args):
    cfg = _apply_overrides(preset(args.name), args)
    _emit_table(monte_carlo_sweep(cfg), args)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "balance": cmd_balance,
    "capacity": cmd_capacity,
    "check": cmd_check,
    "preset": cmd_preset,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SatsecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
