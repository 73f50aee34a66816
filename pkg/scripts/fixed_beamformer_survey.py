"""Feasibility and mean power of each fixed beamformer against M, with joint nulling for reference.

    python scripts/fixed_beamformer_survey.py --trials 300
"""

import argparse

from satsec.experiments import FIXED_BEAMFORMERS, SchemeSpec, monte_carlo_sweep, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for bf in sorted(FIXED_BEAMFORMERS):
        cfg = preset("fig4", n_trials=args.trials, base_seed=args.seed, fixed_beamformer=bf,
                     schemes=(SchemeSpec("fixed_bf"),))
        print(f"fixed beamformer: {bf}")
        for row in monte_carlo_sweep(cfg).rows:
            mean = row["mean_total_power_w"]
            shown = "-" if mean is None else f"{mean:.3e}"
            print(f"  M={row['sweep_value']:>2}  feasible {row['feasibility_rate']:.3f}  mean power {shown} W")


if __name__ == "__main__":
    main()
