"""Print the maximum-user counts of the table1 preset next to the reference counts.

    python scripts/max_users_table.py --trials 200 --fixed-beamformer zf
"""

import argparse

from satsec.experiments import FIXED_BEAMFORMERS, TABLE1_TARGETS, max_users, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p-tot", type=float, default=10.0, help="watts")
    ap.add_argument("--fixed-beamformer", choices=sorted(FIXED_BEAMFORMERS), default=None)
    args = ap.parse_args()

    overrides = {"n_trials": args.trials, "base_seed": args.seed, "p_tot": args.p_tot}
    if args.fixed_beamformer:
        overrides["fixed_beamformer"] = args.fixed_beamformer
    table = max_users(preset("table1", **overrides))
    width = max(map(len, TABLE1_TARGETS))
    print(f"{'setup':<{width}}  users  reference")
    for label, count in table.metadata["max_users"].items():
        print(f"{label:<{width}}  {count:>5}  {TABLE1_TARGETS.get(label, '-'):>9}")


if __name__ == "__main__":
    main()
