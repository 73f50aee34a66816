"""Run every figure/table preset and write CSV + JSON tables into one directory.

    python scripts/run_figures.py --out results --seed 0 --trials 1000
"""

import argparse
import pathlib
import time

from satsec.cli import atomic_write
from satsec.experiments import PRESETS, monte_carlo_sweep, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=None, help="override the per-preset trial count")
    ap.add_argument("--only", nargs="*", choices=PRESETS, help="subset of presets")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or PRESETS:
        overrides = {"base_seed": args.seed}
        if args.trials is not None:
            overrides["n_trials"] = args.trials
        t0 = time.perf_counter()
        table = monte_carlo_sweep(preset(name, **overrides))
        atomic_write(out / f"{name}.csv", table.to_csv())
        atomic_write(out / f"{name}.json", table.to_json())
        print(f"{name}: {len(table.rows)} rows in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
