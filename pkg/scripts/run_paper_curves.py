#!/usr/bin/env python3
"""Reproduce the three headline rate curves and write their CSVs.

Full runs take hours on a laptop-class machine; --quick produces small-trial
curves with the same structure in a couple of minutes.

    python scripts/run_paper_curves.py --out results/ [--quick] [--threads N]

Outputs (one CSV per curve, montecarlo schema):
    miss_m16_pfa1e-3.csv, miss_m16_pfa1e-2.csv, miss_m128_pfa1e-2.csv
    fa_noise_m16_pfa1e-2.csv, fa_noise_m16_pfa1e-3.csv
    intruder_m16_pfa1e-2.csv
"""

import argparse
import os
import sys
import time

from arrayauth import montecarlo as mc

GRID = tuple(float(s) for s in range(-10, 21))


def curve_specs(quick: bool):
    miss_trials = 2_000 if quick else 10_000
    fa_trials = 5_000 if quick else 100_000
    fa3_trials = 20_000 if quick else 1_000_000
    intr_trials = 2_000 if quick else 30_000
    return [
        ("miss_m16_pfa1e-3", dict(scenario="miss", m_active=16, pfa_target=0.001, trials_per_point=miss_trials)),
        ("miss_m16_pfa1e-2", dict(scenario="miss", m_active=16, pfa_target=0.01, trials_per_point=miss_trials)),
        ("miss_m128_pfa1e-2", dict(scenario="miss", m_active=128, pfa_target=0.01, trials_per_point=miss_trials)),
        ("fa_noise_m16_pfa1e-2", dict(scenario="fa_noise", m_active=16, pfa_target=0.01, trials_per_point=fa_trials)),
        ("fa_noise_m16_pfa1e-3", dict(scenario="fa_noise", m_active=16, pfa_target=0.001, trials_per_point=fa3_trials, probe_count=1024)),
        ("intruder_m16_pfa1e-2", dict(scenario="intruder", m_active=16, pfa_target=0.01, trials_per_point=intr_trials)),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results")
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", default=None, help="start:stop:step override")
    args = parser.parse_args(argv)

    grid = GRID
    if args.grid:
        start, stop, step = (float(v) for v in args.grid.split(":"))
        grid = tuple(
            start + i * step for i in range(int(round((stop - start) / step)) + 1)
        )
    os.makedirs(args.out, exist_ok=True)
    for name, spec in curve_specs(args.quick):
        cfg = mc.ExperimentConfig(
            snr_grid_db=grid, master_seed=args.seed, threads=args.threads, **spec
        )
        t0 = time.time()
        curve = mc.run_scenario(cfg)
        path = os.path.join(args.out, f"{name}.csv")
        mc.write_curve_csv(curve, path)
        print(f"{name}: wrote {path} ({time.time() - t0:.0f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
