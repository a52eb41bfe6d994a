#!/usr/bin/env python3
"""Worst-case metric profiles over range for one configuration, as CSV.

Usage:
    python scripts/mismatch_profile.py --freq-ghz 300 --elements 64 \
        --r-start 0.1 --r-stop 2000 --points 300 > profile.csv

Columns: range_m, then one worst-case value column per metric, plus the
maximizing angle of the per-element metric.  The data is plot-ready; feed it
to any plotting tool.
"""

import argparse

import numpy as np

from nearfield import DEFAULT_BUDGET
from nearfield.link import se_loss_worst_batch
from nearfield.metrics import e_l2_worst_batch, e_linf_worst_batch
from nearfield import ArrayConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--freq-ghz", type=float, required=True)
    parser.add_argument("--elements", type=int, required=True)
    parser.add_argument("--r-start", type=float, required=True)
    parser.add_argument("--r-stop", type=float, required=True)
    parser.add_argument("--points", type=int, default=300)
    args = parser.parse_args()

    cfg = ArrayConfig(carrier_freq=args.freq_ghz * 1e9, n_elements=args.elements)
    grid = np.geomspace(args.r_start, args.r_stop, args.points)
    linf, theta = e_linf_worst_batch(cfg, grid)
    l2, _ = e_l2_worst_batch(cfg, grid)
    se, _ = se_loss_worst_batch(cfg, grid, DEFAULT_BUDGET)

    print("range_m,linf_per_m,l2,se_loss_bits,theta_star_rad")
    for row in zip(grid, linf, l2, se, theta):
        print(",".join(format(v, ".17g") for v in row))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
