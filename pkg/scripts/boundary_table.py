#!/usr/bin/env python3
"""Print the transition-radius table for a frequency x element-count grid.

Usage:
    python scripts/boundary_table.py [--fast] [--freqs-ghz 1,10,300] [--elements 2,5,64]

--fast drops the search densities for a quick coarse look (radii good to
roughly three digits); the default densities match the library defaults.
"""

import argparse
import sys

from nearfield import (
    AngleSearchPolicy,
    ArrayConfig,
    EnvelopeSearchPolicy,
    Tolerances,
    boundary_set,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--freqs-ghz", default="1,10,300")
    parser.add_argument("--elements", default="2,5,64")
    parser.add_argument("--delta-inf", type=float, default=1e-3)
    parser.add_argument("--delta-2", type=float, default=1e-3)
    parser.add_argument("--delta-se", type=float, default=0.5)
    parser.add_argument("--fast", action="store_true")
    args = parser.parse_args()

    tol = Tolerances(delta_inf=args.delta_inf, delta_2=args.delta_2, delta_se=args.delta_se)
    angle = AngleSearchPolicy(coarse_grid_points=181) if args.fast else AngleSearchPolicy()
    envelope = EnvelopeSearchPolicy(points_per_decade=150) if args.fast else EnvelopeSearchPolicy()

    header = f"{'config':>12} {'rayleigh':>10} {'epf':>12} {'spf':>12} {'sspf':>12} " \
             f"{'opt_linf':>12} {'opt_l2':>14} {'opt_se':>12}"
    print(header)
    print("-" * len(header))
    for freq in (float(f) for f in args.freqs_ghz.split(",")):
        for n in (int(n) for n in args.elements.split(",")):
            cfg = ArrayConfig(carrier_freq=freq * 1e9, n_elements=n)
            b = boundary_set(cfg, tol, angle_policy=angle, envelope_policy=envelope)
            se_mark = "" if b.opt_se_certified else "*"
            print(
                f"{freq:g}GHz-N{n:<4} {b.rayleigh:>10.4g} {b.epf:>12.6g} {b.spf:>12.6g} "
                f"{b.sspf:>12.6g} {b.opt_linf:>12.6g} {b.opt_l2:>14.6g} "
                f"{b.opt_se:>11.6g}{se_mark}"
            )
            sys.stdout.flush()
    print("\nall values in meters; * marks the budget-dependent, non-certified SE radius")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
