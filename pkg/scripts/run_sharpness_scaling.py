#!/usr/bin/env python3
"""Sharpness of the lower estimate on the sup-norm multiplication model.

For x -> x^t on a grid of (0,1], the norm of F(-uA) approaches the ray
maximum of |F| from below as the grid refines; this prints the gap table
over grid sizes and scales u.
"""

import argparse

from sgcalc.cli import NAMED_MEASURES
from sgcalc.spectral import sharpness_demo


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--measure", default="delta-difference",
                        choices=sorted(NAMED_MEASURES))
    parser.add_argument("--n", type=int, nargs="+",
                        default=[1000, 10000, 100000])
    parser.add_argument("--u", type=float, nargs="+",
                        default=[0.1, 0.5, 1.0, 2.0])
    args = parser.parse_args()

    mu = NAMED_MEASURES[args.measure]()
    print(f"measure: {args.measure}")
    prev = None
    for n in args.n:
        rep = sharpness_demo(n, mu, args.u)
        gaps = "  ".join(f"u={row.u:g}: {row.gap:.3e}" for row in rep.rows)
        print(f"n={n:7d}  ray={rep.ray_value:.10f}  {gaps}")
        if prev is not None and rep.max_gap > prev + 1e-6:
            print("  warning: max gap increased beyond noise")
        prev = rep.max_gap
    print(rep.note)


if __name__ == "__main__":
    main()
