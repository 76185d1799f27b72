"""Residuals of the uniform-square round trip and Lebesgue direction versus depth.

Prints one row per curve depth: the largest pipeline residual over
monomials of total degree <= d_max, the Lebesgue-direction residual, and
the ratio to the row two depths earlier.  Both residuals scale like the
cell area 4^-p, so the ratio settles at 16.

    python3 scripts/convergence_table.py --depths 4 6 8 10 12 --d-max 4
"""

import argparse
import time

import numpy as np

from momtransform.curves import Box, HilbertCurve
from momtransform.measures import Measure
from momtransform.transforms import g_moment_pipeline, lebesgue_direction


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", type=int, nargs="+", default=[4, 6, 8, 10])
    ap.add_argument("--d-max", type=int, default=4)
    args = ap.parse_args(argv)

    mu = Measure.grid_density(Box.unit(2), np.ones((1, 1)))
    print(f"{'depth':>5} {'pipeline':>11} {'ratio':>7} {'leb-dir':>11} {'ratio':>7} {'seconds':>8}")
    prev = {}
    for p in args.depths:
        t0 = time.perf_counter()
        curve = HilbertCurve(Box.unit(2), p)
        pipe = g_moment_pipeline(mu, curve, args.d_max).max_residual
        leb = lebesgue_direction(mu, curve, args.d_max)[1].max_residual
        dt = time.perf_counter() - t0
        r1 = prev[p - 2][0] / pipe if p - 2 in prev and pipe else float("nan")
        r2 = prev[p - 2][1] / leb if p - 2 in prev and leb else float("nan")
        prev[p] = (pipe, leb)
        print(f"{p:>5} {pipe:>11.3e} {r1:>7.1f} {leb:>11.3e} {r2:>7.1f} {dt:>8.2f}")


if __name__ == "__main__":
    main()
