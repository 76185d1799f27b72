"""Achieved L1 error of the polynomial surrogate g_eps versus fit degree.

For random atomic measures on the unit square, fit ``g_eps = min(p^2, 1)``
to the Hilbert right inverse at every degree up to ``--max-degree`` and
report the median and worst ``L(|g - g_eps|)`` per degree together with
the number of fits on which the telescoping bound held.

    python3 scripts/approx_g_sweep.py --atoms 40 --measures 50
"""

import argparse

import numpy as np

from momtransform.curves import Box, HilbertCurve
from momtransform.synthetic import random_atomic
from momtransform.transforms import approximate_g


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, default=40)
    ap.add_argument("--measures", type=int, default=50)
    ap.add_argument("--max-degree", type=int, default=10)
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    curve = HilbertCurve(Box.unit(2), args.depth)
    table = np.zeros((args.measures, args.max_degree + 1))
    held = 0
    for i in range(args.measures):
        mu = random_atomic(rng, (0, 0), (1, 1), args.atoms)
        # epsilon below any reachable value forces the full degree sweep
        fit = approximate_g(mu, curve, 1e-300, args.max_degree)
        table[i] = [h["l1"] / mu.total_mass() for h in fit.history]
        held += fit.telescoping_holds
    print(f"{'degree':>6} {'median L1/m0':>13} {'worst L1/m0':>12}")
    for d in range(args.max_degree + 1):
        print(f"{d:>6} {np.median(table[:, d]):>13.3e} {table[:, d].max():>12.3e}")
    print(f"telescoping bound held on {held}/{args.measures} fits")


if __name__ == "__main__":
    main()
