"""Seeded generators of test measures shared by the test suite and scripts."""

from __future__ import annotations

import numpy as np

from .measures import Measure


def dyadic_atomic_unit(rng, r, grid=32, weight_den=8, min_gap=2):
    """``r`` atoms on ``{j/grid}`` with weights in ``{k/weight_den}``.

    Nodes are at least ``min_gap/grid`` apart.  For ``grid = 32`` and
    degrees up to 10 every ``w * x**d`` is an exact double, so the moments
    carry only the rounding of an ``r``-term sum and reconstruction error
    measures the algorithm rather than the data.
    """
    slots = np.arange(grid + 1)
    while True:
        pick = np.sort(rng.choice(slots, size=r, replace=False))
        if r == 1 or np.min(np.diff(pick)) >= min_gap:
            break
    w = rng.integers(1, weight_den + 1, size=r) / weight_den
    return Measure.atomic((pick / grid).reshape(-1, 1), w)


def random_atomic_unit(rng, max_atoms=5):
    """Between 1 and ``max_atoms`` uniform atoms on [0, 1] with positive weights."""
    r = int(rng.integers(1, max_atoms + 1))
    return Measure.atomic(rng.random((r, 1)), rng.random(r) + 0.05)


def cell_center_atoms(rng, curve, max_atoms=4):
    """Atoms at distinct cell centers of ``curve``; weights in ``(0.05, 1.05)``."""
    r = int(rng.integers(1, max_atoms + 1))
    k = rng.choice(curve.n_cells, size=r, replace=False)
    return Measure.atomic(curve.cell_centers(np.sort(k)), rng.random(r) + 0.05)


def random_atomic(rng, box_lo, box_hi, n_atoms):
    lo, hi = np.asarray(box_lo, dtype=float), np.asarray(box_hi, dtype=float)
    pts = lo + (hi - lo) * rng.random((n_atoms, lo.size))
    return Measure.atomic(pts, rng.random(n_atoms) + 0.05)
