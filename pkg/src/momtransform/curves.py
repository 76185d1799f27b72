"""Finite-depth space-filling curves and their minimal-parameter right inverses.

A Hilbert curve of depth ``p`` on an ``n``-dimensional box splits the box into
``N = 2**(n*p)`` congruent cells visited in Hilbert order.  The curve is the
polyline that, inside cell ``k``, runs from the cell's entry corner (reached at
``t = k/N``) to the cell center (``t = (k + 1/2)/N``) and on to the exit corner,
which is the entry corner of cell ``k + 1``.  Entry corners coincide with the
values of the limiting Hilbert curve, so ``eval(0)`` is the ``lo`` corner and
``eval(1)`` is the corner at the far end of the first axis.

All parameters ``j/(2N)`` map to lattice points with exact dyadic arithmetic.
The right inverse returns the smallest such grid parameter whose image is the
query point; otherwise it returns the center parameter of the lowest-index
cell containing the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import ConfigurationError, DomainError, InputError

#: relative slack (in units of the box width) when testing target membership
TAU_DOM = 1e-12
#: distance, in half-cell lattice units, under which a point is snapped onto the lattice
SNAP = 1e-9


# --------------------------------------------------------------------------
# Hilbert index arithmetic (Skilling's transpose algorithm, vectorized)
# --------------------------------------------------------------------------

def hilbert_axes(index, bits, n):
    """Cell coordinates of Hilbert indices.

    Parameters
    ----------
    index : array_like of int
        Hilbert indices in ``[0, 2**(n*bits))``.
    bits : int
        Refinement depth (bits per axis).
    n : int
        Dimension.

    Returns
    -------
    np.ndarray, shape (n, ...)
        Integer coordinates in ``[0, 2**bits)``.
    """
    h = np.asarray(index, dtype=np.int64)
    X = np.zeros((n,) + h.shape, dtype=np.int64)
    for j in range(bits):
        for i in range(n):
            shift = (bits - 1 - j) * n + (n - 1 - i)
            X[i] |= ((h >> shift) & 1) << (bits - 1 - j)
    if n == 1:
        return X
    top = 2 << (bits - 1)
    t = X[n - 1] >> 1
    for i in range(n - 1, 0, -1):
        X[i] ^= X[i - 1]
    X[0] ^= t
    Q = 2
    while Q != top:
        P = Q - 1
        for i in range(n - 1, -1, -1):
            hit = (X[i] & Q) != 0
            swap = np.where(hit, 0, (X[0] ^ X[i]) & P)
            X[0] = np.where(hit, X[0] ^ P, X[0] ^ swap)
            if i:
                X[i] ^= swap
        Q <<= 1
    return X


def hilbert_index(axes, bits, n):
    """Inverse of :func:`hilbert_axes`; ``axes`` has shape ``(n, ...)``."""
    X = np.array(axes, dtype=np.int64, copy=True)
    if n > 1:
        Q = 1 << (bits - 1)
        while Q > 1:
            P = Q - 1
            for i in range(n):
                hit = (X[i] & Q) != 0
                swap = np.where(hit, 0, (X[0] ^ X[i]) & P)
                X[0] = np.where(hit, X[0] ^ P, X[0] ^ swap)
                if i:
                    X[i] ^= swap
            Q >>= 1
        for i in range(1, n):
            X[i] ^= X[i - 1]
        t = np.zeros_like(X[0])
        Q = 1 << (bits - 1)
        while Q > 1:
            t = np.where((X[n - 1] & Q) != 0, t ^ (Q - 1), t)
            Q >>= 1
        X ^= t
    h = np.zeros(X.shape[1:], dtype=np.int64)
    for j in range(bits):
        for i in range(n):
            shift = (bits - 1 - j) * n + (n - 1 - i)
            h |= ((X[i] >> (bits - 1 - j)) & 1) << shift
    return h


@lru_cache(maxsize=4)
def hilbert_table(depth, n):
    """Coordinates of every cell in Hilbert order, shape (N, n), read-only.

    Cached because full enumerations at depth 12 cost seconds and several
    pipelines walk the same curve.
    """
    total = 1 << (n * depth)
    out = np.empty((total, n), dtype=np.int32)
    step = 1 << 20
    for s in range(0, total, step):
        out[s:s + step] = hilbert_axes(np.arange(s, min(total, s + step)), depth, n).T
    out.setflags(write=False)
    return out


def max_depth(n):
    """Largest depth for which parameters and indices stay exact in float64/int64."""
    return min((51) // n, 62 // n - 1)


# --------------------------------------------------------------------------
# Boxes and curves
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not 1 <= len(lo) <= 3:
            raise InputError(f"box needs matching lo/hi of dimension 1..3, got {lo}, {hi}")
        if not all(math.isfinite(a) and math.isfinite(b) and a < b for a, b in zip(lo, hi)):
            raise InputError(f"degenerate box lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, n):
        return cls((0.0,) * n, (1.0,) * n)

    @property
    def n(self):
        return len(self.lo)

    @property
    def lo_array(self):
        return np.array(self.lo)

    @property
    def width(self):
        return np.array(self.hi) - np.array(self.lo)

    @property
    def volume(self):
        return float(np.prod(self.width))

    def contains(self, points, tol=TAU_DOM):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        slack = tol * self.width
        return np.all((pts >= self.lo_array - slack) & (pts <= np.array(self.hi) + slack), axis=1)

    def intersects(self, other):
        return all(a_lo <= b_hi and b_lo <= a_hi
                   for a_lo, a_hi, b_lo, b_hi in zip(self.lo, self.hi, other.lo, other.hi))


def _as_params(t):
    arr = np.asarray(t, dtype=float)
    return arr.reshape(-1), arr.ndim == 0


def _as_points(x, n):
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim <= 1
    pts = arr.reshape(-1, n) if arr.size else arr.reshape(0, n)
    if scalar and pts.shape[0] != 1:
        raise InputError(f"expected a point of dimension {n}, got shape {arr.shape}")
    return pts, scalar


@dataclass(frozen=True)
class HilbertCurve:
    """Hilbert curve of a given depth on a box, parameter domain ``[0, 1]``."""

    box: Box
    depth: int
    domain_kind: str = field(default="unit_interval", init=False)

    def __post_init__(self):
        if not isinstance(self.box, Box):
            raise InputError("box must be a Box")
        if not isinstance(self.depth, (int, np.integer)) or not 1 <= self.depth <= max_depth(self.box.n):
            raise ConfigurationError(
                f"depth must be an integer in [1, {max_depth(self.box.n)}] for n={self.box.n}, got {self.depth}")

    @property
    def n(self):
        return self.box.n

    @property
    def side(self):
        return 1 << self.depth

    @property
    def n_cells(self):
        return 1 << (self.n * self.depth)

    @property
    def domain(self):
        return (0.0, 1.0)

    @property
    def cell_width(self):
        return self.box.width / self.side

    # lattice helpers, in half-cell units -----------------------------------

    def _entry_corners(self, k):
        """Entry corners of cells ``k`` (doubled lattice coords, shape (n, m))."""
        k = np.asarray(k, dtype=np.int64)
        end = k >= self.n_cells
        kk = np.where(end, 0, k)
        a = hilbert_axes(kk, self.depth, self.n)
        b = hilbert_axes(kk << self.n, self.depth + 1, self.n)
        corner = 2 * (a + (b - 2 * a))
        if np.any(end):
            last = np.zeros((self.n, 1), dtype=np.int64)
            last[0] = 2 * self.side
            corner = np.where(end, last, corner)
        return corner

    def _nodes(self, j):
        """Doubled lattice coordinates of the grid parameters ``j/(2N)``."""
        j = np.asarray(j, dtype=np.int64).reshape(-1)
        odd = (j & 1) == 1
        k = j >> 1
        out = np.empty((self.n, j.size), dtype=np.int64)
        if np.any(odd):
            out[:, odd] = 2 * self._coords(k[odd]) + 1
        if not np.all(odd):
            out[:, ~odd] = self._entry_corners(k[~odd])
        return out

    def _coords(self, k):
        """Cell coordinates, shape (n, m); large batches go through the cached table."""
        if k.size * 8 >= self.n_cells:
            return hilbert_table(self.depth, self.n)[k].T.astype(np.int64)
        return hilbert_axes(k, self.depth, self.n)

    def _to_points(self, doubled):
        u = np.asarray(doubled, dtype=float).T / (2 * self.side)
        return self.box.lo_array + self.box.width * u

    # public API ------------------------------------------------------------

    def eval(self, t):
        """Point(s) on the curve; ``t`` scalar or 1-D array in ``[0, 1]``."""
        ts, scalar = _as_params(t)
        if ts.size and (np.any(~np.isfinite(ts)) or ts.min() < 0.0 or ts.max() > 1.0):
            raise InputError("curve parameter outside [0, 1]")
        two_n = 2 * self.n_cells
        T = ts * two_n
        j = np.minimum(np.floor(T).astype(np.int64), two_n - 1)
        frac = T - j
        L = self._nodes(j).astype(float)
        moving = frac != 0.0
        if np.any(moving):
            L0 = L[:, moving]
            L[:, moving] = L0 + frac[moving] * (self._nodes(j[moving] + 1) - L0)
        pts = self._to_points(L)
        return pts[0] if scalar else pts

    def cell_indices(self):
        return np.arange(self.n_cells, dtype=np.int64)

    def cell_centers(self, k=None):
        """Centers of the cells with Hilbert index ``k`` (all cells by default)."""
        return self._to_points(2 * self.cell_coords(k).T.astype(np.int64) + 1)

    def center_parameters(self, k=None):
        k = self.cell_indices() if k is None else np.asarray(k, dtype=np.int64)
        return (k + 0.5) / self.n_cells

    def cell_coords(self, k=None):
        """Integer cell coordinates in Hilbert order, shape (m, n)."""
        if k is None:
            return hilbert_table(self.depth, self.n)
        return hilbert_axes(np.asarray(k, dtype=np.int64), self.depth, self.n).T

    def contains(self, x, tol=TAU_DOM):
        pts, _ = _as_points(x, self.n)
        return self.box.contains(pts, tol)

    def cell_of(self, x):
        """Lowest Hilbert index among the closed cells containing each point."""
        return self._locate(_as_points(x, self.n)[0])[0]

    def _locate(self, pts):
        if pts.shape[0] and not np.all(self.box.contains(pts)):
            raise DomainError("point outside the curve target")
        u2 = np.clip((pts - self.box.lo_array) / self.box.width * (2 * self.side), 0, 2 * self.side)
        r = np.rint(u2)
        snapped = np.abs(u2 - r) <= SNAP
        on_edge = snapped & (np.mod(r, 2) == 0)
        base = np.where(on_edge, r / 2, np.floor(np.where(snapped, r, u2) / 2)).astype(np.int64)
        best = np.full(pts.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
        for offs in product((0, 1), repeat=self.n):
            off = np.array(offs, dtype=np.int64)
            cand = base - off * on_edge
            cand_ok = np.all((cand >= 0) & (cand < self.side), axis=1)
            # cells not on an edge take the floor only once
            cand_ok &= ~np.any((off == 1) & ~on_edge, axis=1)
            cand = np.clip(cand, 0, self.side - 1)
            k = hilbert_index(cand.T, self.depth, self.n)
            best = np.where(cand_ok & (k < best), k, best)
        # doubled lattice coordinates of points sitting exactly on a lattice node
        return best, np.where(snapped, r, -1).astype(np.int64), on_edge

    def right_inverse(self, x):
        """Minimal grid parameter mapping onto ``x`` (or the cell-center parameter).

        ``x`` is a point or an array of points of shape (m, n).
        """
        pts, scalar = _as_points(x, self.n)
        best, lattice, on_edge = self._locate(pts)
        t = (best + 0.5) / self.n_cells
        corner_rows = np.all(on_edge, axis=1)
        if np.any(corner_rows):
            rows = np.flatnonzero(corner_rows)
            target = lattice[rows]
            hit = np.full(rows.size, np.inf)
            base = target // 2
            for offs in product((0, 1), repeat=self.n):
                cand = base - np.array(offs, dtype=np.int64)
                ok = np.all((cand >= 0) & (cand < self.side), axis=1)
                k = hilbert_index(np.clip(cand, 0, self.side - 1).T, self.depth, self.n)
                entry = self._entry_corners(k).T
                match = ok & np.all(entry == target, axis=1)
                hit = np.where(match, np.minimum(hit, k / self.n_cells), hit)
            end = np.zeros(self.n, dtype=np.int64)
            end[0] = 2 * self.side
            hit = np.where(np.all(target == end, axis=1), np.minimum(hit, 1.0), hit)
            t[rows] = np.where(np.isfinite(hit), hit, t[rows])
        return float(t[0]) if scalar else t


@dataclass(frozen=True)
class SegmentedCurve:
    """Curves on disjoint boxes glued along the parameter intervals ``I_k``.

    Component ``i`` (0-based) is traced on ``[2i/(2k-1), (2i+1)/(2k-1)]``, or on
    ``[2i, 2i+1]`` when ``unbounded`` is set.
    """

    components: tuple
    unbounded: bool = False
    domain_kind: str = field(default="segmented", init=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InputError("segmented curve needs at least one component")
        if len({c.n for c in comps}) != 1:
            raise InputError("all components must share the ambient dimension")
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                if comps[i].box.intersects(comps[j].box):
                    raise InputError(f"component boxes {i} and {j} overlap")
        object.__setattr__(self, "components", comps)

    @property
    def k(self):
        return len(self.components)

    @property
    def n(self):
        return self.components[0].n

    @property
    def depth(self):
        return self.components[0].depth

    @property
    def length(self):
        return 1.0 if self.unbounded else 1.0 / (2 * self.k - 1)

    @property
    def intervals(self):
        if self.unbounded:
            return [(2.0 * i, 2.0 * i + 1.0) for i in range(self.k)]
        m = 2 * self.k - 1
        return [((2 * i) / m, (2 * i + 1) / m) for i in range(self.k)]

    @property
    def domain(self):
        return (self.intervals[0][0], self.intervals[-1][1])

    def _component_of_param(self, ts):
        which = np.full(ts.shape, -1, dtype=np.int64)
        for i, (a, b) in enumerate(self.intervals):
            which = np.where((which < 0) & (ts >= a) & (ts <= b), i, which)
        return which

    def eval(self, t):
        ts, scalar = _as_params(t)
        which = self._component_of_param(ts)
        if np.any(which < 0):
            raise InputError("parameter lies in a gap between component intervals")
        out = np.empty((ts.size, self.n))
        for i, comp in enumerate(self.components):
            sel = which == i
            if np.any(sel):
                a = self.intervals[i][0]
                s = np.clip((ts[sel] - a) / self.length, 0.0, 1.0)
                out[sel] = comp.eval(s)
        return out[0] if scalar else out

    def component_of(self, x):
        pts, _ = _as_points(x, self.n)
        which = np.full(pts.shape[0], -1, dtype=np.int64)
        for i, comp in enumerate(self.components):
            which = np.where((which < 0) & comp.contains(pts), i, which)
        return which

    def contains(self, x, tol=TAU_DOM):
        return self.component_of(x) >= 0

    def right_inverse(self, x):
        pts, scalar = _as_points(x, self.n)
        which = self.component_of(pts)
        if np.any(which < 0):
            raise DomainError("point outside every component")
        t = np.empty(pts.shape[0])
        for i, comp in enumerate(self.components):
            sel = which == i
            if np.any(sel):
                t[sel] = self.intervals[i][0] + comp.right_inverse(pts[sel]) * self.length
        return float(t[0]) if scalar else t


@dataclass(frozen=True)
class AnnularCurve:
    """Planar curve ``[0, R] -> disc of radius R`` tracing annuli of width ``epsilon``.

    On ``[j*eps, (j+1)*eps]`` a unit-square Hilbert curve is mapped to the polar
    rectangle ``[j*eps, (j+1)*eps] x [0, 2*pi)``; consecutive pieces meet at the
    point ``((j+1)*eps, 0)``.
    """

    epsilon: float
    outer_radius: float
    depth: int
    domain_kind: str = field(default="half_line", init=False)

    def __post_init__(self):
        eps, R = float(self.epsilon), float(self.outer_radius)
        if not (math.isfinite(eps) and eps > 0 and math.isfinite(R) and R > 0):
            raise InputError("epsilon and outer_radius must be positive")
        K = round(R / eps)
        if K < 1 or abs(K * eps - R) > 1e-9 * R:
            raise InputError(f"outer_radius {R} is not a positive integer multiple of epsilon {eps}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "outer_radius", R)
        object.__setattr__(self, "_base", HilbertCurve(Box.unit(2), self.depth))

    n = 2

    @property
    def n_annuli(self):
        return round(self.outer_radius / self.epsilon)

    @property
    def domain(self):
        return (0.0, self.outer_radius)

    def eval(self, t):
        ts, scalar = _as_params(t)
        if ts.size and (np.any(~np.isfinite(ts)) or ts.min() < 0 or ts.max() > self.outer_radius):
            raise InputError(f"parameter outside [0, {self.outer_radius}]")
        q = ts / self.epsilon
        j = np.minimum(np.floor(q), self.n_annuli - 1)
        s = np.clip(q - j, 0.0, 1.0)
        loc = self._base.eval(s).reshape(-1, 2)
        r = (j + loc[:, 0]) * self.epsilon
        theta = 2 * np.pi * loc[:, 1]
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        return pts[0] if scalar else pts

    def contains(self, x, tol=TAU_DOM):
        pts, _ = _as_points(x, 2)
        return np.hypot(pts[:, 0], pts[:, 1]) <= self.outer_radius * (1 + tol)

    def right_inverse(self, x):
        pts, scalar = _as_points(x, 2)
        if not np.all(self.contains(pts)):
            raise DomainError("point outside the disc of radius outer_radius")
        eps = self.epsilon
        r = np.hypot(pts[:, 0], pts[:, 1])
        j = np.clip(np.ceil(r / eps) - 1, 0, self.n_annuli - 1)
        # smallest annulus whose closed shell holds r, decided in float comparisons
        j = np.where((r > (j + 1) * eps) & (j < self.n_annuli - 1), j + 1, j)
        j = np.where((j > 0) & (r <= j * eps), j - 1, j)
        theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
        loc = np.column_stack([np.clip(r / eps - j, 0.0, 1.0), np.clip(theta / (2 * np.pi), 0.0, 1.0)])
        s = np.atleast_1d(self._base.right_inverse(loc))
        t = np.clip((j + s) * eps, j * eps, (j + 1) * eps)
        return float(t[0]) if scalar else t


@dataclass(frozen=True)
class RightInverse:
    """The measurable section ``g`` with ``f(g(x)) = x`` on the representable grid."""

    curve: object
    tie_rule: str = field(default="minimal-parameter", init=False)

    def __call__(self, x):
        return self.curve.right_inverse(x)


def build_hilbert(box, depth):
    return HilbertCurve(box if isinstance(box, Box) else Box(*box), int(depth))


def build_segmented(components, depth, unbounded=False):
    boxes = [b if isinstance(b, Box) else Box(*b) for b in components]
    return SegmentedCurve(tuple(HilbertCurve(b, int(depth)) for b in boxes), unbounded=unbounded)


def build_annular(epsilon, outer_radius, depth):
    return AnnularCurve(epsilon, outer_radius, int(depth))


def evaluate(curve, t):
    return curve.eval(t)


def right_inverse(curve, x):
    return curve.right_inverse(x)
