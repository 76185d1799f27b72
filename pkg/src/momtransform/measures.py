"""Finite non-negative measures: integration, pushforward, moments, normal forms.

A :class:`Measure` is the sum of up to three parts: finitely many weighted
atoms, a piecewise-constant density on a uniform grid over a box, and a
multiple of Lebesgue measure on ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import AnnularCurve, Box, HilbertCurve, RightInverse, SegmentedCurve
from .errors import DomainError, InputError
from .numerics import Polynomial, exponents, gauss_legendre_unit, resolve_function, stable_sum

CURVE_TYPES = (HilbertCurve, SegmentedCurve, AnnularCurve)

#: atoms used to discretize Lebesgue measure when a map has no natural grid
DEFAULT_LEBESGUE_RESOLUTION = 1 << 12


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density (mass per unit volume) constant on each cell of a uniform grid."""

    box: Box
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != self.box.n:
            raise InputError(f"density values must have {self.box.n} axes, got shape {vals.shape}")
        if vals.size == 0 or np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise InputError("density values must be finite and non-negative")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return self.box.n

    @property
    def shape(self):
        return self.values.shape

    @property
    def cell_width(self):
        return self.box.width / np.array(self.shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.cell_width))

    def edges(self, axis):
        return np.linspace(self.box.lo[axis], self.box.hi[axis], self.shape[axis] + 1)

    def cell_masses(self):
        return self.values * self.cell_volume

    def cell_centers(self):
        """Centers in C order, shape (cells, n)."""
        axes = [(e[:-1] + e[1:]) / 2 for e in (self.edges(i) for i in range(self.n))]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.reshape(-1) for m in mesh])

    def mass(self):
        return stable_sum(self.cell_masses())


@dataclass(frozen=True, eq=False)
class Measure:
    """Atoms + grid density + ``lebesgue * lambda`` on [0, 1].

    Build instances with :meth:`atomic`, :meth:`grid_density`,
    :meth:`lebesgue_unit` or :meth:`mixture`.
    """

    points: np.ndarray
    weights: np.ndarray
    density: GridDensity | None = None
    lebesgue: float = 0.0
    validate: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.ndim == 1:
            pts = pts.reshape(w.size, -1) if w.size else pts.reshape(0, self._infer_n())
        if pts.shape[0] != w.size:
            raise InputError("points and weights differ in length")
        if self.validate:
            if np.any(~np.isfinite(w)) or np.any(w <= 0):
                raise InputError("atom weights must be finite and positive")
            if np.any(~np.isfinite(pts)):
                raise InputError("atom points must be finite")
            if w.size > 1 and np.unique(pts, axis=0).shape[0] != w.size:
                raise InputError("atom points must be pairwise distinct")
            if not (math.isfinite(self.lebesgue) and self.lebesgue >= 0):
                raise InputError("Lebesgue coefficient must be finite and >= 0")
        dims = {pts.shape[1]} if w.size else set()
        if self.density is not None:
            dims.add(self.density.n)
        if self.lebesgue > 0:
            dims.add(1)
        if len(dims) > 1:
            raise InputError(f"measure parts disagree on dimension: {sorted(dims)}")
        for arr in (pts, w):
            arr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "lebesgue", float(self.lebesgue))

    def _infer_n(self):
        if self.density is not None:
            return self.density.n
        return 1

    # constructors ----------------------------------------------------------

    @classmethod
    def atomic(cls, points, weights, n=None):
        w = np.asarray(weights, dtype=float).reshape(-1)
        pts = np.asarray(points, dtype=float)
        if pts.ndim <= 1:
            pts = pts.reshape(w.size, -1) if n is None else pts.reshape(-1, n)
        return cls(pts, w)

    @classmethod
    def grid_density(cls, box, values):
        box = box if isinstance(box, Box) else Box(*box)
        return cls(np.zeros((0, box.n)), np.zeros(0), density=GridDensity(box, values))

    @classmethod
    def lebesgue_unit(cls, c=1.0):
        return cls(np.zeros((0, 1)), np.zeros(0), lebesgue=c)

    @classmethod
    def mixture(cls, c, points, weights):
        w = np.asarray(weights, dtype=float).reshape(-1)
        return cls(np.asarray(points, dtype=float).reshape(w.size, 1), w, lebesgue=c)

    @classmethod
    def zero(cls, n=1):
        return cls(np.zeros((0, n)), np.zeros(0))

    # structure -------------------------------------------------------------

    @property
    def n(self):
        if self.weights.size:
            return self.points.shape[1]
        return self._infer_n()

    @property
    def kind(self):
        parts = [self.weights.size > 0, self.density is not None, self.lebesgue > 0]
        if sum(parts) > 1:
            return "mixture"
        if self.density is not None:
            return "grid_density"
        if self.lebesgue > 0:
            return "lebesgue_unit"
        return "atomic"

    @property
    def n_atoms(self):
        return int(self.weights.size)

    @property
    def is_atomless(self):
        return self.weights.size == 0

    def total_mass(self):
        """Correctly rounded sum of atom weights, cell masses and the Lebesgue part."""
        parts = [self.weights]
        if self.density is not None:
            parts.append(self.density.cell_masses().reshape(-1))
        parts.append([self.lebesgue])
        return stable_sum(np.concatenate([np.asarray(p, dtype=float) for p in parts]))

    def __repr__(self):
        return (f"Measure(kind={self.kind!r}, n={self.n}, atoms={self.n_atoms}, "
                f"density={None if self.density is None else self.density.shape}, "
                f"lebesgue={self.lebesgue})")


ONE = Polynomial.monomial([0])


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Moments against the monomials listed in ``exponents`` (graded order)."""

    values: np.ndarray
    exponents: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        e = np.asarray(self.exponents, dtype=np.int64)
        if e.ndim == 1:
            e = e.reshape(-1, 1)
        if e.shape[0] != v.size:
            raise InputError("moment values and exponents differ in length")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "exponents", e)

    @classmethod
    def univariate(cls, values):
        v = np.asarray(values, dtype=float).reshape(-1)
        if v.size == 0:
            raise InputError("moment sequence needs at least m_0")
        return cls(v, np.arange(v.size).reshape(-1, 1))

    @property
    def n(self):
        return self.exponents.shape[1]

    @property
    def degree(self):
        return int(self.exponents.sum(axis=1).max())

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------

def _eval(func, pts):
    vals = np.asarray(func(pts), dtype=float).reshape(-1)
    if vals.size != pts.shape[0]:
        raise InputError("integrand must return one value per point")
    return vals


def _density_integral(dens, func, order):
    nodes, w = gauss_legendre_unit(order)
    per_axis_x, per_axis_w = [], []
    for i in range(dens.n):
        e = dens.edges(i)
        h = e[1:] - e[:-1]
        per_axis_x.append((e[:-1, None] + h[:, None] * nodes[None, :]).reshape(-1))
        per_axis_w.append(np.tile(w, dens.shape[i]))
    mesh = np.meshgrid(*per_axis_x, indexing="ij")
    pts = np.column_stack([m.reshape(-1) for m in mesh])
    wmesh = np.meshgrid(*per_axis_w, indexing="ij")
    qw = np.prod([m.reshape(-1) for m in wmesh], axis=0)
    # cell value repeated over its order**n nodes
    vals = dens.values
    for axis in range(dens.n):
        vals = np.repeat(vals, order, axis=axis)
    weights = vals.reshape(-1) * qw * dens.cell_volume
    keep = weights > 0
    return stable_sum(weights[keep] * _eval(func, pts[keep]))


def _lebesgue_integral(func, order, panels=64):
    if isinstance(func, Polynomial):
        if func.n != 1:
            raise InputError("Lebesgue part lives on [0, 1]; integrand must be univariate")
        return stable_sum(func.coeffs / (func.exponents[:, 0] + 1.0))
    nodes, w = gauss_legendre_unit(order)
    x = ((np.arange(panels)[:, None] + nodes[None, :]) / panels).reshape(-1, 1)
    return stable_sum(np.tile(w, panels) / panels * _eval(func, x))


def atomless_integral(mu, func, order=8):
    parts = []
    if mu.density is not None:
        parts.append(_density_integral(mu.density, func, order))
    if mu.lebesgue > 0:
        parts.append(mu.lebesgue * _lebesgue_integral(func, order))
    return stable_sum(parts)


def integrate(mu, p, order=8):
    """Integral of a polynomial or registered function against ``mu``.

    Atoms are summed exactly; density cells use tensor Gauss-Legendre rules
    of ``order`` nodes per axis (exact up to degree ``2*order - 1``).
    """
    func = resolve_function(p)
    terms = []
    if not mu.is_atomless:
        terms.append(mu.weights * _eval(func, mu.points))
    if mu.density is not None or mu.lebesgue > 0:
        terms.append([atomless_integral(mu, func, order)])
    if not terms:
        return 0.0
    return stable_sum(np.concatenate([np.asarray(t, dtype=float) for t in terms]))


def moments(mu, max_degree, order=8):
    """Moments of ``mu`` against all monomials of total degree <= ``max_degree``."""
    if max_degree < 0:
        raise InputError("max_degree must be >= 0")
    alphas = exponents(mu.n, max_degree)
    vals = [integrate(mu, Polynomial.monomial(a), order) for a in alphas]
    # the zero multi-index comes first; pin it to the mass so m_0 is exact
    vals[0] = mu.total_mass()
    return MomentSequence(np.array(vals), alphas)


# --------------------------------------------------------------------------
# maps and pushforward
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Map:
    """A vectorized map ``(m, n_in) -> (m, n_out)`` with an optional domain test."""

    fn: object
    n_in: int
    n_out: int
    domain: object = None
    name: str = "map"
    sampler: object = None

    def __call__(self, x):
        pts = np.asarray(x, dtype=float).reshape(-1, self.n_in)
        if self.domain is not None and pts.shape[0]:
            ok = np.asarray(self.domain(pts), dtype=bool)
            if not np.all(ok):
                raise DomainError(f"{self.name}: {int((~ok).sum())} point(s) outside the domain")
        return np.asarray(self.fn(pts), dtype=float).reshape(pts.shape[0], self.n_out)

    def contains(self, x):
        pts = np.asarray(x, dtype=float).reshape(-1, self.n_in)
        if self.domain is None:
            return np.ones(pts.shape[0], dtype=bool)
        return np.asarray(self.domain(pts), dtype=bool)

    def sample(self, m, seed=0):
        if self.sampler is None:
            raise InputError(f"{self.name} has no domain sampler")
        return self.sampler(m, seed)


def _param_domain_test(curve):
    lo, hi = curve.domain

    def inside(t):
        t = t[:, 0]
        ok = (t >= lo) & (t <= hi)
        if isinstance(curve, SegmentedCurve):
            ok &= curve._component_of_param(t) >= 0
        return ok
    return inside


def _param_sampler(curve):
    def sample(m, seed):
        t = np.random.default_rng(seed).uniform(*curve.domain, m)
        if isinstance(curve, SegmentedCurve):
            a = np.array([iv[0] for iv in curve.intervals])
            which = np.random.default_rng(seed + 1).integers(0, curve.k, m)
            t = a[which] + np.random.default_rng(seed).random(m) * curve.length
        return t.reshape(-1, 1)
    return sample


def _target_sampler(curve):
    def sample(m, seed):
        return curve.eval(_param_sampler(curve)(m, seed)[:, 0])
    return sample


def curve_map(curve):
    """The curve ``f`` as a :class:`Map` on its parameter domain."""
    return Map(lambda t: curve.eval(t[:, 0]), 1, curve.n, _param_domain_test(curve),
               f"{type(curve).__name__}.eval", _param_sampler(curve))


def inverse_map(curve):
    """The right inverse ``g`` as a :class:`Map` on the curve target."""
    return Map(lambda x: np.atleast_1d(curve.right_inverse(x)).reshape(-1, 1), curve.n, 1,
               curve.contains, f"{type(curve).__name__}.right_inverse", _target_sampler(curve))


def identity_map(n):
    return Map(lambda x: x, n, n, None, "identity")


#: maps addressable by name from configuration files
MAPS = {
    "identity1": identity_map(1),
    "identity2": identity_map(2),
    "norm2": Map(lambda x: np.hypot(x[:, 0], x[:, 1]), 2, 1, None, "norm2"),
}


def as_map(m, n_in=None):
    if isinstance(m, Map):
        return m
    if isinstance(m, RightInverse):
        return inverse_map(m.curve)
    if isinstance(m, CURVE_TYPES):
        return curve_map(m)
    if isinstance(m, str):
        try:
            return MAPS[m]
        except KeyError:
            raise InputError(f"unregistered map handle {m!r}") from None
    if callable(m):
        if n_in is None:
            raise InputError("plain callables need the input dimension")
        probe = np.asarray(m(np.zeros((1, n_in))), dtype=float)
        return Map(m, n_in, int(probe.reshape(1, -1).shape[1]), None, getattr(m, "__name__", "map"))
    raise InputError(f"cannot use {type(m).__name__} as a map")


def _merge_atoms(points, weights):
    """Sum weights of coincident points, keeping first-occurrence order."""
    if points.shape[0] <= 1:
        return points, weights
    uniq, first, inverse = np.unique(points, axis=0, return_index=True, return_inverse=True)
    if uniq.shape[0] == points.shape[0]:
        return points, weights
    inverse = inverse.reshape(-1)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    group = rank[inverse]
    merged = np.array([stable_sum(weights[group == gi]) for gi in range(order.size)])
    return points[first[order]], merged


def discretize(mu, resolution=None):
    """Atomic surrogate of ``mu``: density cells and Lebesgue panels become center atoms."""
    pts = [mu.points]
    w = [mu.weights]
    if mu.density is not None:
        masses = mu.density.cell_masses().reshape(-1)
        keep = masses > 0
        pts.append(mu.density.cell_centers()[keep])
        w.append(masses[keep])
    if mu.lebesgue > 0:
        m = resolution or DEFAULT_LEBESGUE_RESOLUTION
        pts.append(((np.arange(m) + 0.5) / m).reshape(-1, 1))
        w.append(np.full(m, mu.lebesgue / m))
    return np.concatenate(pts), np.concatenate(w)


def pushforward(mu, mapping, resolution=None, merge=True):
    """Image measure ``mu o map^{-1}`` as an atomic measure.

    Atoms map one by one (coincident images merge); density cells and the
    Lebesgue part are first replaced by atoms at cell centers.  ``merge=False``
    skips the coincidence scan for callers that only integrate the result.  When the map
    is a Hilbert-type curve the Lebesgue part is sampled at its cell-center
    parameters unless ``resolution`` says otherwise.
    """
    m = as_map(mapping, mu.n)
    if resolution is None and isinstance(mapping, HilbertCurve):
        resolution = mapping.n_cells
    pts, w = discretize(mu, resolution)
    if pts.shape[0] == 0:
        return Measure.zero(m.n_out)
    images = m(pts)
    if merge:
        images, w = _merge_atoms(images, w)
    return Measure(images, w, validate=False)


# --------------------------------------------------------------------------
# atoms, normal form, distribution functions
# --------------------------------------------------------------------------

def decompose_atoms(mu):
    """Split ``mu`` into its atomless part and its atomic part."""
    atomless = Measure(np.zeros((0, mu.n)), np.zeros(0), density=mu.density, lebesgue=mu.lebesgue)
    atoms = Measure(mu.points, mu.weights, validate=False)
    return atomless, atoms


def lebesgue_rohlin_normal_form(mu):
    """``c * lambda + sum_i c_i * delta_{1/i}`` on [0, 1] with the masses of ``mu``.

    ``c`` is the atomless mass; atoms are placed at ``1, 1/2, 1/3, ...`` in
    order of decreasing weight (ties broken by lexicographic point order).
    """
    if mu.total_mass() <= 0:
        raise InputError("normal form needs positive total mass")
    atomless, atoms = decompose_atoms(mu)
    c = atomless.total_mass()
    if atoms.n_atoms:
        keys = [atoms.points[:, i] for i in range(atoms.n - 1, -1, -1)] + [-atoms.weights]
        order = np.lexsort(keys)
        w = atoms.weights[order]
        pos = 1.0 / np.arange(1, w.size + 1)
    else:
        w, pos = np.zeros(0), np.zeros(0)
    return Measure(pos.reshape(-1, 1), w, lebesgue=c)


class UnitCDF:
    """Distribution function and left-continuous quantile of a measure on [0, 1]."""

    def __init__(self, nu):
        if nu.n != 1:
            raise InputError("distribution functions need a one-dimensional measure")
        if nu.n_atoms and (nu.points.min() < 0 or nu.points.max() > 1):
            raise InputError("atoms must lie in [0, 1]")
        knots = [np.array([0.0, 1.0])]
        if nu.density is not None:
            if nu.density.box.lo[0] < 0 or nu.density.box.hi[0] > 1:
                raise InputError("density must be supported in [0, 1]")
            edges = nu.density.edges(0)
            knots.append(edges)
        atoms_x = nu.points[:, 0]
        order = np.argsort(atoms_x, kind="stable")
        atoms_x, atoms_w = atoms_x[order], nu.weights[order]
        b = np.unique(np.concatenate(knots + [atoms_x]))
        cont = np.zeros_like(b)
        if nu.lebesgue > 0:
            cont += nu.lebesgue * b
        if nu.density is not None:
            cum = np.concatenate([[0.0], np.cumsum(nu.density.cell_masses().reshape(-1))])
            cont += np.interp(b, edges, cum, left=0.0, right=cum[-1])
        cum_atoms = np.concatenate([[0.0], np.cumsum(atoms_w)])
        left = cum_atoms[np.searchsorted(atoms_x, b, side="left")]
        right = cum_atoms[np.searchsorted(atoms_x, b, side="right")]
        total = nu.total_mass()
        if not total > 0:
            raise InputError("distribution function of a zero measure")
        self.knots = b
        self.F_left = (cont + left) / total
        self.F_right = np.minimum((cont + right) / total, 1.0)
        self.F_right[-1] = 1.0
        self._cont = cont / total
        self._atoms_x = atoms_x
        self._cum_atoms = cum_atoms / total

    def F(self, t):
        t = np.asarray(t, dtype=float)
        cont = np.interp(t, self.knots, self._cont)
        atoms = self._cum_atoms[np.searchsorted(self._atoms_x, t, side="right")]
        return np.minimum(cont + atoms, 1.0)

    def Q(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise InputError("quantile levels must lie in [0, 1]")
        uu = np.maximum(u, np.finfo(float).tiny)
        k = np.minimum(np.searchsorted(self.F_right, uu, side="left"), self.knots.size - 1)
        km = np.maximum(k - 1, 0)
        lo_F, hi_F = self.F_right[km], self.F_left[k]
        on_ramp = (k > 0) & (uu <= hi_F)
        span = np.where(on_ramp, hi_F - lo_F, 1.0)
        ramp = self.knots[km] + (u - lo_F) / span * (self.knots[k] - self.knots[km])
        return np.where(on_ramp, np.minimum(ramp, self.knots[k]), self.knots[k])


def cdf_and_quantile(nu):
    """``(F, Q)``: normalized distribution function and its generalized inverse."""
    cdf = UnitCDF(nu)
    return cdf.F, cdf.Q
