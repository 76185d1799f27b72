"""Moment transport between a compact set and a parameter interval.

The forward direction pushes a measure ``mu`` on the curve target forward
through the right inverse ``g`` and records the moments ``L(g^d)`` of the
image on the parameter domain.  The backward direction pushes a measure on
the parameter domain through the curve ``f``.  On top of these sit the
round-trip pipeline (g-moments, Hausdorff certificate, reconstruction,
lift), the polynomial approximation of ``g``, the Lebesgue-direction
construction ``F_nu o g`` and the full-support reparametrization
``f o Q_nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .curves import AnnularCurve, Box, HilbertCurve, SegmentedCurve, build_annular
from .errors import (
    CompositionError,
    ConfigurationError,
    DomainError,
    InputError,
    PipelineError,
    PreconditionError,
    ReconstructionError,
)
from .hausdorff import (
    DEFAULT_RANK_TOL,
    DEFAULT_TOL_PSD,
    check_hausdorff,
    reconstruct,
    stieltjes_check,
)
from .measures import (
    _merge_atoms,
    GridDensity,
    Map,
    Measure,
    MomentSequence,
    as_map,
    curve_map,
    discretize,
    integrate,
    inverse_map,
    moments,
    pushforward,
)
from .numerics import chebyshev_design, stable_sum

#: parameters closer than this to a curve grid node (in grid steps) are snapped onto it;
#: every value of a right inverse is such a node, so any tolerance below 1/2 is safe
DEFAULT_SNAP_TOL = 0.25
#: exact rational arithmetic (telescoping check, pipeline g-moments) up to this many atoms
EXACT_CHECK_LIMIT = 10_000
#: default number of Lebesgue atoms when a full-resolution discretization is too large
MAX_LEBESGUE_ATOMS = 1 << 20


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def _table(ms):
    return {"exponents": ms.exponents.tolist(), "values": ms.values.tolist()}


@dataclass
class TransformReport:
    """Comparison of two moment tables over the same monomials.

    ``residuals[d]`` is the largest absolute difference among monomials of
    total degree ``d``; the verdict is ``pass`` iff all of them are
    ``<= tol``.
    """

    direction: str
    source: MomentSequence
    target: MomentSequence
    residuals: np.ndarray
    tol: float
    provenance: dict
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    @property
    def verdict(self):
        return "pass" if self.max_residual <= self.tol else "fail"

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "direction": self.direction,
            "verdict": self.verdict,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "residuals": self.residuals.tolist(),
            "source": _table(self.source),
            "target": _table(self.target),
            "provenance": self.provenance,
            "warnings": list(self.warnings),
            "details": self.details,
        }


def compare(direction, source, target, tol, provenance, warnings=(), details=None):
    if source.values.size != target.values.size or not np.array_equal(source.exponents, target.exponents):
        raise InputError("moment tables are over different monomials")
    diff = np.abs(source.values - target.values)
    deg = source.exponents.sum(axis=1)
    per_degree = np.array([diff[deg == d].max() for d in range(int(deg.max()) + 1)])
    return TransformReport(direction, source, target, per_degree, float(tol), provenance,
                           list(warnings), details or {})


def _curve_info(curve):
    info = {"kind": type(curve).__name__}
    if isinstance(curve, HilbertCurve):
        info.update(depth=curve.depth, n=curve.n, box={"lo": list(curve.box.lo), "hi": list(curve.box.hi)})
    elif isinstance(curve, SegmentedCurve):
        info.update(depth=curve.depth, n=curve.n, components=curve.k, unbounded=curve.unbounded)
    elif isinstance(curve, AnnularCurve):
        info.update(depth=curve.depth, epsilon=curve.epsilon, outer_radius=curve.outer_radius)
    return info


# --------------------------------------------------------------------------
# the image of mu on the parameter domain
# --------------------------------------------------------------------------

@dataclass
class ParameterAtoms:
    """Atoms ``(t_i, w_i)`` of the image measure on the parameter domain.

    ``sorted`` records whether ``t`` is non-decreasing; ``zero_cells``
    counts curve cells without mass (only for densities).
    """

    t: np.ndarray
    w: np.ndarray
    sorted: bool
    zero_cells: int = 0

    def measure(self):
        return Measure(self.t.reshape(-1, 1), self.w, validate=False)


def _same_box(a, b):
    return np.array_equal(a.lo_array, b.lo_array) and np.array_equal(np.asarray(a.hi, float), np.asarray(b.hi, float))


def curve_cell_masses(dens, curve):
    """Mass of ``dens`` inside every cell of a Hilbert curve, in curve order."""
    if dens.n != curve.n:
        raise InputError(f"density is {dens.n}-dimensional, curve target is {curve.n}-dimensional")
    vals = dens.values
    cell_vol = curve.box.volume / curve.n_cells
    if _same_box(dens.box, curve.box) and np.all(vals == vals.flat[0]):
        # uniform density: every curve cell carries the same mass
        return np.full(curve.n_cells, float(vals.flat[0]) * cell_vol)
    grid = vals
    for axis in range(curve.n):
        lo, w = curve.box.lo_array[axis], curve.box.width[axis]
        ce = lo + w * np.arange(curve.side + 1) / curve.side
        de = dens.edges(axis)
        overlap = np.minimum(ce[1:, None], de[None, 1:]) - np.maximum(ce[:-1, None], de[None, :-1])
        # tensordot consumes the leading density axis and appends a curve axis
        grid = np.tensordot(grid, np.clip(overlap, 0.0, None), axes=([0], [1]))
    coords = curve.cell_coords()
    return grid[tuple(coords[:, i] for i in range(curve.n))]


def _check_captured(dens, captured):
    total = dens.mass()
    if total - captured > 1e-12 * max(total, 1e-300):
        raise DomainError(f"density puts mass {total - captured:.3e} outside the curve target")


def _density_atoms(dens, curve):
    if isinstance(curve, HilbertCurve):
        masses = curve_cell_masses(dens, curve)
        _check_captured(dens, stable_sum(masses))
        return curve.center_parameters(), masses, True
    if isinstance(curve, SegmentedCurve):
        ts, ws = [], []
        for (a, _), comp in zip(curve.intervals, curve.components):
            ms = curve_cell_masses(dens, comp)
            ts.append(a + comp.center_parameters() * curve.length)
            ws.append(ms)
        masses = np.concatenate(ws)
        _check_captured(dens, stable_sum(masses))
        return np.concatenate(ts), masses, True
    pts = dens.cell_centers()
    masses = dens.cell_masses().reshape(-1)
    if not np.all(curve.contains(pts[masses > 0])):
        raise DomainError("density cells outside the curve target")
    return np.atleast_1d(curve.right_inverse(pts)), masses, False


def parameter_atoms(mu, curve):
    """Image of ``mu`` under the curve's right inverse, as parameter atoms.

    Atoms of ``mu`` map one by one.  A density is first aggregated over the
    curve cells (the right inverse is constant on each open cell), so each
    non-empty cell contributes one atom at its center parameter.
    """
    if mu.n != curve.n:
        raise InputError(f"measure is {mu.n}-dimensional, curve target is {curve.n}-dimensional")
    ts, ws = [], []
    is_sorted = True
    zero = 0
    if mu.n_atoms:
        if not np.all(curve.contains(mu.points)):
            raise DomainError("atoms outside the curve target")
        ts.append(np.atleast_1d(curve.right_inverse(mu.points)))
        ws.append(mu.weights)
        is_sorted = False
    parts = []
    if mu.density is not None:
        parts.append(mu.density)
    if mu.lebesgue > 0:
        parts.append(GridDensity(Box.unit(1), np.array([mu.lebesgue])))
    for dens in parts:
        t, w, ordered = _density_atoms(dens, curve)
        keep = w > 0
        zero += int((~keep).sum())
        ts.append(t[keep])
        ws.append(w[keep])
        is_sorted = is_sorted and ordered
    if len(ts) != 1:
        is_sorted = False
    if not ts:
        return ParameterAtoms(np.zeros(0), np.zeros(0), True, 0)
    return ParameterAtoms(np.concatenate(ts), np.concatenate(ws), is_sorted, zero)


def power_sums(t, w, d_max):
    """``[sum_i w_i t_i**d for d in 0..d_max]`` with deterministic summation."""
    out = np.empty(d_max + 1)
    acc = np.array(w, dtype=float)
    out[0] = stable_sum(acc)
    for d in range(1, d_max + 1):
        acc *= t
        out[d] = stable_sum(acc)
    return out


def exact_power_sums(t, w, d_max):
    """:func:`power_sums` in rational arithmetic on the given doubles.

    Coincident parameters are merged first, so the cost grows with the
    number of distinct ``t``.
    """
    merged = {}
    for ti, wi in zip(np.asarray(t, dtype=float).tolist(), np.asarray(w, dtype=float).tolist()):
        merged[ti] = merged.get(ti, Fraction(0)) + Fraction(wi)
    out = [Fraction(0)] * (d_max + 1)
    for ti, wi in merged.items():
        x, acc = Fraction(ti), wi
        for d in range(d_max + 1):
            out[d] += acc
            acc *= x
    return out


def transform_to_unit(mu, curve, d_max, order=8):
    """Moments ``(L(g^0), ..., L(g^d_max))`` of ``mu`` pushed through the right inverse.

    ``m_0`` is ``mu.total_mass()``, so the mass survives the transport exactly.

    Raises
    ------
    DomainError
        Some atom or density mass lies outside the curve target.
    """
    if d_max < 0:
        raise ConfigurationError("d_max must be >= 0")
    pa = parameter_atoms(mu, curve)
    vals = power_sums(pa.t, pa.w, d_max)
    vals[0] = mu.total_mass()
    return MomentSequence.univariate(vals)


# --------------------------------------------------------------------------
# backward direction
# --------------------------------------------------------------------------

def snap_parameters(curve, t, tol=DEFAULT_SNAP_TOL):
    """Move parameters within ``tol`` grid steps onto the curve's grid ``j/(2N)``.

    Returns the new parameters and a mask of the entries that moved.
    """
    t = np.asarray(t, dtype=float)
    if isinstance(curve, HilbertCurve):
        scale, offset, length = 2 * curve.n_cells, np.zeros_like(t), 1.0
    elif isinstance(curve, SegmentedCurve):
        which = curve._component_of_param(t)
        starts = np.array([a for a, _ in curve.intervals])
        offset = np.where(which >= 0, starts[np.maximum(which, 0)], 0.0)
        scale, length = 2 * curve.components[0].n_cells, curve.length
    else:
        return t, np.zeros(t.shape, dtype=bool)
    u = (t - offset) / length * scale
    r = np.rint(u)
    near = np.abs(u - r) <= tol
    snapped = np.where(near, offset + r / scale * length, t)
    return snapped, near & (snapped != t)


def lift_from_unit(mu_tilde, curve, d_max, snap_tol=None, order=8, merge=True):
    """Push a measure on the parameter domain forward through the curve.

    ``snap_tol`` (in grid steps) first moves atoms onto the curve grid;
    ``merge=False`` skips the coincident-image scan when only the moments
    are needed.

    Returns
    -------
    (Measure, MomentSequence)
        The image measure and its moments up to total degree ``d_max``.
    """
    if mu_tilde.n != 1:
        raise InputError("parameter measures are one-dimensional")
    if snap_tol is not None and mu_tilde.n_atoms:
        t, _ = snap_parameters(curve, mu_tilde.points[:, 0], snap_tol)
        pts, w = _merge_atoms(t.reshape(-1, 1), mu_tilde.weights)
        mu_tilde = Measure(pts, w, density=mu_tilde.density, lebesgue=mu_tilde.lebesgue)
    lifted = pushforward(mu_tilde, curve, merge=merge)
    return lifted, moments(lifted, d_max, order)


def _refit_weights(nodes, m):
    """Least-squares weights for fixed nodes against the moments ``m``."""
    V = nodes[None, :] ** np.arange(m.size)[:, None]
    w, *_ = np.linalg.lstsq(V, m, rcond=None)
    return w


def g_moment_pipeline(mu, curve, d_max, tol=1e-6, unit_degree=None, tol_psd=DEFAULT_TOL_PSD,
                      rank_tol=DEFAULT_RANK_TOL, snap_tol=DEFAULT_SNAP_TOL, order=8):
    """Round trip ``mu -> g-moments -> certificate -> representing measure -> lift``.

    For purely atomic ``mu`` the representing measure is reconstructed from
    the first ``unit_degree + 1`` g-moments (default ``2*d_max + 1``, enough
    for ``d_max + 1`` atoms) and its nodes are snapped onto the curve grid.
    For measures with an atomless part the truncated sequence does not
    determine the image measure, so the pipeline lifts the parameter image
    computed in the forward pass (the quadrature path); the residuals then
    measure the curve discretization.

    Raises
    ------
    PipelineError
        The g-moments are rejected by :func:`check_hausdorff`.
    """
    if isinstance(curve, AnnularCurve):
        raise ConfigurationError("the pipeline runs on curves with parameter domain inside [0, 1]")
    if unit_degree is None:
        unit_degree = 2 * d_max + 1
    gm = transform_to_unit(mu, curve, unit_degree, order)
    cert = check_hausdorff(gm, tol_psd)
    if not cert.accepted:
        raise PipelineError("g-moments rejected by the Hausdorff certificate", cert)
    details = {"certificate": cert.to_dict(), "g_moments": gm.values.tolist()}
    warnings = []
    if mu.is_atomless or mu.density is not None or mu.lebesgue > 0:
        path = "quadrature"
        mu_tilde = parameter_atoms(mu, curve).measure()
    else:
        path = "exact"
        exact = None
        if mu.n_atoms <= EXACT_CHECK_LIMIT:
            pa = parameter_atoms(mu, curve)
            exact = exact_power_sums(pa.t, pa.w, unit_degree)
        try:
            rec = reconstruct(gm, rank_tol=rank_tol, tol_psd=tol_psd, exact=exact)
        except ReconstructionError:
            if exact is None:
                raise
            # the exact rank can exceed what double precision resolves
            warnings.append("exact-rank rule failed validation; used the thresholded rank")
            exact = None
            rec = reconstruct(gm, rank_tol=rank_tol, tol_psd=tol_psd)
        details["exact_moments"] = exact is not None
        details["reconstruction"] = rec.to_dict()
        nodes, moved = snap_parameters(curve, rec.nodes, snap_tol)
        weights = rec.weights
        if np.any(moved):
            refit = _refit_weights(nodes, gm.values[: rec.matched_degree + 1])
            if np.all(refit > 0):
                weights = refit
        details["snapped_nodes"] = int(moved.sum())
        if np.unique(nodes).size < nodes.size:
            warnings.append("two reconstructed nodes snapped to the same grid point")
        mu_tilde = Measure(nodes.reshape(-1, 1), weights, validate=False)
    _, lifted = lift_from_unit(mu_tilde, curve, d_max, None, order, merge=False)
    ref = moments(mu, d_max, order)
    prov = {
        "curve": _curve_info(curve),
        "d_max": d_max,
        "unit_degree": unit_degree,
        "quadrature_order": order,
        "tol_psd": tol_psd,
        "rank_tol": rank_tol,
        "snap_tol": snap_tol,
        "path": path,
    }
    return compare("roundtrip", lifted, ref, tol, prov, warnings, details)


# --------------------------------------------------------------------------
# polynomial approximation of g
# --------------------------------------------------------------------------

@dataclass
class GEpsApprox:
    """Polynomial surrogate ``g_eps = min(p_eps^2, 1)`` of the right inverse.

    ``p_eps`` is stored in the tensor Chebyshev basis of the curve box
    (``alphas`` are the per-axis Chebyshev degrees).  ``achieved_l1`` is an
    upper bound on ``L(|g - g_eps|)``: the value is computed exactly and
    rounded upward whenever the sample count allows exact arithmetic.
    """

    coeffs: np.ndarray
    alphas: np.ndarray
    box_lo: np.ndarray
    box_hi: np.ndarray
    degree: int
    achieved_l1: float
    epsilon_target: float
    status: str
    telescoping: list
    exact_check: bool
    history: list

    def p_eps(self, x):
        design, _ = chebyshev_design(x, self.box_lo, self.box_hi, self.degree)
        return design @ self.coeffs

    def __call__(self, x):
        return np.minimum(self.p_eps(x) ** 2, 1.0)

    @property
    def passed(self):
        return self.status == "pass"

    @property
    def telescoping_holds(self):
        return all(row["holds"] for row in self.telescoping)

    def to_dict(self):
        return {
            "basis": "chebyshev",
            "box": {"lo": self.box_lo.tolist(), "hi": self.box_hi.tolist()},
            "alphas": self.alphas.tolist(),
            "coeffs": self.coeffs.tolist(),
            "degree": self.degree,
            "achieved_l1": self.achieved_l1,
            "epsilon_target": self.epsilon_target,
            "status": self.status,
            "exact_check": self.exact_check,
            "telescoping": self.telescoping,
            "history": self.history,
        }


def _fit_samples(mu, curve):
    """Points, weights and g-values representing ``mu`` for the fit."""
    pts, ws, gs = [], [], []
    if mu.n_atoms:
        if not np.all(curve.contains(mu.points)):
            raise DomainError("atoms outside the curve target")
        pts.append(mu.points)
        ws.append(mu.weights)
        gs.append(np.atleast_1d(curve.right_inverse(mu.points)))
    if not mu.is_atomless or mu.density is not None or mu.lebesgue > 0:
        atomless = Measure(np.zeros((0, mu.n)), np.zeros(0), density=mu.density, lebesgue=mu.lebesgue)
        if atomless.density is not None or atomless.lebesgue > 0:
            pa = parameter_atoms(atomless, curve)
            # g is constant on each open cell: sample it at the cell centers
            pts.append(curve.eval(pa.t).reshape(-1, mu.n))
            ws.append(pa.w)
            gs.append(pa.t)
    return np.concatenate(pts), np.concatenate(ws), np.concatenate(gs)


def _exact_l1(w, g, ge):
    return sum((Fraction(float(a)) * abs(Fraction(float(b)) - Fraction(float(c)))
                for a, b, c in zip(w, g, ge)), Fraction(0))


def _round_up(q):
    f = float(q)
    if Fraction(f) < q:
        f = math.nextafter(f, math.inf)
    return f


def _telescoping_exact(w, g, ge, bound, d_top):
    wf = [Fraction(float(a)) for a in w]
    gf = [Fraction(float(a)) for a in g]
    ef = [Fraction(float(a)) for a in ge]
    pg, pe = [Fraction(1)] * len(wf), [Fraction(1)] * len(wf)
    rows = []
    b = Fraction(bound)
    for d in range(d_top + 1):
        if d:
            pg = [p * x for p, x in zip(pg, gf)]
            pe = [p * x for p, x in zip(pe, ef)]
        lhs = abs(sum((wi * (a - c) for wi, a, c in zip(wf, pg, pe)), Fraction(0)))
        rows.append({"d": d, "lhs": float(lhs), "rhs": float(d * b), "holds": lhs <= d * b})
    return rows


def _telescoping_float(w, g, ge, bound, d_top):
    rows = []
    mass = stable_sum(w)
    for d in range(d_top + 1):
        lhs = abs(stable_sum(w * g ** d) - stable_sum(w * ge ** d))
        slack = 4 * (d + 1) * np.finfo(float).eps * mass
        rows.append({"d": d, "lhs": lhs, "rhs": d * bound, "holds": bool(lhs <= d * bound + slack)})
    return rows


def approximate_g(mu, curve, epsilon, max_degree, check_degree=None, exact_limit=EXACT_CHECK_LIMIT):
    """Fit ``g_eps = p_eps^2`` to the right inverse in ``L^2(mu)``.

    ``p_eps`` is the weighted least-squares fit of ``sqrt(g)`` over total
    degrees ``0, 1, ..., max_degree``; the first degree whose ``L^1(mu)``
    error is ``<= epsilon`` is kept, otherwise the best one with status
    ``budget_exceeded``.  ``g_eps`` is clamped to ``[0, 1]``, the range of
    ``g``, which is what makes ``|L(g^d) - L(g_eps^d)| <= d L(|g - g_eps|)``
    hold; the inequality is then checked for ``d <= check_degree`` (default
    ``2 * max_degree``).
    """
    if not epsilon > 0:
        raise ConfigurationError("epsilon must be positive")
    if max_degree < 0:
        raise ConfigurationError("max_degree must be >= 0")
    if isinstance(curve, AnnularCurve) or (isinstance(curve, SegmentedCurve) and curve.unbounded):
        raise ConfigurationError("approximate_g needs a curve with parameter domain inside [0, 1]")
    if check_degree is None:
        check_degree = 2 * max_degree
    x, w, g = _fit_samples(mu, curve)
    if isinstance(curve, HilbertCurve):
        lo, hi = curve.box.lo_array, np.asarray(curve.box.hi, dtype=float)
    else:
        lo = np.min([c.box.lo_array for c in curve.components], axis=0)
        hi = np.max([np.asarray(c.box.hi, dtype=float) for c in curve.components], axis=0)
    sw = np.sqrt(w)
    target = np.sqrt(g)
    exact = x.shape[0] <= exact_limit
    best = None
    history = []
    for deg in range(max_degree + 1):
        design, alphas = chebyshev_design(x, lo, hi, deg)
        coef, *_ = np.linalg.lstsq(design * sw[:, None], target * sw, rcond=None)
        ge = np.minimum((design @ coef) ** 2, 1.0)
        l1 = _round_up(_exact_l1(w, g, ge)) if exact else stable_sum(w * np.abs(g - ge))
        history.append({"degree": deg, "l1": l1})
        if best is None or l1 < best[0]:
            best = (l1, deg, coef, alphas, ge)
        if l1 <= epsilon:
            break
    l1, deg, coef, alphas, ge = best
    check = _telescoping_exact if exact else _telescoping_float
    rows = check(w, g, ge, l1, check_degree)
    return GEpsApprox(coef, alphas, lo, hi, deg, l1, float(epsilon),
                      "pass" if l1 <= epsilon else "budget_exceeded", rows, exact, history)


# --------------------------------------------------------------------------
# Lebesgue direction and full-support reparametrization
# --------------------------------------------------------------------------

def _require_atomless(mu, what):
    if mu.n_atoms:
        raise PreconditionError(f"{what} needs an atomless measure; got {mu.n_atoms} atom(s)")
    if not mu.total_mass() > 0:
        raise PreconditionError(f"{what} needs positive mass")


def _sorted_parameter_atoms(mu, curve):
    pa = parameter_atoms(mu, curve)
    if not pa.sorted:
        order = np.argsort(pa.t, kind="stable")
        pa = ParameterAtoms(pa.t[order], pa.w[order], True, pa.zero_cells)
    return pa


def lebesgue_direction(mu, curve, d_max, tol=1e-6):
    """``f = F_nu o g`` with ``nu`` the image of ``mu`` under the right inverse.

    ``F_nu`` is the normalized distribution function of ``nu``, so ``f``
    pushes ``mu`` (approximately, at finite depth) onto ``m_0`` times
    Lebesgue measure on [0, 1].  The report compares ``int f^d dmu`` with
    ``m_0/(d+1)``, where ``m_0`` is the summed cell mass.

    Returns
    -------
    (Map, TransformReport)
    """
    _require_atomless(mu, "lebesgue_direction")
    pa = _sorted_parameter_atoms(mu, curve)
    mass = stable_sum(pa.w)
    cdf = np.minimum(np.cumsum(pa.w) / mass, 1.0)
    # f is constant on each cell, so int f^d dmu is a finite sum
    source = power_sums(cdf, pa.w, d_max)
    target = mass / np.arange(1, d_max + 2)
    t_sorted = pa.t

    def f(x):
        t = np.atleast_1d(curve.right_inverse(x))
        idx = np.searchsorted(t_sorted, t, side="right") - 1
        return np.where(idx >= 0, cdf[np.maximum(idx, 0)], 0.0)

    fmap = Map(f, curve.n, 1, curve.contains, "lebesgue_direction", None)
    prov = {"curve": _curve_info(curve), "d_max": d_max, "reference_mass": mass}
    warnings = []
    if pa.zero_cells:
        warnings.append(f"{pa.zero_cells} curve cell(s) carry no mass")
    report = compare("forward", MomentSequence.univariate(source), MomentSequence.univariate(target),
                     tol, prov, warnings)
    return fmap, report


def full_support_curve(mu, curve, d_max, tol=1e-6, resolution=None, order=8):
    """``f_mu = f o Q_nu``: a parametrization pushing Lebesgue measure onto ``mu``.

    ``Q_nu`` is the left-continuous quantile of the parameter image ``nu``.
    The report compares the moments of ``m_0 * lambda`` discretized at
    ``resolution`` midpoints and pushed through ``f_mu`` against
    ``moments(mu, d_max)``.  Cells without mass are gaps of the support;
    they are reported as a warning since ``f_mu`` then jumps across them.
    """
    _require_atomless(mu, "full_support_curve")
    pa = _sorted_parameter_atoms(mu, curve)
    if resolution is None:
        resolution = getattr(curve, "n_cells", None) or MAX_LEBESGUE_ATOMS
        resolution = min(resolution, MAX_LEBESGUE_ATOMS)
    mass = stable_sum(pa.w)
    cdf = np.cumsum(pa.w) / mass
    cdf[-1] = 1.0
    t_sorted = pa.t

    def quantile(u):
        idx = np.searchsorted(cdf, u, side="left")
        return t_sorted[np.minimum(idx, t_sorted.size - 1)]

    def f_mu(u):
        return curve.eval(quantile(u[:, 0])).reshape(u.shape[0], -1)

    fmap = Map(f_mu, 1, curve.n, lambda u: (u[:, 0] >= 0) & (u[:, 0] <= 1), "full_support_curve",
               lambda m, seed: np.random.default_rng(seed).random((m, 1)))
    m0 = mu.total_mass()
    image = pushforward(Measure.lebesgue_unit(m0), fmap, resolution=resolution, merge=False)
    warnings = []
    if pa.zero_cells:
        warnings.append(f"support gap: {pa.zero_cells} curve cell(s) carry no mass; "
                        "the reparametrization jumps across them")
    prov = {"curve": _curve_info(curve), "d_max": d_max, "resolution": int(resolution),
            "quadrature_order": order}
    report = compare("backward", moments(image, d_max, order), moments(mu, d_max, order), tol, prov, warnings)
    return fmap, report


# --------------------------------------------------------------------------
# R^2 -> [0, inf)
# --------------------------------------------------------------------------

@dataclass
class RnReport:
    """Moments of ``mu`` pushed through the annular right inverse ``g_eps``."""

    moments: MomentSequence
    stieltjes: object
    lower: np.ndarray
    upper: np.ndarray
    atom_envelope_ok: bool
    epsilon: float
    outer_radius: float
    depth: int

    @property
    def bracket_ok(self):
        m = self.moments.values
        return bool(np.all((self.lower <= m) & (m <= self.upper)))

    @property
    def verdict(self):
        ok = self.stieltjes.accepted and self.bracket_ok and self.atom_envelope_ok
        return "pass" if ok else "fail"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "moments": self.moments.values.tolist(),
            "stieltjes": self.stieltjes.to_dict(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "bracket_ok": self.bracket_ok,
            "atom_envelope_ok": self.atom_envelope_ok,
            "epsilon": self.epsilon,
            "outer_radius": self.outer_radius,
            "depth": self.depth,
        }


def rn_transform(mu, epsilon, d_max, outer_radius=None, depth=8, tol_psd=DEFAULT_TOL_PSD):
    """Transport a planar measure to ``[0, R]`` along the annular curve.

    Densities are represented by their cell-center atoms.  Besides the
    Stieltjes verdict the report brackets each moment between
    ``L((|x| - eps)_+^d)`` and ``L((|x| + eps)^d)``.

    Raises
    ------
    InputError
        ``mu`` is not planar or has mass beyond ``outer_radius``.
    """
    if mu.n != 2:
        raise InputError("rn_transform takes measures on R^2")
    pts, w = discretize(mu)
    r = np.hypot(pts[:, 0], pts[:, 1])
    if outer_radius is None:
        outer_radius = epsilon * max(1, math.ceil(float(r.max(initial=0.0)) / epsilon))
    curve = build_annular(epsilon, outer_radius, depth)
    if not np.all(curve.contains(pts)):
        raise InputError(f"support reaches beyond the outer radius {outer_radius}")
    t = np.atleast_1d(curve.right_inverse(pts))
    vals = power_sums(t, w, d_max)
    lower = power_sums(np.maximum(r - epsilon, 0.0), w, d_max)
    upper = power_sums(r + epsilon, w, d_max)
    env = bool(np.all((r - epsilon <= t) & (t <= r + epsilon)))
    ms = MomentSequence.univariate(vals)
    return RnReport(ms, stieltjes_check(ms, tol_psd), lower, upper, env, float(epsilon),
                    float(outer_radius), int(depth))


# --------------------------------------------------------------------------
# composition
# --------------------------------------------------------------------------

def compose(outer, inner, samples=256, seed=0):
    """``outer o inner`` with the inner image checked against the outer domain.

    The check runs on ``samples`` points drawn from the inner domain when
    the inner map can sample it; evaluation also fails with
    :class:`CompositionError` whenever an image leaves the outer domain.
    """
    g = inner if isinstance(inner, Map) else as_map(inner)
    h = outer if isinstance(outer, Map) else as_map(outer, g.n_out)
    if g.n_out != h.n_in:
        raise CompositionError(f"inner map lands in R^{g.n_out}, outer map expects R^{h.n_in}")
    if g.sampler is not None and samples:
        probe = g(g.sample(samples, seed))
        bad = ~h.contains(probe)
        if np.any(bad):
            raise CompositionError(f"{int(bad.sum())} of {samples} sampled images leave the outer domain")

    def fn(x):
        y = g(x)
        if not np.all(h.contains(y)):
            raise CompositionError(f"image of {g.name} leaves the domain of {h.name}")
        return h(y)

    return Map(fn, g.n_in, h.n_out, g.domain, f"{h.name} o {g.name}", g.sampler)


def jankoff_identity(curve):
    """``f o g`` on the curve target."""
    return compose(curve_map(curve), inverse_map(curve))
