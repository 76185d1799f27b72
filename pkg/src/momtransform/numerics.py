"""Summation, polynomial and quadrature helpers shared by the other modules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError

#: arrays up to this size are summed with math.fsum (correctly rounded,
#: independent of order); larger ones use numpy's fixed pairwise reduction
EXACT_SUM_LIMIT = 1 << 20


def stable_sum(values):
    a = np.ascontiguousarray(np.asarray(values, dtype=float).reshape(-1))
    if a.size <= EXACT_SUM_LIMIT:
        return math.fsum(a)
    return float(np.add.reduce(a))


def exponents(n, degree):
    """Multi-indices of total degree <= ``degree`` in graded reverse-lex order.

    >>> exponents(2, 2).tolist()
    [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    """
    out = []
    for d in range(degree + 1):
        out.extend(_compositions(n, d))
    return np.array(out, dtype=np.int64).reshape(-1, n)


def _compositions(n, d):
    if n == 1:
        return [(d,)]
    res = []
    for first in range(d, -1, -1):
        res.extend((first,) + rest for rest in _compositions(n - 1, d - first))
    return res


def _points(x, n):
    pts = np.asarray(x, dtype=float)
    if pts.ndim <= 1:
        pts = pts.reshape(-1, n)
    return pts


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Real polynomial ``sum_j coeffs[j] * x**exponents[j]`` in ``n`` variables."""

    exponents: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        e = np.atleast_2d(np.asarray(self.exponents, dtype=np.int64))
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if e.shape[0] != c.size or np.any(e < 0):
            raise InputError("polynomial needs one non-negative exponent row per coefficient")
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, alpha, coeff=1.0):
        return cls(np.atleast_2d(alpha), [coeff])

    @classmethod
    def univariate(cls, coeffs):
        """From ascending coefficients ``c_0 + c_1 t + ...``."""
        c = np.asarray(coeffs, dtype=float)
        return cls(np.arange(c.size).reshape(-1, 1), c)

    @property
    def n(self):
        return self.exponents.shape[1]

    @property
    def degree(self):
        return int(self.exponents.sum(axis=1).max()) if self.coeffs.size else 0

    def __call__(self, x):
        pts = _points(x, self.n)
        out = np.zeros(pts.shape[0])
        for e, c in zip(self.exponents, self.coeffs):
            out = out + c * np.prod(pts ** e, axis=1)
        return out

    def to_dict(self):
        return {"exponents": self.exponents.tolist(), "coeffs": self.coeffs.tolist()}


def _norm(x):
    pts = np.asarray(x, dtype=float)
    return np.sqrt(np.sum(pts * pts, axis=-1)) if pts.ndim > 1 else np.abs(pts)


#: named integrands usable from configuration files
FUNCTIONS = {
    "one": lambda x: np.ones(np.atleast_2d(np.asarray(x, dtype=float)).shape[0]),
    "norm": lambda x: _norm(np.atleast_2d(np.asarray(x, dtype=float))),
    "norm_squared": lambda x: np.sum(np.atleast_2d(np.asarray(x, dtype=float)) ** 2, axis=1),
}


def resolve_function(handle):
    """Polynomials and callables pass through; strings are looked up in FUNCTIONS."""
    if isinstance(handle, Polynomial) or callable(handle):
        return handle
    if isinstance(handle, str):
        try:
            return FUNCTIONS[handle]
        except KeyError:
            raise InputError(f"unregistered function handle {handle!r}") from None
    raise InputError(f"cannot integrate object of type {type(handle).__name__}")


@lru_cache(maxsize=None)
def gauss_legendre_unit(order):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1) / 2, w / 2


def chebyshev_design(points, box_lo, box_hi, degree):
    """Tensor Chebyshev basis of total degree <= ``degree`` on a box."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lo, hi = np.asarray(box_lo, dtype=float), np.asarray(box_hi, dtype=float)
    z = np.clip(2 * (pts - lo) / (hi - lo) - 1, -1, 1)
    n = pts.shape[1]
    # T_k(z) per axis
    T = np.empty((degree + 1, pts.shape[0], n))
    T[0] = 1.0
    if degree >= 1:
        T[1] = z
    for k in range(2, degree + 1):
        T[k] = 2 * z * T[k - 1] - T[k - 2]
    alphas = exponents(n, degree)
    cols = [np.prod([T[a[i], :, i] for i in range(n)], axis=0) for a in alphas]
    return np.column_stack(cols), alphas
