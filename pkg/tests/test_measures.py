import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momtransform.curves import Box, HilbertCurve
from momtransform.errors import DomainError, InputError
from momtransform.measures import (
    Map,
    Measure,
    MomentSequence,
    cdf_and_quantile,
    decompose_atoms,
    integrate,
    inverse_map,
    lebesgue_rohlin_normal_form,
    moments,
    pushforward,
)
from momtransform.numerics import Polynomial, exponents


def random_poly(rng, n, degree):
    e = exponents(n, degree)
    return Polynomial(e, rng.normal(size=e.shape[0]))


# -- construction ---------------------------------------------------------------

def test_invalid_measures_are_rejected():
    with pytest.raises(InputError):
        Measure.atomic([[0.1], [0.2]], [1.0, -1.0])
    with pytest.raises(InputError):
        Measure.atomic([[0.1], [0.1]], [1.0, 1.0])
    with pytest.raises(InputError):
        Measure.grid_density(Box.unit(2), [[1.0, -0.5]])
    with pytest.raises(InputError):
        Measure.lebesgue_unit(-1.0)


def test_kinds_and_masses():
    assert Measure.atomic([[0.2, 0.3]], [2.0]).total_mass() == 2.0
    assert Measure.lebesgue_unit(0.5).is_atomless
    mix = Measure.mixture(0.25, [[1.0]], [0.75])
    assert mix.total_mass() == 1.0
    assert mix.n_atoms == 1


# -- integrate ------------------------------------------------------------------

@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (2, 3), (5, 7)])
def test_uniform_square_monomials(a, b):
    mu = Measure.grid_density(Box.unit(2), np.ones((4, 4)))
    val = integrate(mu, Polynomial.monomial([a, b]))
    assert val == pytest.approx(1.0 / ((a + 1) * (b + 1)), rel=1e-14)


def test_weighted_atom_product():
    mu = Measure.atomic([[0.3, 0.7]], [2.0])
    assert integrate(mu, Polynomial.monomial([1, 1])) == pytest.approx(0.42, abs=1e-16)


def test_registered_and_unregistered_handles():
    mu = Measure.atomic([[3.0, 4.0]], [1.0])
    assert integrate(mu, "norm") == 5.0
    with pytest.raises(InputError):
        integrate(mu, "no-such-function")


# -- moments --------------------------------------------------------------------

def test_lebesgue_moments():
    m = moments(Measure.lebesgue_unit(), 4)
    assert np.allclose(m.values, [1, 1 / 2, 1 / 3, 1 / 4, 1 / 5], rtol=0, atol=1e-15)


def test_unit_atom_moments():
    assert np.array_equal(moments(Measure.atomic([[1.0]], [1.0]), 3).values, [1, 1, 1, 1])


def test_mixture_moments():
    m = moments(Measure.mixture(0.5, [[1.0]], [0.5]), 2).values
    assert np.allclose(m, [1.0, 0.75, 0.5 / 3 + 0.5], rtol=0, atol=1e-15)


def test_moment_sequence_layout():
    ms = moments(Measure.grid_density(Box.unit(2), np.ones((2, 2))), 3)
    assert ms.n == 2 and ms.degree == 3
    assert len(ms) == 10
    assert ms.values[0] == 1.0
    with pytest.raises(InputError):
        moments(Measure.lebesgue_unit(), -1)


def test_moment_sequence_univariate():
    ms = MomentSequence.univariate([1.0, 0.5])
    assert ms.n == 1 and ms.degree == 1


# -- pushforward ----------------------------------------------------------------

def test_pushforward_of_dirac():
    c = HilbertCurve(Box.unit(2), 6)
    x = c.cell_centers([17])[0]
    img = pushforward(Measure.atomic([x], [1.5]), inverse_map(c))
    assert img.n_atoms == 1
    assert img.points[0, 0] == c.right_inverse(x)
    assert img.weights[0] == 1.5


def test_pushforward_merges_and_conserves_mass(rng):
    pts = rng.random((200, 2))
    w = rng.random(200)
    mu = Measure.atomic(pts, w)
    img = pushforward(mu, "norm2")
    assert img.total_mass() == mu.total_mass()
    coarse = pushforward(mu, Map(lambda x: np.floor(4 * x[:, :1]), 2, 1))
    assert coarse.n_atoms <= 4
    assert coarse.total_mass() == pytest.approx(mu.total_mass(), rel=1e-15)


def test_pushforward_outside_domain_raises():
    c = HilbertCurve(Box.unit(2), 4)
    with pytest.raises(DomainError):
        pushforward(Measure.atomic([[2.0, 0.5]], [1.0]), inverse_map(c))


def test_change_of_variables_atomic_bit_exact(rng):
    c = HilbertCurve(Box.unit(2), 10)
    g = inverse_map(c)
    mu = Measure.atomic(rng.random((30, 2)), rng.random(30) + 0.1)
    nu = pushforward(mu, g)
    assert nu.n_atoms == 30
    for _ in range(50):
        p = random_poly(rng, 1, 6)
        lhs = integrate(mu, lambda x, p=p: p(g(x)))
        assert lhs == integrate(nu, p)


def test_change_of_variables_density(rng):
    # density on the curve's own grid: g is constant on each open cell, so the
    # quadrature nodes and the cell-centre atoms see the same values
    c = HilbertCurve(Box.unit(2), 5)
    g = inverse_map(c)
    mu = Measure.grid_density(Box.unit(2), rng.random((c.side, c.side)))
    nu = pushforward(mu, g)
    for _ in range(50):
        p = random_poly(rng, 1, 6)
        lhs = integrate(mu, lambda x, p=p: p(g(x)), order=8)
        assert abs(lhs - integrate(nu, p)) <= 1e-8


# -- atoms and normal form ------------------------------------------------------

def test_decompose_variants():
    atomic = Measure.atomic([[0.1], [0.9]], [1.0, 2.0])
    free, atoms = decompose_atoms(atomic)
    assert free.total_mass() == 0 and atoms.n_atoms == 2
    leb = Measure.lebesgue_unit()
    free, atoms = decompose_atoms(leb)
    assert free.lebesgue == 1.0 and atoms.n_atoms == 0
    mix = Measure.mixture(0.4, [[0.2], [0.5]], [0.35, 0.25])
    free, atoms = decompose_atoms(mix)
    assert free.total_mass() + atoms.total_mass() == mix.total_mass()


def test_normal_form_examples():
    nf = lebesgue_rohlin_normal_form(Measure.atomic([[0.3, 0.9]], [1.0]))
    assert np.array_equal(nf.points, [[1.0]]) and nf.lebesgue == 0
    nf = lebesgue_rohlin_normal_form(Measure.grid_density(Box.unit(2), np.ones((3, 3))))
    assert nf.n_atoms == 0 and nf.lebesgue == pytest.approx(1.0, rel=1e-15)
    nf = lebesgue_rohlin_normal_form(Measure.atomic([[0.0], [1.0]], [0.25, 0.75]))
    assert np.array_equal(nf.points[:, 0], [1.0, 0.5])
    assert np.array_equal(nf.weights, [0.75, 0.25])


def test_normal_form_ties_use_point_order():
    nf = lebesgue_rohlin_normal_form(Measure.atomic([[0.9, 0.0], [0.1, 0.5]], [1.0, 1.0]))
    assert np.array_equal(nf.weights, [1.0, 1.0])
    nf2 = lebesgue_rohlin_normal_form(Measure.atomic([[0.1, 0.5], [0.9, 0.0]], [1.0, 1.0]))
    assert np.array_equal(nf.points, nf2.points)


def test_normal_form_zero_measure():
    with pytest.raises(InputError):
        lebesgue_rohlin_normal_form(Measure.zero(2))


@given(st.lists(st.floats(0.01, 5.0), min_size=0, max_size=12), st.floats(0.0, 3.0))
def test_normal_form_moments_closed_form(weights, c):
    if not weights and c == 0:
        return
    pts = np.arange(len(weights), dtype=float).reshape(-1, 1) / 7
    mu = Measure.mixture(c, pts, weights) if weights else Measure.lebesgue_unit(c)
    nf = lebesgue_rohlin_normal_form(mu)
    assert nf.total_mass() == mu.total_mass() or math.isclose(nf.total_mass(), mu.total_mass(), rel_tol=1e-15)
    w = sorted(weights, reverse=True)
    got = moments(nf, 10).values
    for d in range(11):
        ref = math.fsum([c / (d + 1)] + [wi * (i + 1) ** -d for i, wi in enumerate(w)])
        assert abs(got[d] - ref) <= 1e-12 * max(1.0, ref)


# -- distribution functions -----------------------------------------------------

def test_cdf_of_lebesgue_is_identity():
    F, Q = cdf_and_quantile(Measure.lebesgue_unit())
    u = np.linspace(0, 1, 101)
    assert np.allclose(F(u), u, atol=1e-15)
    assert np.allclose(Q(u), u, atol=1e-15)
    assert Q(0.0) == 0.0


def test_cdf_of_dirac():
    F, Q = cdf_and_quantile(Measure.atomic([[0.5]], [3.0]))
    assert F(0.49) == 0.0 and F(0.5) == 1.0
    assert np.all(Q(np.linspace(0.01, 1, 50)) == 0.5)


def test_cdf_of_mixture():
    F, Q = cdf_and_quantile(Measure.mixture(0.5, [[1.0]], [0.5]))
    assert F(0.5) == pytest.approx(0.25)
    assert F(np.nextafter(1.0, 0)) == pytest.approx(0.5)
    assert F(1.0) == 1.0
    assert Q(0.75) == 1.0
    assert Q(0.25) == pytest.approx(0.5)


def test_cdf_and_quantile_are_monotone(rng):
    mu = Measure(rng.random((5, 1)), rng.random(5) + 0.1,
                 density=Measure.grid_density(Box.unit(1), rng.random(7)).density, lebesgue=0.3)
    F, Q = cdf_and_quantile(mu)
    t = np.linspace(0, 1, 2001)
    assert np.all(np.diff(F(t)) >= 0)
    assert np.all(np.diff(Q(t)) >= 0)
    # F(Q(u)) >= u everywhere and Q(F(t)) = t off the atoms, where F is strictly increasing
    assert np.all(F(Q(t)) >= t - 1e-12)


def test_quantile_rejects_levels_outside_unit_interval():
    _, Q = cdf_and_quantile(Measure.lebesgue_unit())
    with pytest.raises(InputError):
        Q(1.5)
    with pytest.raises(InputError):
        cdf_and_quantile(Measure.atomic([[0.1, 0.2]], [1.0]))
