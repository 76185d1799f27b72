"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
``acceptance criteria`` section of the pytest terminal summary.
"""

import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np

from momtransform.cli import main
from momtransform.curves import AnnularCurve, Box, HilbertCurve
from momtransform.hausdorff import check_hausdorff, lebesgue_sequence, reconstruct, richter_bound
from momtransform.measures import (
    Measure,
    integrate,
    inverse_map,
    lebesgue_rohlin_normal_form,
    moments,
    pushforward,
)
from momtransform.numerics import Polynomial, exponents
from momtransform.synthetic import cell_center_atoms, dyadic_atomic_unit, random_atomic, random_atomic_unit
from momtransform.transforms import approximate_g, g_moment_pipeline, lebesgue_direction, power_sums

GOLDEN = Path(__file__).parent / "golden"


def test_criterion_01_round_trip(criterion):
    t0 = time.perf_counter()
    c = HilbertCurve(Box.unit(2), 8)
    x = c.cell_centers()
    exact = np.array_equal(c.eval(c.right_inverse(x)), x)
    dt = time.perf_counter() - t0
    ok = criterion(1, exact and dt < 5, f"depth-8 round trip on {x.shape[0]} centers bit-exact={exact}, {dt:.2f} s")
    assert ok


def test_criterion_02_soundness(criterion):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    rejected = 0
    for _ in range(1000):
        mu = random_atomic_unit(rng)
        m = power_sums(mu.points[:, 0], mu.weights, 10)
        rejected += sum(not check_hausdorff(m[: d + 1], 1e-9).accepted for d in range(11))
    leb = all(check_hausdorff(lebesgue_sequence(d), 1e-9).accepted for d in range(11))
    dt = time.perf_counter() - t0
    ok = criterion(2, rejected == 0 and leb and dt < 10,
                   f"1000 measures x d<=10: {rejected} rejected; Lebesgue accepted={leb}; {dt:.2f} s")
    assert ok


def test_criterion_03_reconstruction(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(500):
        r = int(rng.integers(1, 6))
        mu = dyadic_atomic_unit(rng, r)
        rec = reconstruct(moments(mu, 2 * r - 1))
        x, w = mu.points[:, 0], mu.weights
        if rec.nodes.size != r:
            worst = math.inf
            break
        # relative error, absolute at the node x = 0
        ex = np.abs(rec.nodes - x) / np.where(x > 0, x, 1.0)
        ew = np.abs(rec.weights - w) / w
        worst = max(worst, float(ex.max()), float(ew.max()))
    bound_ok = True
    for _ in range(500):
        d = int(rng.integers(0, 13))
        rec = reconstruct(moments(random_atomic_unit(rng, 10), d))
        bound_ok &= rec.nodes.size <= richter_bound(d)
    hand = reconstruct([1, 1 / 2, 1 / 3, 1 / 4])
    s = math.sqrt(3)
    hand_err = max(np.max(np.abs(hand.nodes - [(3 - s) / 6, (3 + s) / 6])), np.max(np.abs(hand.weights - 0.5)))
    ok = criterion(3, worst <= 1e-9 and bound_ok and hand_err <= 1e-12,
                   f"max rel. error {worst:.2e} (500 dyadic measures, r<=5); Richter bound held={bound_ok}; "
                   f"Gauss-2 case error {hand_err:.1e}")
    assert ok


def test_criterion_04_pipeline(criterion):
    rng = np.random.default_rng(4)
    c = HilbertCurve(Box.unit(2), 10)
    worst = max(g_moment_pipeline(cell_center_atoms(rng, c), c, 6, tol=1e-10).max_residual for _ in range(100))
    uniform = Measure.grid_density(Box.unit(2), np.ones((1, 1)))
    res = {p: g_moment_pipeline(uniform, HilbertCurve(Box.unit(2), p), 4, tol=1e-2).residuals for p in (8, 10, 12)}
    trend = all(res[p].max() * 2 <= res[p - 2].max() for p in (10, 12))
    # degrees whose residual is above rounding level must each shrink
    trend &= all(np.all((res[p - 2] <= 1e-13) | (res[p] * 2 <= res[p - 2])) for p in (10, 12))
    ok = criterion(4, worst <= 1e-10 and trend and res[12].max() <= 1e-2,
                   f"100 atomic round trips max residual {worst:.1e}; uniform max residual "
                   + ", ".join(f"p={p}: {res[p].max():.2e}" for p in res))
    assert ok


def test_criterion_05_telescoping(criterion):
    rng = np.random.default_rng(5)
    c = HilbertCurve(Box.unit(2), 10)
    g = inverse_map(c)
    holds, l1_ok, exact = True, True, True
    for _ in range(100):
        mu = random_atomic(rng, (0, 0), (1, 1), int(rng.integers(5, 41)))
        fit = approximate_g(mu, c, 1e-3, 8, check_degree=16)
        holds &= fit.telescoping_holds and len(fit.telescoping) == 17
        exact &= fit.exact_check
        # the stored bound dominates a direct recomputation
        gv = g(mu.points)[:, 0]
        ge = fit(mu.points)
        l1_ok &= math.fsum(mu.weights * np.abs(gv - ge)) <= fit.achieved_l1 * (1 + 1e-12)
        l1_ok &= bool(np.all((ge >= 0) & (ge <= 1)))
    ok = criterion(5, holds and l1_ok and exact,
                   f"100 fits, d<=16: telescoping held={holds} (exact rational check={exact}); l1 bound held={l1_ok}")
    assert ok


def test_criterion_06_lebesgue_direction(criterion):
    mu = Measure.grid_density(Box.unit(2), np.ones((1, 1)))
    _, rep = lebesgue_direction(mu, HilbertCurve(Box.unit(2), 12), 8, tol=1e-2)
    ok = criterion(6, rep.passed and rep.residuals[0] == 0.0,
                   f"depth 12: d=0 residual {rep.residuals[0]}, max residual {rep.max_residual:.2e}")
    assert ok


def test_criterion_07_annular_envelope(criterion):
    rng = np.random.default_rng(7)
    eps, R = 0.25, 3.0
    c = AnnularCurve(eps, R, 8)
    t = rng.uniform(0, R, 10_000)
    nf = np.hypot(*c.eval(t).T)
    fwd = bool(np.all((t - eps <= nf) & (nf <= t + eps)))
    ang = rng.uniform(0, 2 * np.pi, 10_000)
    rad = R * np.sqrt(rng.random(10_000))
    x = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    gx = c.right_inverse(x)
    nx = np.hypot(x[:, 0], x[:, 1])
    back = bool(np.all((nx - eps <= gx) & (gx <= nx + eps)))
    ok = criterion(7, fwd and back, f"eps=0.25, R=3: curve envelope={fwd}, right-inverse envelope={back}")
    assert ok


def test_criterion_08_change_of_variables(criterion):
    rng = np.random.default_rng(8)
    c = HilbertCurve(Box.unit(2), 10)
    g = inverse_map(c)
    mu = Measure.atomic(rng.random((40, 2)), rng.random(40) + 0.1)
    nu = pushforward(mu, g)
    polys = [Polynomial(exponents(1, 8), rng.normal(size=9)) for _ in range(50)]
    atomic_gap = max(abs(integrate(mu, lambda x, p=p: p(g(x))) - integrate(nu, p)) for p in polys)
    c5 = HilbertCurve(Box.unit(2), 5)
    g5 = inverse_map(c5)
    dens = Measure.grid_density(Box.unit(2), rng.random((c5.side, c5.side)))
    nu5 = pushforward(dens, g5)
    dens_gap = max(abs(integrate(dens, lambda x, p=p: p(g5(x)), order=8) - integrate(nu5, p)) for p in polys)
    ok = criterion(8, atomic_gap == 0.0 and dens_gap <= 1e-8,
                   f"50 polynomials: atomic gap {atomic_gap}, density gap {dens_gap:.1e}")
    assert ok


def test_criterion_09_normal_form(criterion):
    rng = np.random.default_rng(9)
    mass_ok, worst = True, 0.0
    for _ in range(100):
        k = int(rng.integers(0, 8))
        c = float(rng.random()) if k else float(rng.random()) + 0.1
        w = rng.random(k) + 0.01
        mu = Measure.mixture(c, rng.random((k, 1)), w) if k else Measure.lebesgue_unit(c)
        nf = lebesgue_rohlin_normal_form(mu)
        mass_ok &= nf.total_mass() == mu.total_mass()
        ws = np.sort(w)[::-1]
        got = moments(nf, 10).values
        for d in range(11):
            ref = math.fsum([c / (d + 1)] + [wi * (i + 1.0) ** -d for i, wi in enumerate(ws)])
            worst = max(worst, abs(got[d] - ref))
    ok = criterion(9, mass_ok and worst <= 1e-12,
                   f"100 mixtures: mass exact={mass_ok}, max moment error {worst:.1e} (d<=10)")
    assert ok


def test_criterion_10_cli(criterion):
    cases = json.loads((GOLDEN / "cases.json").read_text())
    same, match = True, 0
    with tempfile.TemporaryDirectory() as tmp:
        for i, case in enumerate(cases):
            outs = [Path(tmp) / f"{i}{tag}" for tag in "ab"]
            codes = [main([case["command"], "--input", str(GOLDEN / case["input"]), "--output-dir", str(o),
                           *case["args"]]) for o in outs]
            same &= (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes()
            match += codes[0] == codes[1] == case["exit"]
    ok = criterion(10, same and match == len(cases),
                   f"{match}/{len(cases)} golden exit codes match; reports byte-identical={same}")
    assert ok
