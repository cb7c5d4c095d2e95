"""Acceptance suite: one printed PASS/FAIL line per criterion, then the assertion.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import CATALOG_ALL, CATALOG_SMALL, rand_vec
from test_bch import _mat_exp_log_oracle

from nilfill.algebra import catalog, check_jacobi
from nilfill.bch import bch, frame, poly_matmul
from nilfill.chains import PLChain, boundary, group_translate, mass
from nilfill.distortion import LatticeSpec, distortion_fit
from nilfill.exact_math import MultiPoly
from nilfill.experiments import ExperimentConfig, run_experiment
from nilfill.families import random_cycle, random_point, random_polygon, random_sphere, through_origin
from nilfill.filling import cone, cone_contract
from nilfill.grid import GridSpec, deform_chain, deformation_stats
from nilfill.metrics import check_sandwich, lambda_matrix, cone_exponent

F = Fraction


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


def test_criterion_1_exact_algebra(report):
    t0 = time.time()
    bad = []
    for name in CATALOG_ALL:
        a = catalog(name)
        try:
            check_jacobi(a.constants)
        except Exception as exc:
            bad.append(f"{name} jacobi: {exc}")
        if not a.is_triangular():
            bad.append(f"{name} not triangular")
    for name in CATALOG_ALL:
        a = catalog(name)
        if a.n > 6:
            continue
        rng = random.Random(name)
        for _ in range(100):
            x, y, z = (rand_vec(rng, a.n) for _ in range(3))
            if bch(a, bch(a, x, y), z) != bch(a, x, bch(a, y, z)):
                bad.append(f"{name} associativity")
    for m in range(2, 6):
        a = catalog("unitriangular", m)
        rng = random.Random(100 + m)
        for _ in range(100):
            x, y = rand_vec(rng, a.n), rand_vec(rng, a.n)
            if bch(a, x, y) != _mat_exp_log_oracle(m, x, y):
                bad.append(f"unitriangular({m}) oracle")
    dt = time.time() - t0
    ok = not bad and dt < 30
    report(1, ok, f"{len(CATALOG_ALL)} algebras, {len(bad)} failures, {dt:.1f}s")
    assert not bad, bad[:5]
    assert dt < 30


def test_criterion_2_frame_contract(report):
    t0 = time.time()
    bad = []
    for name in CATALOG_ALL:
        a = catalog(name)
        fr = frame(a)
        n = a.n
        one = MultiPoly.constant(1, n)
        for i in range(n):
            if fr.A[i][i] != one or any(not fr.A[i][j].is_zero() for j in range(i)):
                bad.append(f"{name} row {i} not unipotent upper triangular")
            if any(fr.A[i][j].total_degree() > a.s - 1 for j in range(i + 1, n)):
                bad.append(f"{name} row {i} degree > s-1")
        prod = poly_matmul(fr.A, fr.Ainv)
        if any(prod[i][j] != MultiPoly.constant(int(i == j), n) for i in range(n) for j in range(n)):
            bad.append(f"{name} A*Ainv != I")
        _, det = lambda_matrix(fr, n)
        if det[0][0] != one:
            bad.append(f"{name} det A != 1")
    dt = time.time() - t0
    ok = not bad and dt < 10
    report(2, ok, f"{len(CATALOG_ALL)} algebras, {len(bad)} failures, {dt:.1f}s")
    assert not bad, bad
    assert dt < 10


def test_criterion_3_sandwich(report):
    t0 = time.time()
    violations = 0
    worst = 0.0
    runs = 0
    for name in CATALOG_ALL:
        a = catalog(name)
        rng = np.random.default_rng(3)
        for d in range(1, a.n + 1):
            res = check_sandwich(a, d, 1000, 100.0, rng, rel_tol=1e-9)
            violations += res["lower_violations"] + res["upper_violations"]
            worst = max(worst, res["worst_ratio"])
            runs += 1
    dt = time.time() - t0
    ok = violations == 0 and dt < 120
    report(3, ok, f"{runs} (algebra, d) pairs x 1000 samples, {violations} violations, "
                  f"max of ratio/R and 1/(ratio*R) is {worst:.3g} (must be <= 1), {dt:.1f}s")
    assert violations == 0
    assert dt < 120


def test_criterion_4_cone_contract(report):
    t0 = time.time()
    bad = 0
    total = 0
    for k in (1, 2):
        for n in (2, 3, 4):
            if k > n - 1:
                continue
            rng = random.Random(10 * k + n)
            for _ in range(200):
                c = through_origin(rng, random_cycle(rng, n, k))
                res = cone_contract(c, cone(c))
                total += 1
                if not (res["boundary_exact"] and res["mass_per_simplex"] and res["mass_total"]
                        and res["support_in_ball"]):
                    bad += 1
    dt = time.time() - t0
    ok = bad == 0 and dt < 120
    report(4, ok, f"{total} cycles (k=2 needs n>=3), {bad} violations, {dt:.1f}s")
    assert bad == 0
    assert dt < 120


def _random_chain(rng, k):
    """Random k-chain in R^2 or R^3, possibly with boundary."""
    n = rng.choice([2, 3])
    if k == 0:
        c = PLChain(0)
        for _ in range(rng.randint(1, 4)):
            c = c + PLChain.simplex(random_point(rng, n), coef=rng.choice([-2, -1, 1, 2]))
        return c
    if k == 1:
        if rng.random() < 0.5:
            return random_polygon(rng, n, (3, 8))
        pts = [random_point(rng, n) for _ in range(rng.randint(2, 5))]
        return sum((PLChain.simplex(p, q) for p, q in zip(pts, pts[1:])), PLChain(1))
    if rng.random() < 0.5:
        return random_sphere(rng, 3, 12)
    c = PLChain(2)
    for _ in range(rng.randint(1, 3)):
        c = c + PLChain.simplex(*(random_point(rng, 3) for _ in range(3)))
    return c


def test_criterion_5_grid_deformation(report):
    rng = random.Random(5)
    grid = GridSpec(eps=F(1, 2))
    bad = 0
    for i in range(100):
        c = _random_chain(rng, i % 3)
        res = deform_chain(c, grid)
        if res.P.to_pl() != c + boundary(res.R) + res.boundary_term:
            bad += 1
    eps = F(1, 4)
    means = []
    for seed in range(5):
        srng = random.Random(500 + seed)
        ratios = []
        for _ in range(20):
            c = random_polygon(srng, 2, (3, 8))
            res = deform_chain(c, GridSpec(eps=eps))
            ratios.append(deformation_stats(None, c, res, GridSpec(eps=eps))["mass_ratio"])
        means.append(sum(ratios) / len(ratios))
    spread = (max(means) - min(means)) / (sum(means) / len(means))
    ok = bad == 0 and spread < 0.2
    report(5, ok, f"identity failures {bad}/100; mass(P)/mass(c) at eps=1/4 per seed "
                  f"{[round(m, 3) for m in means]}, spread {spread:.1%}")
    assert bad == 0
    assert spread < 0.2


def test_criterion_6_dehn_abelian(report, tmp_path):
    t0 = time.time()
    cfg = ExperimentConfig(algebra="abelian(2)", family="dehn_loops", scales=list(range(1, 33)),
                           out_dir=str(tmp_path))
    res = run_experiment(cfg)
    slope = res["fit"]["slope"]
    dt = time.time() - t0
    ok = 1.8 <= slope <= 2.2 and dt < 60
    report(6, ok, f"slope {slope:.4f} observed on family, window [1.8, 2.2], {dt:.1f}s")
    assert 1.8 <= slope <= 2.2
    assert dt < 60


def test_criterion_7_dehn_heisenberg(report, tmp_path):
    t0 = time.time()
    a = catalog("heisenberg(3)")
    cfg = ExperimentConfig(algebra="heisenberg(3)", family="dehn_loops", scales=[1, 2, 4, 8, 16, 32],
                           out_dir=str(tmp_path))
    res = run_experiment(cfg)
    slope = res["fit"]["slope"]
    n_cone = cone_exponent(a)
    certs = all(r["certificate_ok"] for r in res["rows"])
    dt = time.time() - t0
    ok = slope <= n_cone and 2.5 <= slope <= 4.5 and certs and dt < 120
    report(7, ok, f"slope {slope:.4f} observed on family, N_cone {n_cone}, window [2.5, 4.5], "
                  f"certificates {'ok' if certs else 'FAILED'}, {dt:.1f}s")
    assert slope <= n_cone
    assert 2.5 <= slope <= 4.5
    assert certs
    assert dt < 120


def test_criterion_8_distortion(report):
    t0 = time.time()
    fit = distortion_fit(LatticeSpec(catalog("heisenberg(3)")), 12)
    dt = time.time() - t0
    ce = fit.central_exponent
    ok = (fit.checks["upper_encloses"] and 3.5 <= fit.growth_slope <= 4.5
          and ce is not None and 0.4 <= ce <= 0.6 and dt < 120)
    report(8, ok, f"|B(12)|={fit.ball_size}, fit ||log g|| <= {fit.upper_C} + {fit.upper_L:.4g} d^2 encloses "
                  f"{fit.checks['upper_encloses']}, growth slope {fit.growth_slope:.3f}, "
                  f"central exponent {ce:.3f}, {dt:.1f}s")
    assert fit.checks["upper_encloses"]
    assert 3.5 <= fit.growth_slope <= 4.5
    assert 0.4 <= ce <= 0.6
    assert dt < 120


def test_criterion_9_left_invariance(report):
    t0 = time.time()
    tol = 1e-3
    bad = []
    worst = 0.0
    for name in CATALOG_SMALL:
        a = catalog(name)
        rng = random.Random(name)
        done = 0
        while done < 100:
            k = rng.choice([1, 2])
            s = PLChain.simplex(*(random_point(rng, a.n, -2, 2, 4) for _ in range(k + 1)))
            if s.is_zero() or mass(None, s) == 0:
                continue
            g = random_point(rng, a.n, -2, 2, 4)
            m0 = mass(a, s, "pulled_back")
            m1 = mass(a, group_translate(a, g, s, tol), "pulled_back")
            err = abs(m1 - m0) / m0
            worst = max(worst, err)
            if err > 2 * tol:
                bad.append((name, err))
            done += 1
    dt = time.time() - t0
    ok = not bad and dt < 120
    report(9, ok, f"{len(CATALOG_SMALL)} algebras x 100 (g, simplex), worst relative change {worst:.2e} "
                  f"(limit {2 * tol:.0e}), {len(bad)} failures, {dt:.1f}s")
    assert not bad, bad[:5]
    assert dt < 120
