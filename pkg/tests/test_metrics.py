import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import CATALOG_SMALL

from nilfill.algebra import catalog
from nilfill.bch import frame, poly_matmul
from nilfill.exact_math import MultiPoly
from nilfill.metrics import (
    check_sandwich,
    dvector_norm,
    dvector_norm_exact_sq,
    lambda_matrix,
    cone_exponent,
    simplex_mass,
    similarity_bound,
)
from nilfill.quadrature import QuadratureSpec

F = Fraction


def test_lambda_examples(heis):
    fr = frame(heis)
    idx, M = lambda_matrix(fr, 2)
    assert idx == [(0, 1), (0, 2), (1, 2)]
    x1, x2 = MultiPoly.variable(0, 3), MultiPoly.variable(1, 3)
    assert M[0][0] == MultiPoly.constant(1, 3)
    assert M[0][1] == x1 * F(1, 2)
    assert M[0][2] == x2 * F(1, 2)
    for p in range(3):
        assert M[p][p] == MultiPoly.constant(1, 3)
        for q in range(p):
            assert M[p][q].is_zero()
    _, M1 = lambda_matrix(fr, 1)
    assert [list(r) for r in M1] == [list(r) for r in fr.A]
    _, M3 = lambda_matrix(fr, 3)
    assert M3 == ((MultiPoly.constant(1, 3),),)


@pytest.mark.parametrize("name", ["heisenberg(3)", "heisenberg(5)", "filiform(5)", "unitriangular(4)"])
def test_lambda_functoriality(name):
    a = catalog(name)
    fr = frame(a)
    for d in range(1, a.n + 1):
        _, L = lambda_matrix(fr, d)
        _, Li = lambda_matrix(fr, d, inverse=True)
        prod = poly_matmul(L, Li)
        N = len(L)
        for i in range(N):
            for j in range(N):
                assert prod[i][j] == MultiPoly.constant(int(i == j), a.n)


def test_dvector_examples(heis):
    rng = np.random.default_rng(1)
    for name in ("heisenberg(3)", "filiform(4)"):
        a = catalog(name)
        V = np.eye(a.n)
        x = rng.normal(size=a.n) * 5
        assert dvector_norm(a, x, V, "pulled_back") == pytest.approx(dvector_norm(a, x, V), rel=1e-12)
    V = [[1, 2, 0], [0, 1, -1]]
    assert dvector_norm_exact_sq(heis, [0, 0, 0], V, "pulled_back") == dvector_norm_exact_sq(heis, [0, 0, 0], V)
    assert dvector_norm_exact_sq(heis, [0, 2, 0], [[1, 0, 0]], "pulled_back") == 2
    assert dvector_norm(heis, [0, 2, 0], [[1, 0, 0]], "pulled_back") == pytest.approx(math.sqrt(2))


def test_similarity_examples(heis):
    R1 = similarity_bound(heis, 1).R
    assert list(R1.coefficients) == [3, F(3, 2)]
    assert similarity_bound(heis, 2).degree == 1
    assert similarity_bound(heis, 3).R(50) == 1
    assert cone_exponent(heis) == 6
    for d in (1, 2):
        assert similarity_bound(catalog("abelian(2)"), d).degree == 0


@pytest.mark.parametrize("name", ["heisenberg(3)", "filiform(4)"])
def test_sandwich_sampled(name):
    a = catalog(name)
    rng = np.random.default_rng(7)
    for d in range(1, a.n + 1):
        res = check_sandwich(a, d, 200, 100.0, rng)
        assert res["lower_violations"] == 0 and res["upper_violations"] == 0


def test_simplex_mass_examples(heis):
    ab = catalog("abelian(2)")
    assert simplex_mass(ab, [(0, 0), (1, 0), (0, 1)])[0] == 0.5
    T = 7
    m, _ = simplex_mass(heis, [(0, 0, 0), (0, 0, T)], "pulled_back")
    assert m == pytest.approx(T, rel=1e-10)
    tet = [(0, 0, 0), (3, 1, 0), (1, 4, 2), (-2, 1, 5)]
    assert simplex_mass(heis, tet, "pulled_back")[0] == pytest.approx(simplex_mass(heis, tet)[0], rel=1e-12)


def test_degenerate_mass_zero(heis):
    assert simplex_mass(heis, [(0, 0, 0), (1, 1, 1), (2, 2, 2)], "pulled_back") == (0.0, 0.0)


def test_pulled_back_mass_sandwich(heis):
    # planar square far from the origin
    off = 20
    tri = [[(off, off, 0), (off + 1, off, 0), (off + 1, off + 1, 0)],
           [(off, off, 0), (off + 1, off + 1, 0), (off, off + 1, 0)]]
    R = similarity_bound(heis, 2)(math.sqrt(2 * (off + 1) ** 2))
    pb = sum(simplex_mass(heis, t, "pulled_back", QuadratureSpec(tolerance=1e-10))[0] for t in tri)
    assert 1 / R <= pb <= R


def test_quadrature_top_degree_isometry():
    a = catalog("filiform(4)")
    s = [(0, 0, 0, 0), (1, 2, 0, 1), (0, 1, 3, 0), (2, 0, 1, 1), (1, 1, 1, 4)]
    assert simplex_mass(a, s, "pulled_back")[0] == pytest.approx(simplex_mass(a, s)[0], rel=1e-12)
