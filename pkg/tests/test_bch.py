import random
from fractions import Fraction

import numpy as np
import pytest
from conftest import CATALOG_SMALL, rand_vec

from nilfill.algebra import catalog, unitriangular_basis
from nilfill.bch import bch, bch_symbolic, frame, inverse, left_translate, poly_matmul
from nilfill.exact_math import MultiPoly
from nilfill.metrics import lambda_matrix

F = Fraction


def test_heisenberg_example(heis):
    assert bch(heis, [1, 0, 0], [0, 1, 0]) == [1, 1, F(1, 2)]
    assert left_translate(heis, [1, 0, 0], [0, 1, 0]) == [1, 1, F(1, 2)]


@pytest.mark.parametrize("name", CATALOG_SMALL)
def test_inverse_and_identity(name, rng):
    a = catalog(name)
    for _ in range(10):
        x = rand_vec(rng, a.n)
        assert all(c == 0 for c in bch(a, x, inverse(x)))
        assert left_translate(a, x, [0] * a.n) == x
        assert all(c == 0 for c in left_translate(a, inverse(x), x))


@pytest.mark.parametrize("name", CATALOG_SMALL)
def test_associativity(name):
    a = catalog(name)
    rng = random.Random(hash(name) % 1000)
    for _ in range(100):
        x, y, z = (rand_vec(rng, a.n) for _ in range(3))
        assert bch(a, bch(a, x, y), z) == bch(a, x, bch(a, y, z))


def _mat_exp_log_oracle(m, x, y):
    """log(exp X exp Y) for strictly upper triangular matrices, exactly."""
    basis = unitriangular_basis(m)

    def to_mat(v):
        M = [[F(0)] * m for _ in range(m)]
        for c, (i, j) in zip(v, basis):
            M[i][j] = F(c)
        return M

    def mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(m)) for j in range(m)] for i in range(m)]

    def add(A, B, s=1):
        return [[A[i][j] + s * B[i][j] for j in range(m)] for i in range(m)]

    I = [[F(int(i == j)) for j in range(m)] for i in range(m)]

    def exp(X):
        out, term = I, I
        for k in range(1, m):
            term = [[c / k for c in row] for row in mul(term, X)]
            out = add(out, term)
        return out

    def log(M):
        N = add(M, I, -1)
        out = [[F(0)] * m for _ in range(m)]
        power = I
        for k in range(1, m):
            power = mul(power, N)
            out = add(out, [[c * F((-1) ** (k + 1), k) for c in row] for row in power])
        return out

    Z = log(mul(exp(to_mat(x)), exp(to_mat(y))))
    return [Z[i][j] for i, j in basis]


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_matrix_oracle(m):
    a = catalog("unitriangular", m)
    rng = random.Random(m)
    for _ in range(100):
        x, y = rand_vec(rng, a.n), rand_vec(rng, a.n)
        assert bch(a, x, y) == _mat_exp_log_oracle(m, x, y)


def test_symbolic_examples(heis):
    n = 4  # x1, x2, x3, t
    X = [MultiPoly.variable(i, n) for i in range(3)]
    t = MultiPoly.variable(3, n)
    zero = [MultiPoly.zero(n)] * 3
    assert bch_symbolic(heis, X, zero) == X
    got = bch_symbolic(heis, X, [t, MultiPoly.zero(n), MultiPoly.zero(n)])
    assert got == [X[0] + t, X[1], X[2] - t * X[1] * F(1, 2)]
    ab = catalog("abelian(3)")
    Y = [MultiPoly.variable(i, 6) for i in range(3, 6)]
    X6 = [MultiPoly.variable(i, 6) for i in range(3)]
    assert bch_symbolic(ab, X6, Y) == [p + q for p, q in zip(X6, Y)]


def test_symbolic_matches_numeric():
    a = catalog("filiform(5)")
    n = a.n
    X = [MultiPoly.variable(i, 2 * n) for i in range(n)]
    Y = [MultiPoly.variable(n + i, 2 * n) for i in range(n)]
    sym = bch_symbolic(a, X, Y)
    rng = random.Random(3)
    for _ in range(10):
        x, y = rand_vec(rng, n), rand_vec(rng, n)
        assert [p.evaluate(x + y) for p in sym] == bch(a, x, y)


def test_heisenberg_frame(heis):
    fr = frame(heis)
    x1, x2 = MultiPoly.variable(0, 3), MultiPoly.variable(1, 3)
    assert fr.A[0][2] == x2 * F(-1, 2)
    assert fr.A[1][2] == x1 * F(1, 2)
    assert fr.Ainv[0][2] == x2 * F(1, 2)
    assert fr.Ainv[1][2] == x1 * F(-1, 2)


def test_abelian_frame():
    fr = frame(catalog("abelian(4)"))
    for i in range(4):
        for j in range(4):
            assert fr.A[i][j] == MultiPoly.constant(int(i == j), 4)


@pytest.mark.parametrize("name", CATALOG_SMALL + ["filiform(8)", "heisenberg(7)", "unitriangular(5)"])
def test_frame_contract(name):
    a = catalog(name)
    fr = frame(a)
    n = a.n
    one = MultiPoly.constant(1, n)
    for i in range(n):
        assert fr.A[i][i] == one
        for j in range(i):
            assert fr.A[i][j].is_zero()
        for j in range(i + 1, n):
            assert fr.A[i][j].total_degree() <= a.s - 1
    prod = poly_matmul(fr.A, fr.Ainv)
    for i in range(n):
        for j in range(n):
            assert prod[i][j] == MultiPoly.constant(int(i == j), n)
    _, det = lambda_matrix(fr, n)
    assert det[0][0] == one


def _bernoulli_frame(a, x):
    """Row i of A(x) = (ad_x / (1 - e^{-ad_x})) e_i, from the Bernoulli series."""
    from nilfill.algebra import bracket

    n = a.n
    # generating function z / (1 - e^{-z}) = sum B_k^+ z^k / k!
    bern = [F(1), F(1, 2), F(1, 6), F(0), F(-1, 30), F(0), F(1, 42), F(0), F(-1, 30), F(0), F(5, 66)]
    fact = [1]
    for k in range(1, len(bern)):
        fact.append(fact[-1] * k)
    rows = []
    for i in range(n):
        v = [F(int(j == i)) for j in range(n)]
        total = list(v)
        term = v
        for k in range(1, a.s):
            term = bracket(a, x, term)
            total = [t + bern[k] / fact[k] * c for t, c in zip(total, term)]
        rows.append(total)
    return rows


@pytest.mark.parametrize("name", CATALOG_SMALL + ["filiform(8)"])
def test_frame_bernoulli_oracle(name, rng):
    a = catalog(name)
    fr = frame(a)
    for _ in range(5):
        x = rand_vec(rng, a.n)
        assert fr.evaluate(x) == _bernoulli_frame(a, x)


@pytest.mark.parametrize("name", ["heisenberg(3)", "filiform(5)", "unitriangular(4)"])
def test_frame_finite_difference(name):
    a = catalog(name)
    fr = frame(a)
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = [F(float(c)).limit_denominator(64) for c in rng.normal(size=a.n)]
        A = np.array(fr.evaluate(x), dtype=float)
        for i in range(a.n):
            errs = []
            ts = [F(1, 2**k) for k in range(8, 12)]
            for t in ts:
                e = [F(int(j == i)) * t for j in range(a.n)]
                fd = [(b - c) / t for b, c in zip(bch(a, x, e), x)]
                errs.append(float(max(abs(float(v) - A[i, j]) for j, v in enumerate(fd))))
            # error is O(t): halving t at least roughly halves it
            for e0, e1 in zip(errs, errs[1:]):
                assert e1 <= 0.5 * e0 * (1 + 1e-6) + 1e-15
