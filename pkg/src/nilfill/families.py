"""Deterministic generators of test cycles and experiment families."""

from __future__ import annotations

import random
from fractions import Fraction

from .algebra import NilpotentAlgebra
from .bch import bch
from .chains import PLChain, boundary
from .exact_math import solve_rational


def random_rational(rng: random.Random, lo=-4, hi=4, denom=8) -> Fraction:
    return Fraction(rng.randint(lo * denom, hi * denom), denom)


def random_point(rng, n, lo=-4, hi=4, denom=8):
    return tuple(random_rational(rng, lo, hi, denom) for _ in range(n))


def translate_chain(c: PLChain, offset) -> PLChain:
    """Euclidean translation x -> x + offset."""
    out = PLChain(c.dim)
    for key, coef in c.terms.items():
        out._add_term(coef, [tuple(x + o for x, o in zip(v, offset)) for v in key])
    return out


def linear_map_chain(c: PLChain, M) -> PLChain:
    out = PLChain(c.dim)
    for key, coef in c.terms.items():
        out._add_term(
            coef, [tuple(sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))) for v in key]
        )
    return out


def random_polygon(rng, n, size_range=(3, 12)) -> PLChain:
    k = rng.randint(*size_range)
    pts = []
    while len(pts) < k:
        p = random_point(rng, n)
        if p not in pts:
            pts.append(p)
    return PLChain.polygon(pts)


def tetrahedron_boundary(verts) -> PLChain:
    return boundary(PLChain.simplex(*verts))


def random_sphere(rng, n, max_simplices=50) -> PLChain:
    """Boundary of a random stacked 3-ball: repeated stellar subdivision of faces."""
    while True:
        verts = [random_point(rng, n) for _ in range(4)]
        c = tetrahedron_boundary(verts)
        if len(c) == 4:
            break
    target = rng.randint(4, max_simplices)
    while len(c) + 2 <= target:
        key = rng.choice(sorted(c.terms))
        coef = c.terms[key]
        p = random_point(rng, n)
        if p in c.vertices():
            continue
        # replace face (a,b,c) by the cone over its boundary from p
        star = PLChain(2)
        a, b, d = key
        for f, s in (((b, d), 1), ((a, d), -1), ((a, b), 1)):
            star._add_term(s * coef, (p,) + f)
        face = PLChain(2)
        face.terms = {key: coef}
        c = c - face + star
    return c


def random_cycle(rng, n, k) -> PLChain:
    if k == 1:
        return random_polygon(rng, n)
    if k == 2:
        return random_sphere(rng, n)
    raise ValueError("random cycles implemented for k in {1, 2}")


def random_support_point(rng, c: PLChain):
    """A rational point of supp(c): random barycentric combination inside a simplex."""
    key = rng.choice(sorted(c.terms))
    weights = [Fraction(rng.randint(0, 5)) for _ in key]
    if not any(weights):
        weights[0] = Fraction(1)
    total = sum(weights)
    return tuple(sum(w * v[t] for w, v in zip(weights, key)) / total for t in range(len(key[0])))


def through_origin(rng, c: PLChain) -> PLChain:
    """Euclidean-translate c so that a random point of its support is the origin."""
    p = random_support_point(rng, c)
    return translate_chain(c, [-x for x in p])


def cayley_rotation(rng, n, denom=4):
    """Random rational orthogonal matrix (I - S)(I + S)^{-1}, S skew-symmetric."""
    S = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(rng.randint(-denom, denom), denom)
            S[i][j], S[j][i] = v, -v
    I_plus = [[(1 if i == j else 0) + S[i][j] for j in range(n)] for i in range(n)]
    I_minus = [[(1 if i == j else 0) - S[i][j] for j in range(n)] for i in range(n)]
    # Q = (I - S) (I + S)^{-1}: solve column by column of the inverse
    inv_cols = [solve_rational(I_plus, [1 if i == j else 0 for i in range(n)]) for j in range(n)]
    inv = [[inv_cols[j][i] for j in range(n)] for i in range(n)]
    return [[sum(I_minus[i][k] * inv[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


# -- experiment families ------------------------------------------------------------


def word_path(a: NilpotentAlgebra, letters, start=None):
    """Vertices of the path start, start*g1, start*g1*g2, ..."""
    z = list(start) if start is not None else [Fraction(0)] * a.n
    pts = [tuple(z)]
    for g in letters:
        z = bch(a, z, g)
        pts.append(tuple(z))
    return pts


def _gen(a, idx, power):
    v = [Fraction(0)] * a.n
    v[idx] = Fraction(power)
    return v


def commutator_loop(a: NilpotentAlgebra, lam: int) -> tuple:
    """Closed word loop in the first two generators x, y at scale lam.

    Uses [x^lam, y^lam] when it closes (abelian), else the product
    [x^2lam, y^lam][y^2lam, x^lam], whose central parts cancel in class 2.
    If neither closes, the endpoint is joined back to 0 by a straight segment.
    Returns (chain, word_length, closure).
    """
    gens = a.generator_indices
    if len(gens) < 2:
        raise ValueError("need at least two generators for commutator loops")
    i, j = gens[0], gens[1]
    candidates = [
        ("commutator", [(i, lam), (j, lam), (i, -lam), (j, -lam)]),
        ("balanced", [(i, 2 * lam), (j, lam), (i, -2 * lam), (j, -lam),
                      (j, 2 * lam), (i, lam), (j, -2 * lam), (i, -lam)]),
    ]
    for closure, pairs in candidates:
        pts = word_path(a, [_gen(a, idx, p) for idx, p in pairs])
        length = sum(abs(p) for _, p in pairs)
        if all(c == 0 for c in pts[-1]):
            return PLChain.polygon(pts[:-1]), length, closure
    return PLChain.polygon(pts), length, "straight_segment"


def cross_polytope_boundary(n: int, k: int, scale=1) -> PLChain:
    """Boundary of the cross-polytope conv(+-scale e_i, i < k): a (k-1)-sphere in R^n."""
    from itertools import product

    if not 2 <= k <= n:
        raise ValueError("need 2 <= k <= n")
    c = PLChain(k - 1)
    for signs in product((1, -1), repeat=k):
        verts = []
        for ax, sg in enumerate(signs):
            v = [Fraction(0)] * n
            v[ax] = Fraction(sg) * scale
            verts.append(tuple(v))
        sign = 1
        for sg in signs:
            sign *= sg
        c._add_term(sign, verts)
    return c


def octahedron_boundary(n: int, scale=1) -> PLChain:
    return cross_polytope_boundary(n, 3, scale)


def square_loop(n: int, scale=1, corner=None, axes=(0, 1)) -> PLChain:
    corner = corner or [0] * n
    i, j = axes
    pts = []
    for dx, dy in ((0, 0), (1, 0), (1, 1), (0, 1)):
        v = [Fraction(c) for c in corner]
        v[i] += dx * scale
        v[j] += dy * scale
        pts.append(tuple(v))
    return PLChain.polygon(pts)
