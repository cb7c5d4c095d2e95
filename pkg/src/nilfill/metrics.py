"""Euclidean vs pulled-back left-invariant metric on exponential coordinates.

The pulled-back metric makes the frame fields exp*X_i orthonormal. A tangent
vector v (row, e_j coordinates) has frame coordinates ``v @ Ainv(x)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, factorial

import numpy as np

from .algebra import NilpotentAlgebra
from .bch import PolyFrame, frame
from .exact_math import MultiPoly, UniMajorant, integer_det, majorize, rational_det
from .quadrature import NonConvergent, QuadratureSpec, refined_rule


class MetricKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    PULLED_BACK = "pulled_back"


EUCLIDEAN = MetricKind.EUCLIDEAN
PULLED_BACK = MetricKind.PULLED_BACK


def multi_indices(n: int, d: int):
    """Strictly increasing d-tuples from range(n), in lexicographic order."""
    return list(combinations(range(n), d))


def _minor_table(M, d: int):
    n = len(M)
    nv = M[0][0].nvars
    memo = {}

    def minor(rows, cols):
        key = (rows, cols)
        if key in memo:
            return memo[key]
        if len(rows) == 1:
            val = M[rows[0]][cols[0]]
        else:
            val = MultiPoly.zero(nv)
            r0, rest = rows[0], rows[1:]
            for t, c in enumerate(cols):
                entry = M[r0][c]
                if entry.is_zero():
                    continue
                sub = minor(rest, cols[:t] + cols[t + 1 :])
                if sub.is_zero():
                    continue
                term = entry * sub
                val = val - term if t % 2 else val + term
        memo[key] = val
        return val

    idx = multi_indices(n, d)
    return idx, tuple(tuple(minor(I, J) for J in idx) for I in idx)


@lru_cache(maxsize=128)
def _lambda_cached(fr: PolyFrame, d: int, inverse: bool):
    return _minor_table(fr.Ainv if inverse else fr.A, d)


def lambda_matrix(fr: PolyFrame, d: int, inverse: bool = False):
    """(multi-indices, matrix) of d x d minors of A (or Ainv), entry (I, J) = det A[I, J]."""
    n = fr.nvars
    if not 1 <= d <= n:
        raise ValueError(f"degree d must be in 1..{n}")
    return _lambda_cached(fr, d, inverse)


def _as_float_rows(V, n):
    V = np.atleast_2d(np.asarray([[float(c) for c in row] for row in V]))
    if V.shape[1] != n:
        raise ValueError(f"vectors must have length {n}")
    return V


def gram_norm(W: np.ndarray) -> float:
    G = W @ W.T
    return math.sqrt(max(np.linalg.det(G), 0.0))


def dvector_norm(a: NilpotentAlgebra, x, V, metric=EUCLIDEAN) -> float:
    """Norm of the simple d-vector V_1 ^ ... ^ V_d attached at x."""
    Vf = _as_float_rows(V, a.n)
    if MetricKind(metric) is EUCLIDEAN:
        return gram_norm(Vf)
    Ainv = frame(a).eval_many(np.array([[float(c) for c in x]]), inverse=True)[0]
    return gram_norm(Vf @ Ainv)


def dvector_norm_exact_sq(a: NilpotentAlgebra, x, V, metric=EUCLIDEAN) -> Fraction:
    """Squared norm as an exact rational (rational x and V)."""
    V = [[Fraction(c) for c in row] for row in V]
    if MetricKind(metric) is PULLED_BACK:
        Ainv = frame(a).evaluate([Fraction(c) for c in x], inverse=True)
        n = a.n
        V = [[sum(row[i] * Ainv[i][j] for i in range(n)) for j in range(n)] for row in V]
    G = [[sum(p * q for p, q in zip(u, w)) for w in V] for u in V]
    return rational_det(G)


@dataclass(frozen=True)
class SimilarityBound:
    d: int
    R: UniMajorant

    def __call__(self, r):
        return self.R(r)

    @property
    def degree(self) -> int:
        return self.R.degree


@lru_cache(maxsize=128)
def similarity_bound(a: NilpotentAlgebra, d: int) -> SimilarityBound:
    """R_d(r) = C(n,d) * (1 + Q(r)), Q dominating every off-diagonal entry of
    Lambda^d A and Lambda^d Ainv. Row/column sums of a unipotent N x N matrix
    with off-diagonal entries <= Q are <= 1 + (N-1) Q, which bounds the
    operator norm, in both directions."""
    fr = frame(a)
    Q = UniMajorant([])
    for inverse in (False, True):
        idx, M = lambda_matrix(fr, d, inverse)
        for p in range(len(idx)):
            for q in range(len(idx)):
                if p != q and not M[p][q].is_zero():
                    Q = Q.pointwise_max(majorize(M[p][q]))
    R = (Q + 1).scale(comb(a.n, d))
    return SimilarityBound(d=d, R=R)


def cone_exponent(a: NilpotentAlgebra) -> int:
    """s * (2 deg R_1 + deg R_2) with this build's similarity majorants."""
    r1 = similarity_bound(a, 1).degree
    r2 = similarity_bound(a, 2).degree if a.n >= 2 else 0
    return a.s * (2 * r1 + r2)


def _random_integer_point(rng, n, radius, denom):
    """Integer numerators X of a random point X/denom in the ball of the given radius."""
    v = rng.normal(size=n)
    v *= radius * rng.random() ** (1.0 / n) / np.linalg.norm(v)
    return [int(round(c * denom)) for c in v]


class _IntegerFrame:
    """Ainv(X / q) = N(X) / (L q^D) with N integer-valued, for integer X."""

    def __init__(self, fr: PolyFrame, q: int):
        polys = [p for row in fr.Ainv for p in row]
        self.D = max(0, max(p.total_degree() for p in polys))
        self.L = 1
        for p in polys:
            for c in p.terms.values():
                self.L = math.lcm(self.L, c.denominator)
        self.q = q
        self.n = len(fr.Ainv)
        self.entries = []
        for p in polys:
            terms = []
            for e, c in p.terms.items():
                k = sum(e)
                coef = c.numerator * (self.L // c.denominator) * q ** (self.D - k)
                terms.append((coef, [(i, ei) for i, ei in enumerate(e) if ei]))
            self.entries.append(terms)

    @property
    def scale(self) -> int:
        return self.L * self.q**self.D

    def __call__(self, X):
        out = []
        for terms in self.entries:
            acc = 0
            for coef, mono in terms:
                v = coef
                for i, e in mono:
                    v *= X[i] ** e
                acc += v
            out.append(acc)
        n = self.n
        return [out[i * n : (i + 1) * n] for i in range(n)]


def _int_gram_det(rows) -> int:
    return integer_det([[sum(a * b for a, b in zip(u, w)) for w in rows] for u in rows])


def check_sandwich(a: NilpotentAlgebra, d: int, samples: int, radius: float, rng, rel_tol=1e-9,
                   denom: int = 1000):
    """Count violations of both similarity inequalities on random rational (x, V), ||x|| <= radius.

    Points have denominator ``denom``; squared norms are exact (integer
    arithmetic after clearing denominators). Only R_d(||x||) is a float.
    """
    bound = similarity_bound(a, d)
    n = a.n
    ifr = _IntegerFrame(frame(a), denom)
    scale_2d = Fraction(ifr.scale) ** (2 * d)
    lower = upper = 0
    worst = 0.0
    for _ in range(samples):
        X = _random_integer_point(rng, n, radius * 0.999, denom)
        V = [_random_integer_point(rng, n, 1.0, denom) for _ in range(d)]
        e2 = _int_gram_det(V)
        if e2 == 0:
            continue
        N = ifr(X)
        W = [[sum(row[i] * N[i][j] for i in range(n)) for j in range(n)] for row in V]
        ratio_sq = Fraction(_int_gram_det(W)) / (e2 * scale_2d)  # (pulled-back / euclidean)^2
        ratio = math.sqrt(ratio_sq)
        R = bound(math.sqrt(sum(c * c for c in X)) / denom)
        if ratio * R * (1 + rel_tol) < 1:
            lower += 1
        if ratio > R * (1 + rel_tol):
            upper += 1
        worst = max(worst, ratio / R, 1 / (ratio * R))
    return {"d": d, "samples": samples, "lower_violations": lower,
            "upper_violations": upper, "worst_ratio": worst, "R": bound.R.to_text()}


# -- masses --------------------------------------------------------------------


def euclidean_gram_det(vertices) -> Fraction:
    """Exact Gram determinant of the edge vectors of a rational simplex."""
    v0 = vertices[0]
    E = [[Fraction(p) - Fraction(q) for p, q in zip(v, v0)] for v in vertices[1:]]
    if not E:
        return Fraction(1)
    G = [[sum(p * q for p, q in zip(u, w)) for w in E] for u in E]
    return rational_det(G)


def euclidean_simplex_mass(vertices) -> float:
    k = len(vertices) - 1
    return math.sqrt(euclidean_gram_det(vertices)) / factorial(k)


def _pulled_back_batch(fr: PolyFrame, verts: np.ndarray, m: int, q: int) -> np.ndarray:
    """Composite-rule pulled-back masses for simplices ``verts`` (S, k+1, n)."""
    S, kp1, n = verts.shape
    k = kp1 - 1
    pts, wts = refined_rule(k, m, q)
    E = verts[:, 1:, :] - verts[:, :1, :]  # (S, k, n)
    out = np.empty(S)
    chunk = max(1, 200_000 // max(1, len(pts)))
    for start in range(0, S, chunk):
        V = verts[start : start + chunk]
        X = np.einsum("pa,san->spn", pts, V).reshape(-1, n)
        Ainv = fr.eval_many(X, inverse=True).reshape(len(V), len(pts), n, n)
        W = np.einsum("skn,spnm->spkm", E[start : start + chunk], Ainv)
        G = np.einsum("spkm,splm->spkl", W, W)
        f = np.sqrt(np.clip(np.linalg.det(G), 0.0, None))
        out[start : start + chunk] = f @ wts / factorial(k)
    return out


def pulled_back_masses(a: NilpotentAlgebra, simplices, quad: QuadratureSpec = QuadratureSpec()):
    """Pulled-back masses and Richardson error estimates for equal-dimension simplices."""
    fr = frame(a)
    verts = np.asarray([[[float(c) for c in v] for v in s] for s in simplices], dtype=float)
    S = len(verts)
    if S == 0:
        return np.zeros(0), np.zeros(0)
    k = verts.shape[1] - 1
    values = np.zeros(S)
    errors = np.zeros(S)
    if k == 0:
        return np.ones(S), errors
    degenerate = np.array([euclidean_gram_det(s) == 0 for s in simplices])
    if a.s == 1 or k == a.n:
        # flat metric, or top degree where det A = 1
        for t, s in enumerate(simplices):
            values[t] = euclidean_simplex_mass(s)
        return values, errors
    active = np.flatnonzero(~degenerate)
    power = quad.richardson_power()
    prev = _pulled_back_batch(fr, verts[active], 1, quad.order)
    m = 1
    while active.size:
        m *= 2
        if m > quad.max_subdivision:
            raise NonConvergent(
                f"quadrature did not converge at subdivision {m // 2}",
                last_values=list(zip(prev.tolist(), cur.tolist())) if m > 2 else prev.tolist(),
            )
        cur = _pulled_back_batch(fr, verts[active], m, quad.order)
        err = np.abs(cur - prev) / (2**power - 1)
        extrap = cur + (cur - prev) / (2**power - 1)
        done = (err <= quad.tolerance * np.abs(extrap)) | (err <= quad.abs_floor)
        values[active[done]] = extrap[done]
        errors[active[done]] = err[done]
        active = active[~done]
        prev = cur[~done]
        cur = cur[~done]
    return values, errors


def simplex_mass(a: NilpotentAlgebra, vertices, metric=EUCLIDEAN, quad: QuadratureSpec = QuadratureSpec()):
    """(mass, error estimate) of the affine simplex with the given vertices."""
    if MetricKind(metric) is EUCLIDEAN:
        return euclidean_simplex_mass(vertices), 0.0
    v, e = pulled_back_masses(a, [vertices], quad)
    return float(v[0]), float(e[0])
