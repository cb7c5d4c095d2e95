"""Group law in exponential coordinates via the truncated Dynkin series.

The series is regrouped by words: ``log(exp X exp Y) = sum_w c(w) [w_1,[w_2,...,w_m]]``
over words w in {X, Y} of length m <= s (class of the algebra).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial

from .algebra import NilpotentAlgebra
from .exact_math import MultiPoly

X, Y = 0, 1


@lru_cache(maxsize=None)
def dynkin_word_coefficients(max_len: int) -> tuple:
    """(word, coefficient) pairs of the Dynkin series for words up to ``max_len``.

    A word is split into n blocks X^r Y^q (r + q >= 1); each split contributes
    (-1)^(n-1) / n / m / prod(r! q!). Words whose right-nested bracket is
    trivially zero (ending in XX or YY) are dropped.
    """
    out = []
    for m in range(1, max_len + 1):
        for word in product((X, Y), repeat=m):
            if m >= 2 and word[-1] == word[-2]:
                continue
            # dp[pos] maps block count -> summed 1/prod(r!q!) for prefix word[:pos]
            dp = [dict() for _ in range(m + 1)]
            dp[0][0] = Fraction(1)
            for pos in range(m):
                if not dp[pos]:
                    continue
                x_run = 0
                while pos + x_run < m and word[pos + x_run] == X:
                    x_run += 1
                y_run = 0
                while pos + x_run + y_run < m and word[pos + x_run + y_run] == Y:
                    y_run += 1
                blocks = [(r, 0) for r in range(1, x_run)]
                blocks += [(x_run, q) for q in range(y_run + 1) if x_run + q]
                for r, q in blocks:
                    weight = Fraction(1, factorial(r) * factorial(q))
                    nxt = pos + r + q
                    for nb, val in dp[pos].items():
                        dp[nxt][nb + 1] = dp[nxt].get(nb + 1, 0) + val * weight
            total = Fraction(0)
            for nb, val in dp[m].items():
                total += Fraction((-1) ** (nb - 1), nb) * val
            total /= m
            if total:
                out.append((word, total))
    return tuple(out)


def _series(a: NilpotentAlgebra, x, y, max_right=None):
    """Dynkin series evaluated on coordinate vectors of any ring (Fraction, float, MultiPoly)."""
    letters = (list(x), list(y))
    memo = {}

    def nested(suffix):
        if suffix in memo:
            return memo[suffix]
        if len(suffix) == 1:
            val = letters[suffix[0]]
        else:
            val = a.bracket(letters[suffix[0]], nested(suffix[1:]))
        memo[suffix] = val
        return val

    z = [xi + yi for xi, yi in zip(x, y)]
    for word, coef in dynkin_word_coefficients(a.s):
        if len(word) == 1:
            continue
        if max_right is not None and sum(word) > max_right:
            continue
        term = nested(word)
        z = [zi + ti * coef for zi, ti in zip(z, term)]
    return z


def _check(a, *vectors):
    for v in vectors:
        if len(v) != a.n:
            raise ValueError(f"coordinate vector has length {len(v)}, expected {a.n}")


def bch(a: NilpotentAlgebra, x, y):
    """log(exp x * exp y); exact on Fraction/int input."""
    _check(a, x, y)
    if a.s == 1:
        return [xi + yi for xi, yi in zip(x, y)]
    return _series(a, x, y)


def bch_symbolic(a: NilpotentAlgebra, left, right, max_right=None):
    """BCH on vectors of MultiPoly; ``max_right`` keeps only words with at most
    that many right-hand letters (higher words are O(t^k) when ``right`` is t-scaled)."""
    _check(a, left, right)
    if a.s == 1:
        return [p + q for p, q in zip(left, right)]
    return _series(a, left, right, max_right)


def inverse(x):
    return [-c for c in x]


def left_translate(a: NilpotentAlgebra, g, x):
    return bch(a, g, x)


def identity(a: NilpotentAlgebra):
    return [Fraction(0)] * a.n


def power(a: NilpotentAlgebra, x, k: int):
    """exp(x)^k = exp(k x) in exponential coordinates of the first kind."""
    return [c * k for c in x]


def word_product(a: NilpotentAlgebra, letters):
    z = identity(a)
    for g in letters:
        z = bch(a, z, g)
    return z


@dataclass(frozen=True)
class PolyFrame:
    """A[i][j]: coefficient of e_j in the pullback of the left-invariant field X_i."""

    A: tuple
    Ainv: tuple
    nvars: int

    def evaluate(self, x, inverse=False):
        M = self.Ainv if inverse else self.A
        return [[p.evaluate(x) for p in row] for row in M]

    def eval_many(self, points, inverse=False):
        """Float evaluation at many points: array of shape (N, n, n)."""
        import numpy as np

        M = self.Ainv if inverse else self.A
        points = np.asarray(points, dtype=float)
        n = self.nvars
        out = np.zeros((points.shape[0], n, n))
        for i in range(n):
            for j in range(n):
                p = M[i][j]
                if p.is_zero():
                    continue
                if p.total_degree() == 0:
                    out[:, i, j] = float(p.constant_term())
                else:
                    out[:, i, j] = p.eval_many(points)
        return out

    def to_text(self, inverse=False) -> str:
        M = self.Ainv if inverse else self.A
        return "\n".join(" | ".join(p.to_text() for p in row) for row in M)


def poly_matmul(P, Q):
    n = len(P)
    m = len(Q[0])
    nv = P[0][0].nvars
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = MultiPoly.zero(nv)
            for k in range(len(Q)):
                if P[i][k].terms and Q[k][j].terms:
                    acc = acc + P[i][k] * Q[k][j]
            row.append(acc)
        out.append(row)
    return out


def poly_identity(n, nvars):
    return [
        [MultiPoly.constant(1 if i == j else 0, nvars) for j in range(n)] for i in range(n)
    ]


def unipotent_inverse(A):
    """Inverse of I + U (U strictly upper triangular) by the terminating Neumann series."""
    n = len(A)
    nv = A[0][0].nvars
    I = poly_identity(n, nv)
    U = [[A[i][j] - I[i][j] for j in range(n)] for i in range(n)]
    result = I
    power_ = I
    for k in range(1, n):
        power_ = poly_matmul(power_, U)
        if all(p.is_zero() for row in power_ for p in row):
            break
        sign = -1 if k % 2 else 1
        result = [
            [result[i][j] + power_[i][j].scale(sign) for j in range(n)] for i in range(n)
        ]
    return result


@lru_cache(maxsize=64)
def frame(a: NilpotentAlgebra) -> PolyFrame:
    """Row i = d/dt bch(x, t e_i) at t = 0, with t as auxiliary variable n+1."""
    n = a.n
    nv = n + 1
    x = [MultiPoly.variable(k, nv) for k in range(n)]
    t = MultiPoly.variable(n, nv)
    rows = []
    for i in range(n):
        right = [t if k == i else MultiPoly.zero(nv) for k in range(n)]
        z = bch_symbolic(a, x, right, max_right=1)
        rows.append([zk.derivative(n).substitute_zero(n).drop_variables(n) for zk in z])
    A = tuple(tuple(row) for row in rows)
    Ainv = tuple(tuple(row) for row in unipotent_inverse([list(r) for r in A]))
    return PolyFrame(A=A, Ainv=Ainv, nvars=n)


@lru_cache(maxsize=256)
def _translation_polys(a: NilpotentAlgebra, g: tuple):
    n = a.n
    xs = [MultiPoly.variable(k, n) for k in range(n)]
    gs = [MultiPoly.constant(c, n) for c in g]
    return tuple(bch_symbolic(a, gs, xs))


def translation_map(a: NilpotentAlgebra, g):
    """The polynomial map x -> bch(g, x) as a tuple of MultiPoly."""
    return _translation_polys(a, tuple(Fraction(c) for c in g))


def translation_is_affine(a: NilpotentAlgebra, g) -> bool:
    return all(p.total_degree() <= 1 for p in translation_map(a, g))
