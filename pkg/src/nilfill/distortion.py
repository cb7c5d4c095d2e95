"""Word metric on lattices generated by exp(+-e_i), and its comparison with
||log g|| and the homogeneous gauge phi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import NilpotentAlgebra
from .bch import bch, bch_symbolic
from .exact_math import MultiPoly, to_rational


class BallTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    algebra: NilpotentAlgebra
    generators: tuple = ()

    def __post_init__(self):
        gens = self.generators
        if not gens:
            gens = []
            for i in self.algebra.generator_indices:
                for sign in (1, -1):
                    v = [Fraction(0)] * self.algebra.n
                    v[i] = Fraction(sign)
                    gens.append(tuple(v))
        gens = tuple(tuple(to_rational(c) for c in g) for g in gens)
        if set(gens) != {tuple(-c for c in g) for g in gens}:
            raise ValueError("generator set must be symmetric")
        object.__setattr__(self, "generators", gens)


@lru_cache(maxsize=32)
def _right_multipliers(a: NilpotentAlgebra, gens: tuple):
    """For each generator g, the polynomial map z -> bch(z, g) as a tuple of MultiPoly."""
    n = a.n
    z = [MultiPoly.variable(i, n) for i in range(n)]
    out = []
    for g in gens:
        const = [MultiPoly.constant(c, n) for c in g]
        out.append(tuple(bch_symbolic(a, z, const)))
    return tuple(out)


def _compile(polys):
    """Turn a tuple of MultiPoly into a fast exact evaluator on Fraction tuples."""
    compiled = []
    for p in polys:
        terms = [(c, [(i, e) for i, e in enumerate(exps) if e]) for exps, c in p.terms.items()]
        compiled.append(terms)

    def apply(x):
        out = []
        for terms in compiled:
            acc = Fraction(0)
            for c, mono in terms:
                v = c
                for i, e in mono:
                    v *= x[i] ** e if e > 1 else x[i]
                acc += v
            out.append(acc)
        return tuple(out)

    return apply


def bfs_ball(spec: LatticeSpec, radius: int, cap: int = 2_000_000) -> dict:
    """Exact word distances of all group points with distance <= radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    a = spec.algebra
    moves = [_compile(m) for m in _right_multipliers(a, spec.generators)]
    origin = tuple(Fraction(0) for _ in range(a.n))
    dist = {origin: 0}
    frontier = [origin]
    for r in range(1, radius + 1):
        nxt = []
        for z in frontier:
            for mv in moves:
                w = mv(z)
                if w not in dist:
                    dist[w] = r
                    nxt.append(w)
        if len(dist) > cap:
            raise BallTooLarge(f"ball of radius {r} has more than {cap} points")
        frontier = nxt
    return dist


def sphere_counts(dist: dict, radius: int):
    """|B(r)| for r = 0..radius."""
    counts = np.bincount(np.fromiter(dist.values(), dtype=np.int64), minlength=radius + 1)
    return np.cumsum(counts[: radius + 1])


def denominator_lcm(dist: dict) -> int:
    out = 1
    for z in dist:
        for c in z:
            out = math.lcm(out, c.denominator)
    return out


def phi(a: NilpotentAlgebra, x) -> float:
    """sum_i ||x_{W_i}||_2^{1/i} over the grading blocks."""
    total = 0.0
    start = 0
    for i, dim in enumerate(a.grading_dims, start=1):
        block = x[start : start + dim]
        norm = math.sqrt(sum(float(c) ** 2 for c in block))
        total += norm ** (1.0 / i)
        start += dim
    return total


def log_norm(x) -> float:
    return math.sqrt(sum(float(c) ** 2 for c in x))


def least_squares_slope(xs, ys):
    """(slope, intercept, rms residual) of y against x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))) if len(xs) else 0.0


C_GRID = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)


@dataclass
class DistortionFit:
    s: int
    radius: int
    ball_size: int
    upper_C: float
    upper_L: float
    lower_C: float
    lower_L: float
    growth_slope: float
    homogeneous_dimension: int
    central_exponent: float | None
    denominator_lcm: int
    counts: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


def _upper_fit(d, norms, s, radius):
    best = None
    ds = d.astype(float) ** s
    for C in C_GRID:
        L = float(np.max((norms - C) / ds)) * (1 + 1e-12)
        L = max(L, 0.0)
        score = C + L * radius**s
        if best is None or score < best[2]:
            best = (C, L, score)
    return best[0], best[1]


def _lower_fit(d, norms, radius):
    best = None
    for C in C_GRID[1:]:
        L = float(np.max(d / (norms + C))) * (1 + 1e-12)
        score = radius / L - C
        if best is None or score > best[2]:
            best = (C, L, score)
    return best[0], best[1]


def central_ray(a: NilpotentAlgebra, dist: dict):
    """(||log g||, d) for g = exp(k e_n), k = 1, 2, ... found in the ball."""
    pts = []
    for z, dz in dist.items():
        if all(c == 0 for c in z[:-1]) and z[-1] > 0 and z[-1].denominator == 1:
            pts.append((float(z[-1]), dz))
    return sorted(pts)


def distortion_fit(spec: LatticeSpec, radius: int, cap: int = 2_000_000) -> DistortionFit:
    a = spec.algebra
    dist = bfs_ball(spec, radius, cap)
    pts = [(z, dz) for z, dz in dist.items() if dz > 0]
    d = np.array([dz for _, dz in pts], dtype=float)
    norms = np.array([log_norm(z) for z, _ in pts])
    uC, uL = _upper_fit(d, norms, a.s, radius)
    lC, lL = _lower_fit(d, norms, radius)
    counts = sphere_counts(dist, radius)
    rs = np.arange(max(1, radius // 2), radius + 1)
    slope, _, _ = least_squares_slope(np.log(rs), np.log(counts[rs]))
    ray = central_ray(a, dist) if a.s > 1 else []
    central = None
    if len(ray) >= 3:
        # whole ray: d is a staircase in k, so a tail-only fit is biased low
        central, _, _ = least_squares_slope(np.log([p[0] for p in ray]), np.log([p[1] for p in ray]))
    checks = {
        "upper_encloses": bool(np.all(norms <= uC + uL * d**a.s)),
        "lower_encloses": bool(np.all(d / lL - lC <= norms)),
        "symmetric": all(dist.get(tuple(-c for c in z)) == dz for z, dz in dist.items()),
    }
    return DistortionFit(
        s=a.s,
        radius=radius,
        ball_size=len(dist),
        upper_C=uC,
        upper_L=uL,
        lower_C=lC,
        lower_L=lL,
        growth_slope=slope,
        homogeneous_dimension=a.homogeneous_dimension,
        central_exponent=central,
        denominator_lcm=denominator_lcm(dist),
        counts=[int(c) for c in counts],
        checks=checks,
    )


def triangle_violations(spec: LatticeSpec, dist: dict, pairs: int, rng) -> int:
    """Sample pairs (g, h) in the ball and count d(gh) > d(g) + d(h) where gh is also in the ball."""
    a = spec.algebra
    keys = sorted(dist)
    bad = 0
    for _ in range(pairs):
        g = keys[rng.randrange(len(keys))]
        h = keys[rng.randrange(len(keys))]
        gh = tuple(bch(a, list(g), list(h)))
        if gh in dist and dist[gh] > dist[g] + dist[h]:
            bad += 1
    return bad
