"""Integer piecewise-linear chains in R^n with exact rational vertices.

Simplices are stored in canonical form: vertices sorted lexicographically,
the sorting permutation's sign folded into the coefficient. Simplices with
a repeated vertex are zero (normalized chains).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import NilpotentAlgebra
from .bch import bch, translation_is_affine
from .exact_math import format_rational, solve_rational, to_rational
from .metrics import EUCLIDEAN, MetricKind, euclidean_gram_det, euclidean_simplex_mass, pulled_back_masses
from .quadrature import NonConvergent, QuadratureSpec, edgewise_subdivision


def _point(p) -> tuple:
    return tuple(to_rational(c) for c in p)


def canonical_simplex(vertices):
    """(sign, sorted vertex tuple); sign 0 for a repeated vertex."""
    verts = [_point(v) for v in vertices]
    order = sorted(range(len(verts)), key=lambda i: verts[i])
    out = tuple(verts[i] for i in order)
    for a, b in zip(out, out[1:]):
        if a == b:
            return 0, out
    sign = 1
    seen = list(order)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign, out


class PLChain:
    """Formal integer combination of oriented affine k-simplices."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms=None):
        self.dim = dim
        self.terms: dict = {}
        for coef, verts in terms or ():
            self._add_term(int(coef), verts)

    def _add_term(self, coef: int, verts):
        if not coef:
            return
        if len(verts) != self.dim + 1:
            raise ValueError(f"a {self.dim}-simplex needs {self.dim + 1} vertices")
        sign, key = canonical_simplex(verts)
        if not sign:
            return
        val = self.terms.get(key, 0) + sign * coef
        if val:
            self.terms[key] = val
        else:
            self.terms.pop(key, None)

    @classmethod
    def simplex(cls, *verts, coef: int = 1) -> "PLChain":
        c = cls(len(verts) - 1)
        c._add_term(coef, verts)
        return c

    @classmethod
    def polygon(cls, points) -> "PLChain":
        """Closed PL loop through the given points."""
        c = cls(1)
        for p, q in zip(points, list(points[1:]) + [points[0]]):
            c._add_term(1, (p, q))
        return c

    @property
    def ambient_dim(self):
        for key in self.terms:
            return len(key[0])
        return None

    def copy(self) -> "PLChain":
        c = PLChain(self.dim)
        c.terms = dict(self.terms)
        return c

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PLChain") -> "PLChain":
        if self.terms and other.terms and other.dim != self.dim:
            raise ValueError("cannot add chains of different dimension")
        out = PLChain(self.dim if self.terms else other.dim)
        out.terms = dict(self.terms)
        for key, c in other.terms.items():
            v = out.terms.get(key, 0) + c
            if v:
                out.terms[key] = v
            else:
                out.terms.pop(key, None)
        return out

    def __neg__(self):
        out = PLChain(self.dim)
        out.terms = {k: -c for k, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, m: int):
        out = PLChain(self.dim)
        if m:
            out.terms = {k: c * m for k, c in self.terms.items()}
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PLChain):
            return NotImplemented
        if not self.terms and not other.terms:
            return True
        return self.dim == other.dim and self.terms == other.terms

    def vertices(self) -> set:
        return {v for key in self.terms for v in key}

    def coefficient_norm(self) -> int:
        return sum(abs(c) for c in self.terms.values())

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"coef": c, "verts": [[format_rational(x) for x in v] for v in key]}
                for key, c in self
            ],
        }

    @classmethod
    def from_json(cls, data) -> "PLChain":
        if isinstance(data, str):
            data = json.loads(data)
        c = cls(int(data["dim"]))
        for t in data.get("terms", []):
            c._add_term(int(t["coef"]), [[to_rational(x) for x in v] for v in t["verts"]])
        return c

    def __repr__(self):
        return f"PLChain(dim={self.dim}, simplices={len(self.terms)})"


def boundary(c: PLChain) -> PLChain:
    if c.dim < 1:
        raise ValueError("boundary needs dimension >= 1")
    out = PLChain(c.dim - 1)
    for key, coef in c.terms.items():
        for i in range(len(key)):
            out._add_term(coef if i % 2 == 0 else -coef, key[:i] + key[i + 1 :])
    return out


def is_cycle(c: PLChain) -> bool:
    return c.dim == 0 or boundary(c).is_zero()


# -- mass ----------------------------------------------------------------------


def mass(a: NilpotentAlgebra, c: PLChain, metric=EUCLIDEAN, quad: QuadratureSpec = QuadratureSpec()) -> float:
    return mass_with_error(a, c, metric, quad)[0]


def mass_with_error(a, c: PLChain, metric=EUCLIDEAN, quad: QuadratureSpec = QuadratureSpec()):
    if not c.terms:
        return 0.0, 0.0
    keys = list(c.terms)
    weights = np.array([abs(c.terms[k]) for k in keys], dtype=float)
    if MetricKind(metric) is EUCLIDEAN:
        vals = np.array([euclidean_simplex_mass(k) for k in keys])
        return float(weights @ vals), 0.0
    vals, errs = pulled_back_masses(a, keys, quad)
    return float(weights @ vals), float(weights @ errs)


def simplex_masses(a, c: PLChain, metric, quad=QuadratureSpec()):
    keys = list(c.terms)
    if MetricKind(metric) is EUCLIDEAN:
        return keys, np.array([euclidean_simplex_mass(k) for k in keys])
    return keys, pulled_back_masses(a, keys, quad)[0]


# -- support geometry ------------------------------------------------------------


def _sq_dist(p, q) -> Fraction:
    return sum((x - y) ** 2 for x, y in zip(p, q))


def point_in_simplex(p, verts) -> bool:
    """Exact membership of p in the convex hull of ``verts``."""
    p = _point(p)
    verts = [_point(v) for v in verts]
    if len(verts) == 1:
        return verts[0] == p
    if euclidean_gram_det(verts) == 0:
        return any(point_in_simplex(p, verts[:i] + verts[i + 1 :]) for i in range(len(verts)))
    v0 = verts[0]
    E = [[x - y for x, y in zip(v, v0)] for v in verts[1:]]
    rhs = [x - y for x, y in zip(p, v0)]
    k = len(E)
    G = [[sum(a * b for a, b in zip(E[i], E[j])) for j in range(k)] for i in range(k)]
    b = [sum(a * r for a, r in zip(E[i], rhs)) for i in range(k)]
    lam = solve_rational(G, b)
    recon = [sum(lam[i] * E[i][t] for i in range(k)) for t in range(len(p))]
    if recon != rhs:
        return False
    return all(x >= 0 for x in lam) and sum(lam) <= 1


@dataclass
class SupportGeometry:
    diameter: float
    diameter_sq: Fraction
    contains_origin: bool
    components: list = field(default_factory=list)
    radius_sq: Fraction = Fraction(0)

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)


def connected_components(c: PLChain) -> list:
    """Split into sub-chains whose simplices are linked through shared vertices."""
    parent: dict = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for key in c.terms:
        for v in key:
            parent.setdefault(v, v)
        r0 = find(key[0])
        for v in key[1:]:
            r = find(v)
            if r != r0:
                parent[r] = r0
    groups: dict = {}
    for key, coef in c.terms.items():
        groups.setdefault(find(key[0]), {})[key] = coef
    comps = []
    for root in sorted(groups, key=lambda r: min(groups[r])):
        comp = PLChain(c.dim)
        comp.terms = groups[root]
        comps.append(comp)
    return comps


def support_geometry(c: PLChain, origin=None) -> SupportGeometry:
    verts = sorted(c.vertices())
    diam_sq = Fraction(0)
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            d = _sq_dist(verts[i], verts[j])
            if d > diam_sq:
                diam_sq = d
    n = len(verts[0]) if verts else 0
    zero = tuple(Fraction(0) for _ in range(n)) if origin is None else _point(origin)
    contains = any(point_in_simplex(zero, key) for key in c.terms)
    radius_sq = max((_sq_dist(v, zero) for v in verts), default=Fraction(0))
    return SupportGeometry(
        diameter=math.sqrt(diam_sq),
        diameter_sq=diam_sq,
        contains_origin=contains,
        components=connected_components(c),
        radius_sq=radius_sq,
    )


# -- parametrized images -----------------------------------------------------------


def map_subdivided(c: PLChain, point_map, level: int, cone_apex=None) -> PLChain:
    """PL approximation of the image of ``c`` under a map of parameter points.

    Each simplex (or, with ``cone_apex``, the cone simplex (apex, simplex)) is
    edgewise-subdivided at ``level`` and every subdivision vertex, given as a
    parent point plus barycentric coordinates, is sent through
    ``point_map(parent_vertices, bary)``.
    """
    k = c.dim + (1 if cone_apex is not None else 0)
    bary, signs = edgewise_subdivision(k, level)
    out = PLChain(k)
    cache: dict = {}
    for key, coef in c.terms.items():
        parent = ((_point(cone_apex),) + key) if cone_apex is not None else key
        for sub, sign in zip(bary, signs):
            verts = []
            for row in sub:
                b = tuple(Fraction(int(x), level) for x in row)
                ck = (parent, b)
                if ck not in cache:
                    cache[ck] = _point(point_map(parent, b))
                verts.append(cache[ck])
            out._add_term(coef * int(sign), verts)
    return out


def affine_point(parent, bary):
    n = len(parent[0])
    return tuple(sum(b * v[t] for b, v in zip(bary, parent)) for t in range(n))


def subdivide(c: PLChain, level: int) -> PLChain:
    """Edgewise subdivision (same support and mass, finer simplices)."""
    if level == 1:
        return c.copy()
    return map_subdivided(c, affine_point, level)


def _per_simplex_image_masses(a, c, point_map, level, quad, cone_apex=None):
    masses = []
    for key, coef in c.terms.items():
        single = PLChain(c.dim)
        single.terms = {key: 1}
        img = map_subdivided(single, point_map, level, cone_apex)
        masses.append(mass(a, img, "pulled_back", quad))
    return np.array(masses)


@dataclass
class RefinedImage:
    chain: PLChain
    level: int
    max_relative_change: float


def refine_image(a, c: PLChain, point_map, tol: float, quad=QuadratureSpec(), affine=False,
                 max_level: int = 64, cone_apex=None) -> RefinedImage:
    """Uniform subdivision level chosen by the mass-Cauchy rule: stop when every
    source simplex's pulled-back image mass changes by < tol, relative to
    max(its mass, mean simplex mass). The first comparison is level 2 vs 4:
    the unrefined image is often outside the 1/m^2 regime."""
    if affine:
        return RefinedImage(map_subdivided(c, point_map, 1, cone_apex), 1, 0.0)
    level = 2
    prev = _per_simplex_image_masses(a, c, point_map, level, quad, cone_apex)
    while True:
        level *= 2
        if level > max_level:
            raise NonConvergent(f"image subdivision did not converge by level {max_level}",
                                last_values=prev.tolist())
        cur = _per_simplex_image_masses(a, c, point_map, level, quad, cone_apex)
        # slivers are measured against the mean simplex mass, not their own
        scale = np.maximum(np.maximum(np.abs(cur), np.mean(np.abs(cur))), quad.abs_floor)
        change = float(np.max(np.abs(cur - prev) / scale)) if len(cur) else 0.0
        if change < tol:
            return RefinedImage(map_subdivided(c, point_map, level, cone_apex), level, change)
        prev = cur


def group_translate(a: NilpotentAlgebra, g, c: PLChain, tol: float = 1e-4,
                    quad: QuadratureSpec = QuadratureSpec(), max_level: int = 64,
                    return_info: bool = False):
    """Left translation x -> bch(g, x) applied to a chain.

    The map is affine for class <= 2 (images are exact); otherwise simplices
    are subdivided uniformly until image masses stabilize.
    """
    g = [to_rational(v) for v in g]
    if not any(g):
        res = RefinedImage(c.copy(), 1, 0.0)
    else:
        def point_map(parent, bary):
            return bch(a, g, list(affine_point(parent, bary)))

        res = refine_image(a, c, point_map, tol, quad, translation_is_affine(a, g), max_level)
    return res if return_info else res.chain


def load_chain(path: str) -> PLChain:
    with open(path) as fh:
        return PLChain.from_json(json.load(fh))
