"""Cubical grid chains and the deformation of PL chains onto the eps-grid.

The deformation is a chain map D (round vertices to the nearest grid point,
join rounded endpoints by staircases, fill small grid loops by ladders) with
a chain homotopy h built by straight-line cones:

    h(v) = [v, D(v)],    h(sigma) = cone_{v0}(D(sigma) - sigma - h(d sigma)),

so that d h + h d = D - id holds exactly on rational chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .chains import PLChain, boundary, subdivide
from .exact_math import to_rational


class DimensionUnsupported(ValueError):
    pass


class BoundaryNotOnGrid(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    eps: Fraction = Fraction(1)
    k_max: int = 2

    def __post_init__(self):
        object.__setattr__(self, "eps", to_rational(self.eps))
        if self.eps <= 0:
            raise ValueError("grid cell size must be positive")


class GridChain:
    """Integer combination of oriented cubical cells (anchor index, axes)."""

    def __init__(self, dim: int, eps, cells=None):
        self.dim = dim
        self.eps = to_rational(eps)
        self.cells: dict = {}
        for key, coef in (cells or {}).items():
            self.add(key[0], key[1], coef)

    def add(self, anchor, axes, coef: int):
        if not coef:
            return
        key = (tuple(anchor), tuple(axes))
        v = self.cells.get(key, 0) + coef
        if v:
            self.cells[key] = v
        else:
            self.cells.pop(key, None)

    def __add__(self, other: "GridChain") -> "GridChain":
        out = GridChain(self.dim, self.eps, self.cells)
        for (anchor, axes), c in other.cells.items():
            out.add(anchor, axes, c)
        return out

    def scaled(self, m: int) -> "GridChain":
        out = GridChain(self.dim, self.eps)
        if m:
            out.cells = {k: c * m for k, c in self.cells.items()}
        return out

    def is_zero(self) -> bool:
        return not self.cells

    def cell_count(self) -> int:
        """Sum of |coefficients|: the combinatorial mass."""
        return sum(abs(c) for c in self.cells.values())

    def mass(self) -> float:
        return float(self.eps) ** self.dim * self.cell_count()

    def boundary(self) -> "GridChain":
        out = GridChain(self.dim - 1, self.eps)
        for (anchor, axes), c in self.cells.items():
            for pos, ax in enumerate(axes):
                rest = axes[:pos] + axes[pos + 1 :]
                shifted = list(anchor)
                shifted[ax] += 1
                sign = (-1) ** pos
                # [a; axes] boundary: sum_pos (-1)^pos ([a + e_ax; rest] - [a; rest])
                out.add(tuple(shifted), rest, sign * c)
                out.add(anchor, rest, -sign * c)
        return out

    def to_pl(self) -> PLChain:
        eps = self.eps
        out = PLChain(self.dim)
        for (anchor, axes), c in self.cells.items():
            base = [eps * a for a in anchor]
            for verts, sign in _cube_simplices(base, axes, eps):
                out._add_term(c * sign, verts)
        return out

    def __eq__(self, other):
        return isinstance(other, GridChain) and self.cells == other.cells and (
            self.dim == other.dim or not self.cells
        )

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "eps": f"{self.eps.numerator}/{self.eps.denominator}",
            "cells": [
                {"anchor": list(a), "axes": list(ax), "coef": c}
                for (a, ax), c in sorted(self.cells.items())
            ],
        }


def _cube_simplices(base, axes, eps):
    """Oriented triangulation (Kuhn) of a cube cell: sum over axis orderings."""
    from itertools import permutations

    from .quadrature import _perm_sign

    k = len(axes)
    if k == 0:
        return [([tuple(base)], 1)]
    out = []
    for perm in permutations(range(k)):
        p = list(base)
        verts = [tuple(p)]
        for idx in perm:
            p[axes[idx]] += eps
            verts.append(tuple(p))
        out.append((verts, _perm_sign(perm)))
    return out


# -- the deformation ------------------------------------------------------------


def _round_index(p, eps):
    return tuple(math.floor(c / eps + Fraction(1, 2)) for c in p)


def _staircase(u, w, eps) -> GridChain:
    """Grid path u -> w moving axis 0 first, then axis 1, ..."""
    path = GridChain(1, eps)
    cur = list(u)
    for ax in range(len(u)):
        while cur[ax] != w[ax]:
            if w[ax] > cur[ax]:
                path.add(tuple(cur), (ax,), 1)
                cur[ax] += 1
            else:
                cur[ax] -= 1
                path.add(tuple(cur), (ax,), -1)
    return path


def _ladder(edge_anchor, axis, q, eps) -> GridChain:
    """2-chain H with dH = P(u) + e - P(u + e_axis), P(x) = staircase from q to x."""
    u = list(edge_anchor)
    n = len(u)
    H = GridChain(2, eps)
    # corner where the two staircases separate
    z = [u[j] if j <= axis else q[j] for j in range(n)]
    for j in range(axis + 1, n):
        while z[j] != u[j]:
            if u[j] > z[j]:
                H.add(tuple(z), (axis, j), -1)
                z[j] += 1
            else:
                z[j] -= 1
                H.add(tuple(z), (axis, j), 1)
    return H


def fill_grid_loop(loop: GridChain, q) -> GridChain:
    """Ladder filling of a closed grid 1-chain, based at grid vertex q."""
    F = GridChain(2, loop.eps)
    for (anchor, axes), c in loop.cells.items():
        F = F + _ladder(anchor, axes[0], q, loop.eps).scaled(c)
    return F


def _cone(apex, c: PLChain) -> PLChain:
    out = PLChain(c.dim + 1)
    for key, coef in c.terms.items():
        out._add_term(coef, (apex,) + key)
    return out


@dataclass
class Deformation:
    P: GridChain
    R: PLChain
    boundary_term: PLChain  # h(dc); zero when dc is a grid chain
    level: int
    cells_met: int
    stats: dict = field(default_factory=dict)


class _Deformer:
    def __init__(self, eps, n, level):
        self.eps = eps
        self.n = n
        self.level = level
        self._D: dict = {}
        self._h: dict = {}

    def grid_point(self, idx):
        return tuple(self.eps * i for i in idx)

    def D_small(self, key) -> GridChain:
        k = len(key) - 1
        r = [_round_index(v, self.eps) for v in key]
        if k == 0:
            g = GridChain(0, self.eps)
            g.add(r[0], (), 1)
            return g
        if k == 1:
            return _staircase(r[0], r[1], self.eps)
        loop = GridChain(1, self.eps)
        for i in range(3):
            face = r[:i] + r[i + 1 :]
            loop = loop + _staircase(face[0], face[1], self.eps).scaled((-1) ** i)
        return fill_grid_loop(loop, r[0])

    def D(self, key) -> GridChain:
        """Chain map on a canonical simplex: deform its level-m subdivision."""
        if key in self._D:
            return self._D[key]
        k = len(key) - 1
        single = PLChain(k)
        single.terms = {key: 1}
        out = GridChain(k, self.eps)
        for sub, coef in subdivide(single, self.level).terms.items():
            out = out + self.D_small(sub).scaled(coef)
        self._D[key] = out
        return out

    def h(self, key) -> PLChain:
        if key in self._h:
            return self._h[key]
        k = len(key) - 1
        if k == 0:
            target = self.grid_point(_round_index(key[0], self.eps))
            out = PLChain.simplex(key[0], target)
        else:
            single = PLChain(k)
            single.terms = {key: 1}
            z = self.D(key).to_pl() - single - self.h_chain(boundary(single))
            out = _cone(key[0], z)
        self._h[key] = out
        return out

    def D_chain(self, c: PLChain) -> GridChain:
        out = GridChain(c.dim, self.eps)
        for key, coef in c.terms.items():
            out = out + self.D(key).scaled(coef)
        return out

    def h_chain(self, c: PLChain) -> PLChain:
        out = PLChain(c.dim + 1)
        for key, coef in c.terms.items():
            out = out + self.h(key) * coef
        return out


def _subdivision_level(c: PLChain, eps) -> int:
    longest_sq = Fraction(0)
    for key in c.terms:
        for p, q in combinations(key, 2):
            d = sum((x - y) ** 2 for x, y in zip(p, q))
            longest_sq = max(longest_sq, d)
    if not longest_sq:
        return 1
    return max(1, math.ceil(math.sqrt(longest_sq) / eps))


def _is_grid_cell(key, eps) -> bool:
    if any(c % eps for v in key for c in v):
        return False
    if len(key) == 1:
        return True
    if len(key) == 2:
        diff = [abs(x - y) for x, y in zip(key[0], key[1])]
        return sorted(diff)[-1] == eps and sum(1 for d in diff if d) == 1
    return False


def deform_chain(c: PLChain, grid: GridSpec) -> Deformation:
    """D(c), h(c) and h(dc) with D(c) = c + dh(c) + h(dc)."""
    if c.dim > grid.k_max:
        raise DimensionUnsupported(f"grid deformation supports k <= {grid.k_max}, got {c.dim}")
    n = c.ambient_dim or 0
    level = _subdivision_level(c, grid.eps)
    deformer = _Deformer(grid.eps, n, level)
    P = deformer.D_chain(c)
    R = deformer.h_chain(c)
    bterm = deformer.h_chain(boundary(c)) if c.dim >= 1 else PLChain(c.dim)
    cubes = {
        _round_index(v, grid.eps)
        for key in subdivide(c, level).terms
        for v in key
    }
    return Deformation(P=P, R=R, boundary_term=bterm, level=level, cells_met=len(cubes))


def grid_deform(c: PLChain, grid: GridSpec = GridSpec()):
    """Deform c onto the grid: returns (P, R) with P.to_pl() == c + boundary(R).

    If c has a boundary, it must consist of grid vertices (k = 1) or unit
    grid edges (k = 2).
    """
    if c.dim > grid.k_max:
        raise DimensionUnsupported(f"grid deformation supports k <= {grid.k_max}, got {c.dim}")
    if c.dim >= 1:
        bd = boundary(c)
        bad = [key for key in bd.terms if not _is_grid_cell(key, grid.eps)]
        if bad:
            raise BoundaryNotOnGrid(f"{len(bad)} boundary simplices are not grid cells")
    res = deform_chain(c, grid)
    return res.P, res.R


def deformation_stats(a, c: PLChain, res: Deformation, grid: GridSpec) -> dict:
    from .chains import mass

    mc = mass(a, c, "euclidean")
    mp = res.P.mass()
    return {
        "input_mass": mc,
        "grid_mass": mp,
        "mass_ratio": mp / mc if mc else None,
        "cell_count": res.P.cell_count(),
        "cells_met": res.cells_met,
        "correction_mass": mass(a, res.R, "euclidean") if not res.R.is_zero() else 0.0,
        "subdivision_level": res.level,
        "eps": float(grid.eps),
    }
