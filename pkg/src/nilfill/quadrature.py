"""Edgewise simplex subdivision and Grundmann-Moeller rules on simplices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from math import factorial

import numpy as np


@dataclass(frozen=True)
class QuadratureSpec:
    """order: Grundmann-Moeller index q (rule of degree 2q+1);
    max_subdivision: largest edgewise refinement factor tried;
    tolerance: relative Richardson error target."""

    order: int = 1
    max_subdivision: int = 64
    tolerance: float = 1e-8
    abs_floor: float = 1e-12

    @classmethod
    def from_dict(cls, data) -> "QuadratureSpec":
        return cls(**{k: data[k] for k in ("order", "max_subdivision", "tolerance", "abs_floor") if k in data})

    def richardson_power(self) -> int:
        return 2 * self.order + 2


class NonConvergent(RuntimeError):
    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = last_values


def _perm_sign(perm) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


@lru_cache(maxsize=64)
def edgewise_subdivision(k: int, m: int):
    """Level-m edgewise subdivision of a k-simplex.

    Returns (numerators, signs): ``numerators[t, a, j]`` is m times the j-th
    barycentric coordinate of vertex a of sub-simplex t; ``signs[t]`` is +1
    when the listed vertex order matches the parent orientation. The
    subdivision restricted to a face is the edgewise subdivision of that face
    with the induced vertex order, so neighbouring simplices stay compatible.
    """
    if k == 0:
        return np.full((1, 1, 1), m, dtype=np.int64), np.ones(1, dtype=np.int64)
    # staircase coordinates m >= y_1 >= ... >= y_k >= 0
    anchors = np.indices((m,) * k).reshape(k, -1).T
    all_verts, all_signs = [], []
    for perm in permutations(range(k)):
        offsets = np.zeros((k + 1, k), dtype=np.int64)
        for step, axis in enumerate(perm, start=1):
            offsets[step] = offsets[step - 1]
            offsets[step, axis] += 1
        verts = anchors[:, None, :] + offsets[None, :, :]
        ok = np.all(verts[..., :-1] >= verts[..., 1:], axis=(1, 2)) & np.all(
            verts[..., 0] <= m, axis=1
        )
        verts = verts[ok]
        all_verts.append(verts)
        all_signs.append(np.full(len(verts), _perm_sign(perm), dtype=np.int64))
    y = np.concatenate(all_verts)
    signs = np.concatenate(all_signs)
    bary = np.empty(y.shape[:2] + (k + 1,), dtype=np.int64)
    bary[..., 0] = m - y[..., 0]
    bary[..., 1:k] = y[..., :-1] - y[..., 1:]
    bary[..., k] = y[..., -1]
    # deterministic order
    order = np.lexsort(bary.reshape(len(bary), -1).T[::-1])
    return bary[order], signs[order]


@lru_cache(maxsize=16)
def grundmann_moeller(k: int, q: int):
    """Barycentric points (P, k+1) and weights (P,) summing to 1; exact for degree 2q+1."""
    pts, wts = [], []
    for i in range(q + 1):
        denom = k + 2 * q + 1 - 2 * i
        w = (-1) ** i * 2.0 ** (-2 * q) * denom ** (2 * q + 1) / (
            factorial(i) * factorial(k + 2 * q + 1 - i)
        )
        w *= factorial(k)
        for combo in combinations_with_replacement(range(k + 1), q - i):
            beta = np.zeros(k + 1)
            for c in combo:
                beta[c] += 1
            pts.append((2 * beta + 1) / denom)
            wts.append(w)
    return np.array(pts), np.array(wts)


@lru_cache(maxsize=64)
def refined_rule(k: int, m: int, q: int):
    """Composite rule: GM rule on each sub-simplex of the level-m subdivision."""
    bary, _ = edgewise_subdivision(k, m)
    pts, wts = grundmann_moeller(k, q)
    sub = bary.astype(float) / m  # (S, k+1, k+1)
    points = np.einsum("pa,sab->spb", pts, sub).reshape(-1, k + 1)
    weights = np.tile(wts, len(sub)) / len(sub)
    return points, weights


def simplex_volume_factor(k: int) -> float:
    return 1.0 / factorial(k)
