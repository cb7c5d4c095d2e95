"""Nilpotent Lie algebras over Q given by structure constants.

Every validated algebra lives in a triangular basis: ``[e_i, e_j]`` only has
components on ``e_k`` with ``k > j``. The basis is adapted to the lower
central series, so the grading pieces W_1, ..., W_s are coordinate blocks.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .exact_math import format_rational, rank, row_reduce, solve_rational, to_rational


class AlgebraError(ValueError):
    pass


class JacobiViolated(AlgebraError):
    def __init__(self, triple):
        self.triple = triple
        super().__init__(f"Jacobi identity fails on basis triple {triple}")


class NotNilpotent(AlgebraError):
    pass


@dataclass(frozen=True)
class StructureConstants:
    """Raw bracket table. ``table[(i, j)] = {k: c}`` for 0 <= i < j < n (0-based)."""

    n: int
    table: tuple = ()

    @classmethod
    def from_dict(cls, n: int, brackets: dict) -> "StructureConstants":
        if n < 1:
            raise AlgebraError("dimension must be at least 1")
        merged: dict = {}
        for (i, j), coeffs in brackets.items():
            if not (0 <= i < n and 0 <= j < n):
                raise AlgebraError(f"bracket index ({i}, {j}) out of range")
            if i == j:
                if any(to_rational(c) for c in coeffs.values()):
                    raise AlgebraError("[e_i, e_i] must vanish")
                continue
            sign = 1
            if i > j:
                i, j, sign = j, i, -1
            row = merged.setdefault((i, j), {})
            for k, c in coeffs.items():
                k = int(k)
                if not 0 <= k < n:
                    raise AlgebraError(f"output index {k} out of range")
                row[k] = row.get(k, Fraction(0)) + sign * to_rational(c)
        table = tuple(
            sorted(
                ((i, j), tuple(sorted((k, c) for k, c in row.items() if c)))
                for (i, j), row in merged.items()
                if any(row.values())
            )
        )
        return cls(n, table)

    def as_dict(self) -> dict:
        return {ij: dict(row) for ij, row in self.table}

    def bracket_basis(self, i: int, j: int) -> list:
        out = [Fraction(0)] * self.n
        if i == j:
            return out
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        for (a, b), row in self.table:
            if (a, b) == (i, j):
                for k, c in row:
                    out[k] = sign * c
        return out


def _bracket_raw(sc: StructureConstants, u, v):
    n = sc.n
    out = [0] * n
    for (i, j), row in sc.table:
        w = u[i] * v[j] - u[j] * v[i]
        for k, c in row:
            out[k] = out[k] + w * c
    return out


@dataclass(frozen=True)
class NilpotentAlgebra:
    constants: StructureConstants
    s: int
    lcs_dims: tuple
    grading: tuple  # grading[i] = 0-based basis indices spanning W_{i+1}
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.constants.n

    @property
    def grading_dims(self) -> tuple:
        return tuple(len(w) for w in self.grading)

    @property
    def weights(self) -> tuple:
        """weights[k] = i such that e_k spans part of W_i."""
        w = [0] * self.n
        for depth, block in enumerate(self.grading, start=1):
            for k in block:
                w[k] = depth
        return tuple(w)

    @property
    def homogeneous_dimension(self) -> int:
        return sum(i * d for i, d in enumerate(self.grading_dims, start=1))

    @property
    def generator_indices(self) -> tuple:
        return tuple(self.grading[0]) if self.grading else ()

    def bracket(self, u, v):
        if len(u) != self.n or len(v) != self.n:
            raise ValueError(f"vectors must have length {self.n}")
        return _bracket_raw(self.constants, u, v)

    def is_triangular(self) -> bool:
        return all(k > j for (i, j), row in self.constants.table for k, c in row)

    def __str__(self):
        return self.name or f"algebra(n={self.n})"


def bracket(a: NilpotentAlgebra, u, v):
    return a.bracket(u, v)


def _unit(n, k):
    v = [Fraction(0)] * n
    v[k] = Fraction(1)
    return v


def check_jacobi(sc: StructureConstants) -> None:
    n = sc.n
    basis = [_unit(n, k) for k in range(n)]
    for i, j, k in combinations(range(n), 3):
        x, y, z = basis[i], basis[j], basis[k]
        t1 = _bracket_raw(sc, x, _bracket_raw(sc, y, z))
        t2 = _bracket_raw(sc, y, _bracket_raw(sc, z, x))
        t3 = _bracket_raw(sc, z, _bracket_raw(sc, x, y))
        if any(a + b + c for a, b, c in zip(t1, t2, t3)):
            raise JacobiViolated((i + 1, j + 1, k + 1))


def lower_central_series(sc: StructureConstants) -> list:
    """Echelon bases of g = g_1 > g_2 > ... > g_s > 0."""
    n = sc.n
    current = [_unit(n, k) for k in range(n)]
    series = [current]
    while True:
        spanning = [
            _bracket_raw(sc, _unit(n, i), v) for i in range(n) for v in series[-1]
        ]
        nxt = row_reduce(spanning)
        if not nxt:
            return series
        if len(nxt) == len(series[-1]):
            raise NotNilpotent(
                f"lower central series stabilizes at dimension {len(nxt)}"
            )
        series.append(nxt)


def _adapted_basis(n: int, series: list):
    """Basis vectors grouped as W_1, ..., W_s; prefers coordinate vectors."""
    chosen: list = []
    blocks = []
    for g in reversed(series):
        candidates = [_unit(n, k) for k in range(n) if rank(g + [_unit(n, k)]) == len(g)]
        candidates += g
        block = []
        for v in candidates:
            if rank(chosen + [v]) > len(chosen):
                chosen.append(v)
                block.append(v)
            if len(chosen) == len(g):
                break
        blocks.append(block)
    blocks.reverse()
    return blocks


def change_basis(sc: StructureConstants, new_basis: list) -> StructureConstants:
    """Structure constants in the basis whose vectors (old coordinates) are given."""
    n = sc.n
    cols = [[new_basis[c][r] for c in range(n)] for r in range(n)]
    brackets = {}
    for a, b in combinations(range(n), 2):
        w = _bracket_raw(sc, new_basis[a], new_basis[b])
        if any(w):
            y = solve_rational(cols, w)
            brackets[(a, b)] = {k: c for k, c in enumerate(y) if c}
    return StructureConstants.from_dict(n, brackets)


def triangularize(raw: StructureConstants, name: str = ""):
    """Return (algebra, P) where the columns of P are the new basis in old coordinates."""
    check_jacobi(raw)
    series = lower_central_series(raw)
    n = raw.n
    blocks = _adapted_basis(n, series)
    new_basis = [v for block in blocks for v in block]
    P = [[new_basis[c][r] for c in range(n)] for r in range(n)]
    identity = all(new_basis[k] == _unit(n, k) for k in range(n))
    sc = raw if identity else change_basis(raw, new_basis)
    grading = []
    start = 0
    for block in blocks:
        grading.append(tuple(range(start, start + len(block))))
        start += len(block)
    algebra = NilpotentAlgebra(
        constants=sc,
        s=len(series),
        lcs_dims=tuple(len(g) for g in series),
        grading=tuple(grading),
        name=name,
    )
    if not algebra.is_triangular():  # pragma: no cover - guaranteed by construction
        raise AlgebraError("triangularization failed")
    return algebra, P


def validate(raw: StructureConstants, name: str = "") -> NilpotentAlgebra:
    return triangularize(raw, name)[0]


# -- catalog -----------------------------------------------------------------


def abelian(n: int) -> NilpotentAlgebra:
    if n < 1:
        raise AlgebraError("abelian(n) needs n >= 1")
    return validate(StructureConstants.from_dict(n, {}), f"abelian({n})")


def heisenberg(dim: int) -> NilpotentAlgebra:
    if dim < 3 or dim % 2 == 0:
        raise AlgebraError("heisenberg(2m+1) needs an odd dimension >= 3")
    m = (dim - 1) // 2
    brackets = {(i, m + i): {dim - 1: 1} for i in range(m)}
    return validate(StructureConstants.from_dict(dim, brackets), f"heisenberg({dim})")


def filiform(n: int) -> NilpotentAlgebra:
    if n < 3:
        raise AlgebraError("filiform(n) needs n >= 3")
    brackets = {(0, i): {i + 1: 1} for i in range(1, n - 1)}
    return validate(StructureConstants.from_dict(n, brackets), f"filiform({n})")


def unitriangular_basis(m: int) -> list:
    """Matrix units E_ab (a < b, 0-based) ordered by superdiagonal, then row."""
    return [(a, a + gap) for gap in range(1, m) for a in range(m - gap)]


def unitriangular(m: int) -> NilpotentAlgebra:
    if m < 2:
        raise AlgebraError("unitriangular(m) needs m >= 2")
    basis = unitriangular_basis(m)
    index = {ab: k for k, ab in enumerate(basis)}
    brackets = {}
    for p, q in combinations(range(len(basis)), 2):
        (a, b), (c, d) = basis[p], basis[q]
        coeffs = {}
        # E_ab E_cd - E_cd E_ab
        if b == c:
            coeffs[index[(a, d)]] = coeffs.get(index[(a, d)], 0) + 1
        if d == a:
            coeffs[index[(c, b)]] = coeffs.get(index[(c, b)], 0) - 1
        if coeffs:
            brackets[(p, q)] = coeffs
    return validate(
        StructureConstants.from_dict(len(basis), brackets), f"unitriangular({m})"
    )


_CATALOG = {
    "abelian": abelian,
    "heisenberg": heisenberg,
    "filiform": filiform,
    "unitriangular": unitriangular,
}


def catalog(name: str, *params) -> NilpotentAlgebra:
    """Look up a named family, e.g. ``catalog("heisenberg", 3)`` or ``catalog("heisenberg(3)")``."""
    if not params:
        m = re.fullmatch(r"\s*(\w+)\s*[(:]\s*(\d+)\s*\)?\s*", name)
        if not m:
            raise AlgebraError(f"cannot parse algebra name {name!r}")
        name, params = m.group(1), (int(m.group(2)),)
    factory = _CATALOG.get(name.lower())
    if factory is None:
        raise AlgebraError(f"unknown algebra {name!r}; known: {sorted(_CATALOG)}")
    if len(params) != 1:
        raise AlgebraError(f"{name} takes exactly one integer parameter")
    return factory(int(params[0]))


# -- JSON --------------------------------------------------------------------


def constants_from_json(data) -> StructureConstants:
    """Parse ``{"n": int, "brackets": [{"i":, "j":, "coeffs": {"k": "p/q"}}]}`` (1-based)."""
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    brackets = {}
    for entry in data.get("brackets", []):
        i, j = int(entry["i"]) - 1, int(entry["j"]) - 1
        coeffs = {int(k) - 1: to_rational(v) for k, v in entry["coeffs"].items()}
        key = (i, j)
        if key in brackets:
            raise AlgebraError(f"duplicate bracket entry ({i + 1}, {j + 1})")
        brackets[key] = coeffs
    return StructureConstants.from_dict(n, brackets)


def constants_to_json(sc: StructureConstants) -> dict:
    return {
        "n": sc.n,
        "brackets": [
            {
                "i": i + 1,
                "j": j + 1,
                "coeffs": {str(k + 1): format_rational(c) for k, c in row},
            }
            for (i, j), row in sc.table
        ],
    }


def load_algebra(spec: str) -> NilpotentAlgebra:
    """Resolve a catalog name or a path to a structure-constants JSON file."""
    try:
        return catalog(spec)
    except AlgebraError as exc:
        if "cannot parse" not in str(exc):
            raise
    with open(spec) as fh:
        return validate(constants_from_json(json.load(fh)), name=spec)


def describe(a: NilpotentAlgebra) -> dict:
    return {
        "name": a.name,
        "n": a.n,
        "s": a.s,
        "lcs_dims": list(a.lcs_dims),
        "grading_dims": list(a.grading_dims),
        "homogeneous_dimension": a.homogeneous_dimension,
        "constants": constants_to_json(a.constants),
    }
