"""Exact rational scalars and sparse multivariate polynomials over Q.

Rationals are :class:`fractions.Fraction`. Polynomials are immutable maps
from exponent tuples to nonzero Fraction coefficients.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC

import numpy as np

Rational = Fraction


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions, floats (exactly) and "p/q" strings to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to Rational")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class MultiPoly:
    """Sparse polynomial in ``nvars`` variables with Fraction coefficients.

    >>> x = MultiPoly.variable(0, 2); y = MultiPoly.variable(1, 2)
    >>> str((x + y) * (x + y))
    'x1^2 + 2*x1*x2 + x2^2'
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        clean = {}
        if terms:
            for exps, c in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent vector has wrong length")
                c = to_rational(c)
                if c:
                    clean[tuple(exps)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars, terms):
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, value, nvars: int) -> "MultiPoly":
        value = to_rational(value)
        return cls._raw(nvars, {(0,) * nvars: value} if value else {})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "MultiPoly":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls._raw(nvars, {tuple(exps): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: int) -> int:
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError(
                    f"variable-count mismatch: {self.nvars} vs {other.nvars}"
                )
            return other
        return MultiPoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return MultiPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, factor) -> "MultiPoly":
        factor = to_rational(factor)
        if not factor:
            return MultiPoly.zero(self.nvars)
        return MultiPoly._raw(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return MultiPoly.zero(self.nvars)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly._raw(self.nvars, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == MultiPoly.constant(other, self.nvars).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def derivative(self, var: int) -> "MultiPoly":
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range")
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k:
                ne = list(e)
                ne[var] = k - 1
                out[tuple(ne)] = c * k
        return MultiPoly._raw(self.nvars, out)

    def substitute_zero(self, var: int) -> "MultiPoly":
        """Set variable ``var`` to 0 (keeps the variable slot)."""
        return MultiPoly._raw(self.nvars, {e: c for e, c in self.terms.items() if e[var] == 0})

    def drop_variables(self, nvars: int) -> "MultiPoly":
        """Project onto the first ``nvars`` variables; the rest must be absent."""
        out = {}
        for e, c in self.terms.items():
            if any(e[nvars:]):
                raise ValueError("polynomial depends on dropped variables")
            out[e[:nvars]] = c
        return MultiPoly._raw(nvars, out)

    def extend_variables(self, nvars: int) -> "MultiPoly":
        pad = (0,) * (nvars - self.nvars)
        return MultiPoly._raw(nvars, {e + pad: c for e, c in self.terms.items()})

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        """Evaluate at a point; exact for rational input, float otherwise.

        Variables are eliminated Horner-style from the last to the first, so the
        float evaluation order is fixed.
        """
        if len(x) != self.nvars:
            raise ValueError(f"point has dimension {len(x)}, expected {self.nvars}")
        exact = all(isinstance(v, (int, Fraction)) for v in x)
        if exact:
            x = [Fraction(v) for v in x]
        else:
            x = [float(v) for v in x]
        zero = Fraction(0) if exact else 0.0
        if not self.terms:
            return zero
        return _horner(sorted(self.terms.items(), key=lambda t: t[0]), x, 0, exact)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at the rows of ``points``."""
        points = np.asarray(points, dtype=float)
        if not self.terms:
            return np.zeros(points.shape[0])
        exps = np.array(list(self.terms.keys()), dtype=float)
        coefs = np.array([float(c) for c in self.terms.values()])
        return np.prod(points[:, None, :] ** exps[None, :, :], axis=2) @ coefs

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def to_text(self, names=None) -> str:
        """Canonical serialization: graded-lex descending, coefficients as p/q."""
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k
            )
            parts.append(f"{format_rational(c)}*{mono}" if mono else format_rational(c))
        return " + ".join(parts)

    @classmethod
    def from_text(cls, text: str, nvars: int, names=None) -> "MultiPoly":
        names = names or [f"x{i + 1}" for i in range(nvars)]
        index = {n: i for i, n in enumerate(names)}
        text = text.strip()
        if text == "0":
            return cls.zero(nvars)
        terms = {}
        for part in text.split(" + "):
            factors = part.split("*")
            coef = Fraction(factors[0])
            exps = [0] * nvars
            for f in factors[1:]:
                m = re.fullmatch(r"(\w+?)(?:\^(\d+))?", f)
                if not m or m.group(1) not in index:
                    raise ValueError(f"bad monomial factor {f!r}")
                exps[index[m.group(1)]] += int(m.group(2) or 1)
            terms[tuple(exps)] = terms.get(tuple(exps), 0) + coef
        return cls(nvars, terms)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                out.append(str(c))
            elif c == 1:
                out.append(mono)
            elif c == -1:
                out.append("-" + mono)
            else:
                out.append(f"{c}*{mono}")
        return " + ".join(out).replace("+ -", "- ")

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {self.to_text()!r})"


def _horner(terms, x, var, exact):
    # terms sorted lexicographically by exponent tuple; group on exponent of `var`
    if var == len(x):
        return terms[0][1] if exact else float(terms[0][1])
    groups: dict[int, list] = {}
    for e, c in terms:
        groups.setdefault(e[var], []).append((e, c))
    result = Fraction(0) if exact else 0.0
    prev = max(groups)
    for k in sorted(groups, reverse=True):
        result = result * x[var] ** (prev - k) + _horner(groups[k], x, var + 1, exact)
        prev = k
    return result * x[var] ** prev


class UniMajorant:
    """Univariate polynomial with nonnegative coefficients, M(r) = sum a_k r^k."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = [to_rational(c) for c in coefficients]
        if any(c < 0 for c in coeffs):
            raise ValueError("majorant coefficients must be nonnegative")
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, r):
        if isinstance(r, (int, Fraction)):
            acc = Fraction(0)
        else:
            acc = 0.0
            r = float(r)
        for c in reversed(self.coefficients):
            acc = acc * r + (c if isinstance(acc, Fraction) else float(c))
        return acc

    def pointwise_max(self, other: "UniMajorant") -> "UniMajorant":
        """Coefficient-wise max; dominates both on [0, inf)."""
        a, b = self.coefficients, other.coefficients
        size = max(len(a), len(b))
        a = a + (Fraction(0),) * (size - len(a))
        b = b + (Fraction(0),) * (size - len(b))
        return UniMajorant([max(p, q) for p, q in zip(a, b)])

    def __add__(self, other):
        if not isinstance(other, UniMajorant):
            other = UniMajorant([other])
        a, b = self.coefficients, other.coefficients
        size = max(len(a), len(b))
        return UniMajorant(
            [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(size)]
        )

    __radd__ = __add__

    def scale(self, factor) -> "UniMajorant":
        return UniMajorant([c * to_rational(factor) for c in self.coefficients])

    def __eq__(self, other):
        return isinstance(other, UniMajorant) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def to_text(self) -> str:
        if not self.coefficients:
            return "0"
        parts = []
        for k in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[k]
            if c:
                parts.append(format_rational(c) + ("" if k == 0 else "*r" if k == 1 else f"*r^{k}"))
        return " + ".join(parts)

    def __repr__(self):
        return f"UniMajorant({self.to_text()!r})"


def majorize(p: MultiPoly) -> UniMajorant:
    """Nondecreasing majorant M with |p(x)| <= M(||x||_2).

    Each monomial of degree k is bounded by ||x||^k, so the coefficient of r^k
    is the sum of |coefficients| of the degree-k terms.
    """
    buckets: dict[int, Fraction] = {}
    for e, c in p.terms.items():
        k = sum(e)
        buckets[k] = buckets.get(k, Fraction(0)) + abs(c)
    if not buckets:
        return UniMajorant([])
    return UniMajorant([buckets.get(k, 0) for k in range(max(buckets) + 1)])


def poly_arith(p: MultiPoly, q, op: str, factor=None) -> MultiPoly:
    """Dispatch form of the ring operations: op in {add, sub, mul, scale}."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "scale":
        return p.scale(factor if factor is not None else q)
    raise ValueError(f"unknown op {op!r}")


def solve_rational(matrix, rhs):
    """Solve a square rational system exactly by Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n] for row in aug]


def rational_det(matrix) -> Fraction:
    m = [[Fraction(v) for v in row] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def integer_det(matrix) -> int:
    """Fraction-free (Bareiss) determinant of an integer matrix."""
    m = [list(row) for row in matrix]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pk = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pk - mik * row_k[j]) // prev
        prev = pk
    return sign * m[n - 1][n - 1] if n else 1


def row_reduce(vectors):
    """Reduced row echelon basis (list of Fraction lists) of the span of ``vectors``."""
    rows = [[Fraction(v) for v in vec] for vec in vectors if any(vec)]
    if not rows:
        return []
    ncols = len(rows[0])
    basis = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    basis = [row for row in rows[:r]]
    return basis


def rank(vectors) -> int:
    return len(row_reduce(vectors))
