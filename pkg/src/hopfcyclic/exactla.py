"""Exact rational dense linear algebra.

Scalars are ``fractions.Fraction`` (arbitrary precision, always reduced,
positive denominator), so kernels, ranks and quotients are exact: every
identity asserted downstream is a literal equality of rationals, never a
tolerance check.

Subspaces are kept in reduced row-echelon form, which makes the RREF basis a
canonical representative: two subspaces are equal iff their basis matrices
are equal.  A module-level entry budget guards against accidental
combinatorial blowup in tensor constructions; exceeding it raises
``BudgetExceededError`` instead of thrashing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Q = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)

Vector = tuple[Fraction, ...]


class BudgetExceededError(RuntimeError):
    """A construction would exceed the configured matrix-entry budget."""


class ContainmentError(ValueError):
    """quotient_dim was asked for a quotient by a non-subspace."""


_budget = 10**6


def set_budget(n: int) -> None:
    global _budget
    _budget = int(n)


def get_budget() -> int:
    return _budget


def check_budget(n_entries: int) -> None:
    if n_entries > _budget:
        raise BudgetExceededError(
            f"{n_entries} matrix entries exceed the budget of {_budget}"
        )


_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


def format_rational(x: Fraction) -> str:
    """Render as "p/q", or "p" when the denominator is 1."""
    return str(x)


def parse_rational(s: str) -> Fraction:
    """Strictly parse "p" or "p/q" with q > 0.  No floats, no whitespace."""
    if not isinstance(s, str) or not _RATIONAL_RE.match(s):
        raise ValueError(f"not a rational literal: {s!r}")
    if "/" in s:
        num, den = s.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in rational literal: {s!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(s))


@dataclass(frozen=True)
class Matrix:
    """Immutable dense matrix over the rationals, row-major entries."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match shape")
        check_budget(self.rows * self.cols)

    @staticmethod
    def zeros(rows: int, cols: int) -> "Matrix":
        check_budget(rows * cols)
        return Matrix(rows, cols, (ZERO,) * (rows * cols))

    @staticmethod
    def identity(n: int) -> "Matrix":
        check_budget(n * n)
        ent = [ZERO] * (n * n)
        for i in range(n):
            ent[i * n + i] = ONE
        return Matrix(n, n, tuple(ent))

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Fraction]], cols: Optional[int] = None) -> "Matrix":
        rows = [tuple(Fraction(x) for x in r) for r in rows]
        if rows:
            cols = len(rows[0])
            if any(len(r) != cols for r in rows):
                raise ValueError("ragged rows")
        elif cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        flat = tuple(x for r in rows for x in r)
        return Matrix(len(rows), cols, flat)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def row_list(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries)

    def transpose(self) -> "Matrix":
        ent = tuple(
            self.entries[i * self.cols + j]
            for j in range(self.cols)
            for i in range(self.rows)
        )
        return Matrix(self.cols, self.rows, ent)

    def mul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        check_budget(self.rows * other.cols)
        n, m, k = self.rows, self.cols, other.cols
        out = [ZERO] * (n * k)
        oe = other.entries
        for i in range(n):
            base = i * m
            orow = i * k
            for j in range(m):
                a = self.entries[base + j]
                if a == 0:
                    continue
                ob = j * k
                for c in range(k):
                    b = oe[ob + c]
                    if b != 0:
                        out[orow + c] += a * b
        return Matrix(n, k, tuple(out))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return self.mul(other)

    def add(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in add")
        return Matrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def sub(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in sub")
        return Matrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def scale(self, c: Fraction) -> "Matrix":
        c = Fraction(c)
        return Matrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product; leftmost factor is the slow index."""
        rows = self.rows * other.rows
        cols = self.cols * other.cols
        check_budget(rows * cols)
        out = [ZERO] * (rows * cols)
        for i in range(self.rows):
            for j in range(self.cols):
                a = self.entries[i * self.cols + j]
                if a == 0:
                    continue
                for p in range(other.rows):
                    obase = p * other.cols
                    rbase = (i * other.rows + p) * cols + j * other.cols
                    for q in range(other.cols):
                        b = other.entries[obase + q]
                        if b != 0:
                            out[rbase + q] = a * b
        return Matrix(rows, cols, tuple(out))

    def apply(self, v: Sequence[Fraction]) -> Vector:
        """Matrix times column vector."""
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        out = []
        for i in range(self.rows):
            base = i * self.cols
            s = ZERO
            for j, x in enumerate(v):
                if x != 0:
                    e = self.entries[base + j]
                    if e != 0:
                        s += e * x
            out.append(s)
        return tuple(out)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        return Matrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        rows = []
        for i in range(self.rows):
            rows.append(self.row(i) + other.row(i))
        return Matrix(self.rows, self.cols + other.cols, tuple(x for r in rows for x in r))


def _rref_rows(rows: list[list[Fraction]], cols: int) -> tuple[list[list[Fraction]], list[int]]:
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(cols):
        piv = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][c]
        if lead != 1:
            inv = ONE / lead
            rr = rows[r]
            for j in range(c, cols):
                if rr[j] != 0:
                    rr[j] *= inv
        rr = rows[r]
        support = [j for j in range(c, cols) if rr[j] != 0]
        for i in range(nrows):
            if i == r:
                continue
            f = rows[i][c]
            if f != 0:
                ri = rows[i]
                for j in support:
                    ri[j] -= f * rr[j]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row-echelon form and the strictly increasing pivot columns."""
    rows, pivots = _rref_rows(m.row_list(), m.cols)
    return Matrix.from_rows(rows, cols=m.cols), tuple(pivots)


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def kernel_basis(m: Matrix) -> "Subspace":
    """Canonical (RREF) basis of the right null space {v : m v = 0}."""
    red, pivots = rref(m)
    pivset = set(pivots)
    free = [c for c in range(m.cols) if c not in pivset]
    vecs = []
    for f in free:
        v = [ZERO] * m.cols
        v[f] = ONE
        for r, p in enumerate(pivots):
            v[p] = -red[r, f]
        vecs.append(v)
    return Subspace.from_vectors(vecs, m.cols)


def solve_linear(m: Matrix, rhs: Sequence[Fraction]) -> Optional[Vector]:
    """One particular solution of m x = rhs, or None if inconsistent.

    Deterministic choice: free variables are set to 0 in RREF coordinates.
    """
    if len(rhs) != m.rows:
        raise ValueError("rhs length must equal row count")
    aug = m.hstack(Matrix(m.rows, 1, tuple(Fraction(x) for x in rhs)))
    red, pivots = rref(aug)
    if m.cols in pivots:
        return None
    x = [ZERO] * m.cols
    for r, p in enumerate(pivots):
        x[p] = red[r, m.cols]
    return tuple(x)


@dataclass(frozen=True)
class Subspace:
    """A subspace of Q^n given by its canonical RREF row basis."""

    ambient_dim: int
    basis: Matrix

    @staticmethod
    def from_vectors(vecs: Sequence[Sequence[Fraction]], ambient_dim: int) -> "Subspace":
        rows = [list(map(Fraction, v)) for v in vecs]
        for v in rows:
            if len(v) != ambient_dim:
                raise ValueError("vector length does not match ambient dimension")
        red, pivots = _rref_rows(rows, ambient_dim)
        red = red[: len(pivots)]
        return Subspace(ambient_dim, Matrix.from_rows(red, cols=ambient_dim))

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, Matrix.from_rows([], cols=ambient_dim))

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, Matrix.identity(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def pivots(self) -> tuple[int, ...]:
        piv = []
        for i in range(self.basis.rows):
            row = self.basis.row(i)
            for j, x in enumerate(row):
                if x != 0:
                    piv.append(j)
                    break
        return tuple(piv)

    def reduce_vector(self, v: Sequence[Fraction]) -> Vector:
        """Subtract the basis contribution, zeroing all pivot coordinates."""
        v = list(map(Fraction, v))
        if len(v) != self.ambient_dim:
            raise ValueError("vector length mismatch")
        for i, p in enumerate(self.pivots):
            f = v[p]
            if f != 0:
                row = self.basis.row(i)
                for j, x in enumerate(row):
                    if x != 0:
                        v[j] -= f * x
        return tuple(v)

    def contains_vector(self, v: Sequence[Fraction]) -> bool:
        return all(x == 0 for x in self.reduce_vector(v))

    def coords_of(self, v: Sequence[Fraction]) -> Optional[Vector]:
        """Coordinates of v in the RREF basis, or None if v is outside."""
        if not self.contains_vector(v):
            return None
        return tuple(Fraction(v[p]) for p in self.pivots)

    def vector_of(self, coords: Sequence[Fraction]) -> Vector:
        if len(coords) != self.dim:
            raise ValueError("coordinate length mismatch")
        out = [ZERO] * self.ambient_dim
        for c, i in zip(coords, range(self.dim)):
            if c != 0:
                row = self.basis.row(i)
                for j, x in enumerate(row):
                    if x != 0:
                        out[j] += Fraction(c) * x
        return tuple(out)

    def add(self, other: "Subspace") -> "Subspace":
        self._check_ambient(other)
        vecs = self.basis.row_list() + other.basis.row_list()
        return Subspace.from_vectors(vecs, self.ambient_dim)

    def intersection(self, other: "Subspace") -> "Subspace":
        self._check_ambient(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        # x = u A = v B  <=>  (u, -v) in ker [A^T | B^T]
        stacked = self.basis.transpose().hstack(other.basis.transpose())
        ker = kernel_basis(stacked)
        vecs = []
        for i in range(ker.dim):
            uv = ker.basis.row(i)
            u = uv[: self.dim]
            x = [ZERO] * self.ambient_dim
            for c, r in zip(u, range(self.dim)):
                if c != 0:
                    row = self.basis.row(r)
                    for j, val in enumerate(row):
                        if val != 0:
                            x[j] += c * val
            vecs.append(x)
        return Subspace.from_vectors(vecs, self.ambient_dim)

    def contains(self, other: "Subspace") -> bool:
        self._check_ambient(other)
        return all(
            self.contains_vector(other.basis.row(i)) for i in range(other.dim)
        )

    def quotient_dim(self, other: "Subspace") -> int:
        self._check_ambient(other)
        if not self.contains(other):
            raise ContainmentError("quotient_dim requires the second argument to be contained in the first")
        return self.dim - other.dim

    def _check_ambient(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")


def subspace_calc(a: Subspace, b: Subspace, op: str):
    """Subspace lattice calculator: op in {sum, intersection, quotient_dim, contains}."""
    if op == "sum":
        return a.add(b)
    if op == "intersection":
        return a.intersection(b)
    if op == "quotient_dim":
        return a.quotient_dim(b)
    if op == "contains":
        return a.contains(b)
    raise ValueError(f"unknown subspace operation {op!r}")


@dataclass(frozen=True)
class QuotientSpace:
    """Q^n / relations, with the non-pivot coordinates as canonical basis."""

    ambient_dim: int
    relations: Subspace

    def __post_init__(self):
        if self.relations.ambient_dim != self.ambient_dim:
            raise ValueError("relation subspace has wrong ambient dimension")

    @property
    def dim(self) -> int:
        return self.ambient_dim - self.relations.dim

    @property
    def free_columns(self) -> tuple[int, ...]:
        piv = set(self.relations.pivots)
        return tuple(j for j in range(self.ambient_dim) if j not in piv)

    def project(self, v: Sequence[Fraction]) -> Vector:
        """Quotient coordinates of an ambient vector."""
        red = self.relations.reduce_vector(v)
        return tuple(red[j] for j in self.free_columns)

    def lift(self, coords: Sequence[Fraction]) -> Vector:
        """Canonical ambient representative of quotient coordinates."""
        if len(coords) != self.dim:
            raise ValueError("coordinate length mismatch")
        out = [ZERO] * self.ambient_dim
        for c, j in zip(coords, self.free_columns):
            out[j] = Fraction(c)
        return tuple(out)


class MapDescentError(ValueError):
    """An operator does not descend/restrict as required."""


def restrict_map(op: Matrix, src: Subspace, tgt: Subspace) -> Matrix:
    """Matrix of op on subspace coordinates; error if op(src) is not inside tgt."""
    cols = []
    for i in range(src.dim):
        y = op.apply(src.basis.row(i))
        c = tgt.coords_of(y)
        if c is None:
            raise MapDescentError("operator image leaves the target subspace")
        cols.append(c)
    rows = [[cols[j][i] for j in range(src.dim)] for i in range(tgt.dim)]
    return Matrix.from_rows(rows, cols=src.dim)


def induce_map(op: Matrix, src: QuotientSpace, tgt: QuotientSpace) -> Matrix:
    """Matrix induced on quotients; error if op does not map relations to relations."""
    for i in range(src.relations.dim):
        y = op.apply(src.relations.basis.row(i))
        if not tgt.relations.contains_vector(y):
            raise MapDescentError("operator does not preserve the relation subspace")
    cols = []
    for j in src.free_columns:
        e = [ZERO] * src.ambient_dim
        e[j] = ONE
        cols.append(tgt.project(op.apply(e)))
    rows = [[cols[j][i] for j in range(src.dim)] for i in range(tgt.dim)]
    return Matrix.from_rows(rows, cols=src.dim)


def image_subspace(op: Matrix, src: Subspace) -> Subspace:
    """Span of op applied to a subspace (given in ambient coordinates)."""
    vecs = [op.apply(src.basis.row(i)) for i in range(src.dim)]
    return Subspace.from_vectors(vecs, op.rows)
