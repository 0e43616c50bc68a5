"""Named finite-dimensional spaces, tensor products, and multilinear plumbing.

Multi-index convention, used verbatim by every module: a tensor product
V_0 (x) V_1 (x) ... (x) V_k is indexed row-major with the *leftmost factor
slowest*, i.e. the flat index of (i_0, ..., i_k) is
i_0 * (d_1 * ... * d_k) + i_1 * (d_2 * ... * d_k) + ... + i_k.
Kronecker products of maps follow the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exactla import Matrix, Vector, ZERO, ONE, check_budget

Q = Fraction


@dataclass(frozen=True)
class Space:
    """A based vector space with labelled basis and an optional grade."""

    name: str
    dim: int
    basis_labels: tuple[str, ...]
    grade: Optional[int] = None

    def __post_init__(self):
        if len(self.basis_labels) != self.dim:
            raise ValueError("label count does not match dimension")
        if len(set(self.basis_labels)) != self.dim:
            raise ValueError(f"duplicate basis labels in space {self.name}")

    @staticmethod
    def make(name: str, labels: Sequence[str], grade: Optional[int] = None) -> "Space":
        return Space(name, len(labels), tuple(labels), grade)

    def basis_vector(self, i: int) -> Vector:
        v = [ZERO] * self.dim
        v[i] = ONE
        return tuple(v)

    def index_of(self, label: str) -> int:
        return self.basis_labels.index(label)


def dual_space(v: Space) -> Space:
    return Space(v.name + "*", v.dim, tuple(l + "*" for l in v.basis_labels), v.grade)


def tensor_space(*spaces: Space) -> Space:
    if not spaces:
        raise ValueError("tensor of no spaces")
    if len(spaces) == 1:
        return spaces[0]
    dim = 1
    for s in spaces:
        dim *= s.dim
    check_budget(dim)
    labels = spaces[0].basis_labels
    for s in spaces[1:]:
        labels = tuple(a + "⊗" + b for a in labels for b in s.basis_labels)
    name = "(" + "⊗".join(s.name for s in spaces) + ")"
    grade: Optional[int] = None
    if all(s.grade is not None for s in spaces):
        grade = sum(s.grade for s in spaces)  # type: ignore[misc]
    return Space(name, dim, labels, grade)


@dataclass(frozen=True)
class LinMap:
    """A linear map with explicit source/target spaces and exact matrix."""

    source: Space
    target: Space
    matrix: Matrix

    def __post_init__(self):
        if self.matrix.rows != self.target.dim or self.matrix.cols != self.source.dim:
            raise ValueError(
                f"matrix shape {self.matrix.rows}x{self.matrix.cols} does not match "
                f"{self.target.dim}x{self.source.dim}"
            )

    @staticmethod
    def identity(space: Space) -> "LinMap":
        return LinMap(space, space, Matrix.identity(space.dim))

    @staticmethod
    def zero(source: Space, target: Space) -> "LinMap":
        return LinMap(source, target, Matrix.zeros(target.dim, source.dim))

    @staticmethod
    def from_entries(source: Space, target: Space, entries: dict) -> "LinMap":
        """Build from a sparse {(target_label, source_label): value} dict."""
        m = [[ZERO] * source.dim for _ in range(target.dim)]
        for (tl, sl), val in entries.items():
            m[target.index_of(tl)][source.index_of(sl)] = Fraction(val)
        return LinMap(source, target, Matrix.from_rows(m, cols=source.dim))

    def apply(self, v: Sequence[Fraction]) -> Vector:
        return self.matrix.apply(v)

    def compose(self, inner: "LinMap") -> "LinMap":
        """self after inner."""
        if inner.target.dim != self.source.dim:
            raise ValueError("composition dimension mismatch")
        return LinMap(inner.source, self.target, self.matrix.mul(inner.matrix))

    def add(self, other: "LinMap") -> "LinMap":
        return LinMap(self.source, self.target, self.matrix.add(other.matrix))

    def sub(self, other: "LinMap") -> "LinMap":
        return LinMap(self.source, self.target, self.matrix.sub(other.matrix))

    def scale(self, c: Fraction) -> "LinMap":
        return LinMap(self.source, self.target, self.matrix.scale(c))


def tensor(*objs):
    """Tensor product of Spaces, or Kronecker product of LinMaps."""
    if all(isinstance(o, Space) for o in objs):
        return tensor_space(*objs)
    if all(isinstance(o, LinMap) for o in objs):
        src = tensor_space(*(o.source for o in objs))
        tgt = tensor_space(*(o.target for o in objs))
        m = objs[0].matrix
        for o in objs[1:]:
            m = m.kron(o.matrix)
        return LinMap(src, tgt, m)
    raise TypeError("tensor expects all Spaces or all LinMaps")


@dataclass(frozen=True)
class TensorElement:
    """An element of a tensor product, in the leftmost-slowest convention."""

    factors: tuple[Space, ...]
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        dim = 1
        for f in self.factors:
            dim *= f.dim
        if len(self.coords) != dim:
            raise ValueError("coordinate length does not match factor dimensions")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)


def flat_index(multi: Sequence[int], dims: Sequence[int]) -> int:
    idx = 0
    for i, d in zip(multi, dims):
        idx = idx * d + i
    return idx


def multi_index(idx: int, dims: Sequence[int]) -> tuple[int, ...]:
    out = []
    for d in reversed(dims):
        out.append(idx % d)
        idx //= d
    return tuple(reversed(out))


def permutation_sign(perm: Sequence[int], grades: Sequence[int]) -> Fraction:
    """Koszul sign of moving leg i to position perm[i], legs graded by grades."""
    sign = 1
    n = len(perm)
    for i in range(n):
        for j in range(i + 1, n):
            if perm[i] > perm[j]:
                if (grades[i] % 2) and (grades[j] % 2):
                    sign = -sign
    return Fraction(sign)


def leg_permutation_matrix(dims: Sequence[int], perm: Sequence[int],
                           grades: Optional[Sequence[int]] = None) -> Matrix:
    """Matrix sending e_{i_0...i_k} to ± e at positions perm (old leg i goes to
    new position perm[i]), with Koszul signs when grades are supplied."""
    n_total = 1
    for d in dims:
        n_total *= d
    check_budget(n_total * n_total)
    new_dims = [0] * len(dims)
    for i, p in enumerate(perm):
        new_dims[p] = dims[i]
    sign = permutation_sign(perm, grades) if grades is not None else ONE
    ent = [ZERO] * (n_total * n_total)
    for src in range(n_total):
        multi = multi_index(src, dims)
        new_multi = [0] * len(dims)
        for i, p in enumerate(perm):
            new_multi[p] = multi[i]
        dst = flat_index(new_multi, new_dims)
        ent[dst * n_total + src] = sign
    return Matrix(n_total, n_total, tuple(ent))


def permute_map_output(m: Matrix, dims: Sequence[int], perm: Sequence[int],
                       grades: Optional[Sequence[int]] = None) -> Matrix:
    """Compose a leg permutation after a map without materialising the
    permutation matrix: rows of m are reindexed (and signed) in place."""
    n_total = 1
    for d in dims:
        n_total *= d
    if m.rows != n_total:
        raise ValueError("row count does not match leg dimensions")
    new_dims = [0] * len(dims)
    for i, p in enumerate(perm):
        new_dims[p] = dims[i]
    sign = permutation_sign(perm, grades) if grades is not None else ONE
    rows: list = [None] * n_total
    for src in range(n_total):
        multi = multi_index(src, dims)
        new_multi = [0] * len(dims)
        for i, p in enumerate(perm):
            new_multi[p] = multi[i]
        dst = flat_index(new_multi, new_dims)
        row = m.row(src)
        rows[dst] = row if sign == 1 else tuple(-x for x in row)
    return Matrix(n_total, m.cols, tuple(x for r in rows for x in r))


def permute_legs(t: TensorElement, perm: Sequence[int], graded: bool = False) -> TensorElement:
    """Reorder tensor legs; transpositions of odd-graded legs contribute -1."""
    if len(perm) != len(t.factors):
        raise ValueError("permutation length does not match leg count")
    grades = None
    if graded:
        if any(f.grade is None for f in t.factors):
            raise ValueError("graded permutation requires graded factors")
        grades = [f.grade for f in t.factors]  # type: ignore[list-item]
    mat = leg_permutation_matrix(t.dims, perm, grades)
    new_factors = [None] * len(t.factors)
    for i, p in enumerate(perm):
        new_factors[p] = t.factors[i]
    return TensorElement(tuple(new_factors), mat.apply(t.coords))


def curry(f: Sequence[Fraction], v: Space, w: Space) -> LinMap:
    """Turn a functional on V⊗W into the map V -> W* with (curry f)(x)(y) = f(x⊗y)."""
    if len(f) != v.dim * w.dim:
        raise ValueError("functional length does not match V⊗W")
    wd = dual_space(w)
    rows = [[Fraction(f[i * w.dim + j]) for i in range(v.dim)] for j in range(w.dim)]
    return LinMap(v, wd, Matrix.from_rows(rows, cols=v.dim))


def uncurry(m: LinMap) -> tuple[Fraction, ...]:
    """Inverse of curry: a map V -> W* back to the functional on V⊗W."""
    v_dim = m.source.dim
    w_dim = m.target.dim
    out = [ZERO] * (v_dim * w_dim)
    for i in range(v_dim):
        col = [m.matrix[j, i] for j in range(w_dim)]
        for j in range(w_dim):
            out[i * w_dim + j] = col[j]
    return tuple(out)


def functional_precompose(f: Sequence[Fraction], op: Matrix) -> Vector:
    """Coordinates of f∘op when f is a functional on op's target."""
    if len(f) != op.rows:
        raise ValueError("functional length does not match operator target")
    out = [ZERO] * op.cols
    for i, fi in enumerate(f):
        if fi == 0:
            continue
        base = i * op.cols
        for j in range(op.cols):
            e = op.entries[base + j]
            if e != 0:
                out[j] += fi * e
    return tuple(out)
