"""Degree-truncated differential graded calculi and derived DG constructions.

The universal calculus of an algebra A adjoins an external unit: the degree-n
component is Ã⊗A^{⊗n} with Ã = k·1̃ ⊕ A, a basis form being
s_0·ds_1⋯ds_n with s_0 ∈ {1̃} ∪ basis(A).  Products are computed by Leibniz
rewriting (ds)t = d(st) − s·dt into this normal form, and d shifts the leading
slot into a fresh 1̃ (and kills 1̃-led forms), so d² = 0 holds by construction.

The universal calculus of a coalgebra C is realised as the graded linear dual
of the universal calculus of the dual algebra C*: the degree-n component is
C̃⊗C^{⊗n} with C̃ = k·ê ⊕ C, the comultiplication is the transpose of the
form product, and the differential is minus the transpose of the form
differential (the sign is pinned by the convolution-calculus identities).
Every build is gated by machine-checked DG axioms, so a wrong convention
cannot silently corrupt downstream results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exactla import Matrix, ONE, ZERO, Vector, check_budget
from .multilin import LinMap, Space, multi_index, permute_map_output, tensor_space
from .structures import (
    AlgebraSpec,
    CoalgebraSpec,
    HopfAlgebraSpec,
    SymmetryBundle,
    iterated_comult_matrix,
)

Q = Fraction


class CalculusGateError(AssertionError):
    """A machine-checked DG axiom failed during a calculus build."""

    def __init__(self, identity: str, detail: str = ""):
        super().__init__(f"calculus gate failed: {identity}" + (f" ({detail})" if detail else ""))
        self.identity = identity


def _merge(d: dict, key, val) -> None:
    new = d.get(key, ZERO) + val
    if new == 0:
        d.pop(key, None)
    else:
        d[key] = new


def _cols_of(m: Matrix) -> list[list[tuple[int, Fraction]]]:
    """Column-wise sparse view of a matrix."""
    cols: list[list[tuple[int, Fraction]]] = [[] for _ in range(m.cols)]
    for i in range(m.rows):
        base = i * m.cols
        for j in range(m.cols):
            x = m.entries[base + j]
            if x != 0:
                cols[j].append((i, x))
    return cols


class FormBasis:
    """Index bookkeeping for degree-n universal forms over a d-dim algebra.

    A basis form is a tuple (s0, s1, ..., sn): s0 in 0..d (0 encodes the
    adjoined 1̃), inner slots in 0..d-1.  Flat indices are leftmost-slowest.
    """

    def __init__(self, d: int, degree: int):
        self.d = d
        self.degree = degree
        self.dim = (d + 1) * d**degree

    def index(self, t: tuple[int, ...]) -> int:
        idx = t[0]
        for s in t[1:]:
            idx = idx * self.d + s
        return idx

    def tuple_of(self, idx: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.degree):
            out.append(idx % self.d)
            idx //= self.d
        out.append(idx)
        return tuple(reversed(out))

    def labels(self, alg_labels: Sequence[str], lead0: str = "1̃", sep: str = "·d") -> tuple[str, ...]:
        out = []
        for idx in range(self.dim):
            t = self.tuple_of(idx)
            lbl = lead0 if t[0] == 0 else alg_labels[t[0] - 1]
            for s in t[1:]:
                lbl += sep + alg_labels[s]
            out.append(lbl)
        return tuple(out)


class FormsCore:
    """Products, differential and bases of the truncated universal calculus
    of a plain (non-equivariant) algebra."""

    def __init__(self, alg: AlgebraSpec, max_degree: int):
        self.alg = alg
        self.N = max_degree
        self.d = alg.space.dim
        self.bases = [FormBasis(self.d, n) for n in range(max_degree + 1)]
        for b in self.bases:
            check_budget(b.dim)
        self._mult_cols = _cols_of(alg.mult.matrix)
        self._prod_cache: dict[tuple[tuple, tuple], dict[tuple, Fraction]] = {}

    def _mult_basis(self, a: int, b: int) -> list[tuple[int, Fraction]]:
        return self._mult_cols[a * self.d + b]

    def times_zero_form(self, t: tuple[int, ...], s0: int) -> dict[tuple, Fraction]:
        """Product (form t)·(degree-0 form s0); s0 in 0..d with 0 = 1̃.

        Leibniz normal form: one merge of adjacent slots (l, l+1) of the
        concatenation (t, b) for each l, with sign (-1)^(n-l)."""
        if s0 == 0:
            return {t: ONE}
        b = s0 - 1
        n = len(t) - 1
        out: dict[tuple, Fraction] = {}
        slots = list(t) + [b]
        for l in range(n + 1):
            sign = ONE if (n - l) % 2 == 0 else -ONE
            left, right = slots[l], slots[l + 1]
            if l == 0:
                rest = tuple(slots[2:])
                if left == 0:
                    _merge(out, (right + 1,) + rest, sign)
                else:
                    for c, val in self._mult_basis(left - 1, right):
                        _merge(out, (c + 1,) + rest, sign * val)
            else:
                prefix = tuple(slots[:l])
                suffix = tuple(slots[l + 2:])
                for c, val in self._mult_basis(left, right):
                    _merge(out, prefix + (c,) + suffix, sign * val)
        return out

    def product(self, t1: tuple[int, ...], t2: tuple[int, ...]) -> dict[tuple, Fraction]:
        """Normal-form coordinates of the product of two basis forms."""
        key = (t1, t2)
        cached = self._prod_cache.get(key)
        if cached is not None:
            return cached
        base = self.times_zero_form(t1, t2[0])
        tail = t2[1:]
        if tail:
            out: dict[tuple, Fraction] = {}
            for k, v in base.items():
                _merge(out, k + tail, v)
        else:
            out = base
        self._prod_cache[key] = out
        return out

    def diff_tuple(self, t: tuple[int, ...]) -> dict[tuple, Fraction]:
        if t[0] == 0:
            return {}
        return {(0, t[0] - 1) + t[1:]: ONE}

    def mult_matrix(self, i: int, j: int) -> Matrix:
        bi, bj, bo = self.bases[i], self.bases[j], self.bases[i + j]
        rows, cols = bo.dim, bi.dim * bj.dim
        check_budget(rows * cols)
        ent = [ZERO] * (rows * cols)
        for ki in range(bi.dim):
            ti = bi.tuple_of(ki)
            for kj in range(bj.dim):
                col = ki * bj.dim + kj
                for t, val in self.product(ti, bj.tuple_of(kj)).items():
                    ent[bo.index(t) * cols + col] = val
        return Matrix(rows, cols, tuple(ent))

    def diff_matrix(self, n: int) -> Matrix:
        bn, bo = self.bases[n], self.bases[n + 1]
        ent = [ZERO] * (bo.dim * bn.dim)
        for k in range(bn.dim):
            for t, val in self.diff_tuple(bn.tuple_of(k)).items():
                ent[bo.index(t) * bn.dim + k] = val
        return Matrix(bo.dim, bn.dim, tuple(ent))

    def unit_vector(self) -> Vector:
        v = [ZERO] * self.bases[0].dim
        v[0] = ONE
        return tuple(v)


@dataclass(eq=False)
class DGTruncation:
    """A degree-truncated DG (co)algebra with explicit structure matrices.

    kind "algebra":   mult[(i,j)]: comp_i ⊗ comp_j -> comp_{i+j},
                      diff[n]: comp_n -> comp_{n+1} for n < N.
    kind "coalgebra": comult[(i,j)]: comp_{i+j} -> comp_i ⊗ comp_j,
                      diff[n-1]: comp_n -> comp_{n-1} for 1 <= n <= N.
    Optional equivariance: per-degree H-action matrices (H⊗comp_n -> comp_n)
    or H-coaction matrices (comp_n -> H⊗comp_n).
    """

    max_degree: int
    kind: str
    components: tuple[Space, ...]
    mult: dict = field(default_factory=dict)
    comult: dict = field(default_factory=dict)
    diff: tuple = ()
    unit: Optional[Vector] = None
    counit: Optional[Vector] = None
    hopf: Optional[HopfAlgebraSpec] = None
    action: Optional[tuple] = None
    coaction: Optional[tuple] = None
    basis_tuples: Optional[tuple] = None
    carrier_dim: int = 0

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.components)


def theta_diff(dg: DGTruncation, n: int) -> Matrix:
    """d: Θ_n -> Θ_{n-1} of a coalgebra truncation (n >= 1)."""
    if dg.kind != "coalgebra":
        raise ValueError("theta_diff is for coalgebra truncations")
    if n < 1 or n > dg.max_degree:
        raise ValueError("degree out of range")
    return dg.diff[n - 1]


def _act_cols(act: LinMap, dh: int, dv: int) -> list[list[list[tuple[int, Fraction]]]]:
    """cols[h][v] -> sparse column of (basis h) acting on (basis v)."""
    cols = _cols_of(act.matrix)
    return [[cols[h * dv + v] for v in range(dv)] for h in range(dh)]


def _diagonal_action_matrix(hopf: HopfAlgebraSpec, act_cols, basis: FormBasis,
                            counit: Vector) -> Matrix:
    """Diagonal H-action on degree-n forms: the n-fold coproduct of h acts
    legwise, the adjoined slot-0 element absorbing a counit factor."""
    dh = hopf.dim
    n = basis.degree
    delta_cols = _cols_of(iterated_comult_matrix(hopf, n))
    dim = basis.dim
    check_budget(dim * dh * dim)
    ent = [ZERO] * (dim * dh * dim)
    hdims = (dh,) * (n + 1)
    for h in range(dh):
        for k in range(dim):
            t = basis.tuple_of(k)
            col = h * dim + k
            acc: dict[tuple, Fraction] = {}
            for flat_h, cval in delta_cols[h]:
                hs = multi_index(flat_h, hdims)
                if t[0] == 0:
                    e = counit[hs[0]]
                    if e == 0:
                        continue
                    terms: dict[tuple, Fraction] = {(0,): cval * e}
                else:
                    terms = {}
                    for c, aval in act_cols[hs[0]][t[0] - 1]:
                        _merge(terms, (c + 1,), cval * aval)
                for leg in range(1, n + 1):
                    if not terms:
                        break
                    nxt: dict[tuple, Fraction] = {}
                    for prefix, pval in terms.items():
                        for c, aval in act_cols[hs[leg]][t[leg]]:
                            _merge(nxt, prefix + (c,), pval * aval)
                    terms = nxt
                for tt, vv in terms.items():
                    _merge(acc, tt, vv)
            for tt, vv in acc.items():
                ent[basis.index(tt) * (dh * dim) + col] = vv
    return Matrix(dim, dh * dim, tuple(ent))


def _diagonal_coaction_matrix(hopf: HopfAlgebraSpec, coact: LinMap, basis: FormBasis) -> Matrix:
    """Diagonal H-coaction on degree-n forms: legwise coactions with the
    H-components multiplied together; the adjoined slot-0 coacts trivially."""
    dh = hopf.dim
    dv = basis.d
    coact_cols = _cols_of(coact.matrix)
    mult_cols = _cols_of(hopf.algebra.mult.matrix)
    unit = hopf.algebra.unit
    n = basis.degree
    dim = basis.dim
    check_budget(dh * dim * dim)
    ent = [ZERO] * (dh * dim * dim)
    for k in range(dim):
        t = basis.tuple_of(k)
        terms: dict[tuple[int, tuple], Fraction] = {}
        if t[0] == 0:
            for u, uval in enumerate(unit):
                if uval != 0:
                    terms[(u, (0,))] = uval
        else:
            for r, val in coact_cols[t[0] - 1]:
                h0, v0 = divmod(r, dv)
                _merge(terms, (h0, (v0 + 1,)), val)
        for leg in range(1, n + 1):
            nxt: dict[tuple[int, tuple], Fraction] = {}
            for (hacc, prefix), pval in terms.items():
                for r, val in coact_cols[t[leg]]:
                    hl, vl = divmod(r, dv)
                    for hnew, mval in mult_cols[hacc * dh + hl]:
                        _merge(nxt, (hnew, prefix + (vl,)), pval * val * mval)
            terms = nxt
        for (h, tt), vv in terms.items():
            ent[(h * dim + basis.index(tt)) * dim + k] = vv
    return Matrix(dh * dim, dim, tuple(ent))


def _gate(cond: bool, identity: str, detail: str = "") -> None:
    if not cond:
        raise CalculusGateError(identity, detail)


def _check_dg_algebra(dg: DGTruncation, assoc_cap: int = 3) -> None:
    N = dg.max_degree
    dims = dg.dims
    for n in range(N - 1):
        _gate(dg.diff[n + 1].mul(dg.diff[n]).is_zero(), "d∘d=0", f"degree {n}")
    for i in range(N + 1):
        for j in range(N - i):
            m = dg.mult[(i, j)]
            lhs = dg.diff[i + j].mul(m)
            t1 = dg.mult[(i + 1, j)].mul(dg.diff[i].kron(Matrix.identity(dims[j])))
            t2 = dg.mult[(i, j + 1)].mul(Matrix.identity(dims[i]).kron(dg.diff[j]))
            rhs = t1.add(t2) if i % 2 == 0 else t1.sub(t2)
            _gate(lhs.sub(rhs).is_zero(), "graded Leibniz", f"bidegree ({i},{j})")
    u = Matrix.from_rows([[x] for x in dg.unit], cols=1)
    for n in range(N + 1):
        m_l = dg.mult[(0, n)].mul(u.kron(Matrix.identity(dims[n])))
        m_r = dg.mult[(n, 0)].mul(Matrix.identity(dims[n]).kron(u))
        _gate(m_l.sub(Matrix.identity(dims[n])).is_zero(), "unit.left", f"degree {n}")
        _gate(m_r.sub(Matrix.identity(dims[n])).is_zero(), "unit.right", f"degree {n}")
    cap = min(N, assoc_cap)
    for i in range(cap + 1):
        for j in range(cap + 1 - i):
            for k in range(cap + 1 - i - j):
                lhs = dg.mult[(i + j, k)].mul(dg.mult[(i, j)].kron(Matrix.identity(dims[k])))
                rhs = dg.mult[(i, j + k)].mul(Matrix.identity(dims[i]).kron(dg.mult[(j, k)]))
                _gate(lhs.sub(rhs).is_zero(), "associativity", f"degrees ({i},{j},{k})")


def build_omega_A(bundle: SymmetryBundle, max_degree: int) -> DGTruncation:
    """Universal calculus of a module algebra, with the legwise diagonal
    H-action (1̃ absorbing a counit factor); gates: DG algebra axioms,
    H-linearity of d, and the module-algebra law on every component."""
    if bundle.kind != "A":
        raise ValueError("build_omega_A expects a kind-A bundle")
    alg: AlgebraSpec = bundle.carrier  # type: ignore[assignment]
    core = FormsCore(alg, max_degree)
    comps = tuple(
        Space(f"Ω{n}({alg.space.name})", core.bases[n].dim,
              core.bases[n].labels(alg.space.basis_labels), grade=n)
        for n in range(max_degree + 1)
    )
    mult = {(i, j): core.mult_matrix(i, j)
            for i in range(max_degree + 1) for j in range(max_degree + 1 - i)}
    diff = tuple(core.diff_matrix(n) for n in range(max_degree))
    h = bundle.hopf
    acts = _act_cols(bundle.structure.act, h.dim, alg.space.dim)  # type: ignore[union-attr]
    action = tuple(
        _diagonal_action_matrix(h, acts, core.bases[n], h.coalgebra.counit)
        for n in range(max_degree + 1)
    )
    dg = DGTruncation(
        max_degree=max_degree, kind="algebra", components=comps, mult=mult,
        diff=diff, unit=core.unit_vector(), hopf=h, action=action,
        basis_tuples=tuple(tuple(core.bases[n].tuple_of(k) for k in range(core.bases[n].dim))
                           for n in range(max_degree + 1)),
        carrier_dim=alg.space.dim,
    )
    _check_dg_algebra(dg)
    dh = h.dim
    dims = dg.dims
    mh = h.algebra.mult.matrix
    dmh = h.coalgebra.comult.matrix
    uh = Matrix.from_rows([[x] for x in h.algebra.unit], cols=1)
    for n in range(max_degree + 1):
        a = action[n]
        lhs = a.mul(mh.kron(Matrix.identity(dims[n])))
        rhs = a.mul(Matrix.identity(dh).kron(a))
        _gate(lhs.sub(rhs).is_zero(), "H-module law on forms", f"degree {n}")
        _gate(a.mul(uh.kron(Matrix.identity(dims[n]))).sub(Matrix.identity(dims[n])).is_zero(),
              "H-module unit on forms", f"degree {n}")
        if n < max_degree:
            lin = dg.diff[n].mul(a)
            rin = action[n + 1].mul(Matrix.identity(dh).kron(dg.diff[n]))
            _gate(lin.sub(rin).is_zero(), "H-linearity of d", f"degree {n}")
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            m = dg.mult[(i, j)]
            lhs = action[i + j].mul(Matrix.identity(dh).kron(m))
            inner = permute_map_output(
                dmh.kron(Matrix.identity(dims[i] * dims[j])),
                (dh, dh, dims[i], dims[j]), (0, 2, 1, 3))
            rhs = m.mul(action[i].kron(action[j])).mul(inner)
            _gate(lhs.sub(rhs).is_zero(), "module-algebra law on forms", f"bidegree ({i},{j})")
    return dg


def build_omega_B(bundle: SymmetryBundle, max_degree: int) -> DGTruncation:
    """Universal calculus of a comodule algebra: the total coaction multiplies
    the legwise H-components; gates include H-colinearity of d and of the
    product on every component."""
    if bundle.kind != "B":
        raise ValueError("build_omega_B expects a kind-B bundle")
    alg: AlgebraSpec = bundle.carrier  # type: ignore[assignment]
    core = FormsCore(alg, max_degree)
    comps = tuple(
        Space(f"Γ{n}({alg.space.name})", core.bases[n].dim,
              core.bases[n].labels(alg.space.basis_labels), grade=n)
        for n in range(max_degree + 1)
    )
    mult = {(i, j): core.mult_matrix(i, j)
            for i in range(max_degree + 1) for j in range(max_degree + 1 - i)}
    diff = tuple(core.diff_matrix(n) for n in range(max_degree))
    h = bundle.hopf
    coaction = tuple(
        _diagonal_coaction_matrix(h, bundle.structure.coact, core.bases[n])  # type: ignore[union-attr]
        for n in range(max_degree + 1)
    )
    dg = DGTruncation(
        max_degree=max_degree, kind="algebra", components=comps, mult=mult,
        diff=diff, unit=core.unit_vector(), hopf=h, coaction=coaction,
        basis_tuples=tuple(tuple(core.bases[n].tuple_of(k) for k in range(core.bases[n].dim))
                           for n in range(max_degree + 1)),
        carrier_dim=alg.space.dim,
    )
    _check_dg_algebra(dg)
    dh = h.dim
    dims = dg.dims
    dmh = h.coalgebra.comult.matrix
    eh = Matrix.from_rows([list(h.coalgebra.counit)], cols=dh)
    mh = h.algebra.mult.matrix
    for n in range(max_degree + 1):
        r = coaction[n]
        lhs = dmh.kron(Matrix.identity(dims[n])).mul(r)
        rhs = Matrix.identity(dh).kron(r).mul(r)
        _gate(lhs.sub(rhs).is_zero(), "comodule coassociativity on forms", f"degree {n}")
        _gate(eh.kron(Matrix.identity(dims[n])).mul(r).sub(Matrix.identity(dims[n])).is_zero(),
              "comodule counit on forms", f"degree {n}")
        if n < max_degree:
            lin = coaction[n + 1].mul(dg.diff[n])
            rin = Matrix.identity(dh).kron(dg.diff[n]).mul(coaction[n])
            _gate(lin.sub(rin).is_zero(), "H-colinearity of d", f"degree {n}")
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            m = dg.mult[(i, j)]
            lhs = coaction[i + j].mul(m)
            inner = permute_map_output(
                coaction[i].kron(coaction[j]),
                (dh, dims[i], dh, dims[j]), (0, 2, 1, 3))
            rhs = mh.kron(m).mul(inner)
            _gate(lhs.sub(rhs).is_zero(), "H-colinearity of the product", f"bidegree ({i},{j})")
    return dg


def dual_algebra(coalg: CoalgebraSpec) -> AlgebraSpec:
    """The dual algebra C* of a coalgebra, by transposing structure constants."""
    sp = Space(coalg.space.name + "*", coalg.space.dim,
               tuple(l + "*" for l in coalg.space.basis_labels))
    mult = LinMap(tensor_space(sp, sp), sp, coalg.comult.matrix.transpose())
    return AlgebraSpec(sp, mult, tuple(coalg.counit))


def build_omega_C(bundle: SymmetryBundle, max_degree: int) -> DGTruncation:
    """Universal DG coalgebra of a module coalgebra, as the graded dual of the
    universal calculus of C*: components C̃⊗C^{⊗n} (C̃ = k·ê ⊕ C),
    comultiplication the transposed form product, d minus the transposed form
    differential, H acting legwise with ê absorbing a counit factor.

    Gates: d²=0, graded coassociativity, the graded coderivation law, counit
    laws, and H-linearity of both d and the comultiplication."""
    if bundle.kind != "C":
        raise ValueError("build_omega_C expects a kind-C bundle")
    coalg: CoalgebraSpec = bundle.carrier  # type: ignore[assignment]
    core = FormsCore(dual_algebra(coalg), max_degree)
    comps = []
    for n in range(max_degree + 1):
        basis = core.bases[n]
        labels = []
        for k in range(basis.dim):
            t = basis.tuple_of(k)
            lbl = "ê" if t[0] == 0 else coalg.space.basis_labels[t[0] - 1]
            for s in t[1:]:
                lbl += "⊗" + coalg.space.basis_labels[s]
            labels.append(lbl)
        comps.append(Space(f"Θ{n}({coalg.space.name})", basis.dim, tuple(labels), grade=n))
    comult = {(i, j): core.mult_matrix(i, j).transpose()
              for i in range(max_degree + 1) for j in range(max_degree + 1 - i)}
    diff = tuple(core.diff_matrix(n - 1).transpose().scale(-ONE)
                 for n in range(1, max_degree + 1))
    h = bundle.hopf
    acts = _act_cols(bundle.structure.act, h.dim, coalg.space.dim)  # type: ignore[union-attr]
    action = tuple(
        _diagonal_action_matrix(h, acts, core.bases[n], h.coalgebra.counit)
        for n in range(max_degree + 1)
    )
    counit_theta = [ZERO] * comps[0].dim
    counit_theta[0] = ONE  # dual basis vector of the adjoined unit of Ω(C*)
    dg = DGTruncation(
        max_degree=max_degree, kind="coalgebra", components=tuple(comps), comult=comult,
        diff=diff, counit=tuple(counit_theta), hopf=h, action=action,
        basis_tuples=tuple(tuple(core.bases[n].tuple_of(k) for k in range(core.bases[n].dim))
                           for n in range(max_degree + 1)),
        carrier_dim=coalg.space.dim,
    )
    _check_dg_coalgebra(dg)
    return dg


def _check_dg_coalgebra(dg: DGTruncation) -> None:
    N = dg.max_degree
    dims = dg.dims
    for n in range(2, N + 1):
        _gate(theta_diff(dg, n - 1).mul(theta_diff(dg, n)).is_zero(), "d∘d=0", f"degree {n}")
    for i in range(N + 1):
        for j in range(N + 1 - i):
            for k in range(N + 1 - i - j):
                lhs = dg.comult[(i, j)].kron(Matrix.identity(dims[k])).mul(dg.comult[(i + j, k)])
                rhs = Matrix.identity(dims[i]).kron(dg.comult[(j, k)]).mul(dg.comult[(i, j + k)])
                _gate(lhs.sub(rhs).is_zero(), "graded coassociativity", f"degrees ({i},{j},{k})")
    e = Matrix.from_rows([list(dg.counit)], cols=dims[0])
    for n in range(N + 1):
        lhs = e.kron(Matrix.identity(dims[n])).mul(dg.comult[(0, n)])
        _gate(lhs.sub(Matrix.identity(dims[n])).is_zero(), "counit.left", f"degree {n}")
        rhs = Matrix.identity(dims[n]).kron(e).mul(dg.comult[(n, 0)])
        _gate(rhs.sub(Matrix.identity(dims[n])).is_zero(), "counit.right", f"degree {n}")
    for i in range(N + 1):
        for j in range(N - i):
            n = i + j + 1
            lhs = dg.comult[(i, j)].mul(theta_diff(dg, n))
            t1 = theta_diff(dg, i + 1).kron(Matrix.identity(dims[j])).mul(dg.comult[(i + 1, j)])
            t2 = Matrix.identity(dims[i]).kron(theta_diff(dg, j + 1)).mul(dg.comult[(i, j + 1)])
            rhs = t1.add(t2) if i % 2 == 0 else t1.sub(t2)
            _gate(lhs.sub(rhs).is_zero(), "graded coderivation law", f"bidegree ({i},{j})")
    dh = dg.hopf.dim
    dmh = dg.hopf.coalgebra.comult.matrix
    for n in range(1, N + 1):
        lhs = theta_diff(dg, n).mul(dg.action[n])
        rhs = dg.action[n - 1].mul(Matrix.identity(dh).kron(theta_diff(dg, n)))
        _gate(lhs.sub(rhs).is_zero(), "H-linearity of d", f"degree {n}")
    for i in range(N + 1):
        for j in range(N + 1 - i):
            lhs = dg.comult[(i, j)].mul(dg.action[i + j])
            step = permute_map_output(
                dmh.kron(dg.comult[(i, j)]), (dh, dh, dims[i], dims[j]), (0, 2, 1, 3))
            rhs = dg.action[i].kron(dg.action[j]).mul(step)
            _gate(lhs.sub(rhs).is_zero(), "H-linearity of comultiplication", f"bidegree ({i},{j})")


# --------------------------------------------------------------------------
# Twisted DG product Ω ⋊_H Γ

SparseElt = dict[tuple[int, int, int], Fraction]  # (i, j, flat index in Ω^i⊗Γ^j) -> coeff


@dataclass(eq=False)
class SmashDG:
    """The twisted tensor product of a DG H-module algebra and a DG
    H-comodule algebra, with bigraded components Ω^i⊗Γ^j and multiplication
    (ω1⊗γ1)(ω2⊗γ2) = (-1)^{deg ω2 · deg γ1} ω1·(γ1^(-1)·ω2) ⊗ γ1^(0)·γ2.

    Elements are sparse dicts {(i, j, flat): coeff}; basis-pair products are
    cached on demand."""

    omega: DGTruncation
    gamma: DGTruncation
    max_degree: int

    def __post_init__(self):
        if self.omega.hopf is not self.gamma.hopf and self.omega.hopf != self.gamma.hopf:
            raise ValueError("smash product requires a common Hopf algebra")
        self._odims = self.omega.dims
        self._gdims = self.gamma.dims
        self._dh = self.omega.hopf.dim
        self._coact_cols = [_cols_of(m) for m in self.gamma.coaction]
        self._act = self.omega.action
        self._prod_cache: dict[tuple, SparseElt] = {}

    def summands(self, s: int) -> list[tuple[int, int]]:
        return [(i, s - i) for i in range(s + 1)]

    def comp_dim(self, i: int, j: int) -> int:
        return self._odims[i] * self._gdims[j]

    def basis_element(self, i: int, j: int, k: int) -> SparseElt:
        return {(i, j, k): ONE}

    @property
    def unit(self) -> SparseElt:
        gu = self.gamma.unit
        ou = self.omega.unit
        out: SparseElt = {}
        for a, av in enumerate(ou):
            for b, bv in enumerate(gu):
                if av != 0 and bv != 0:
                    out[(0, 0, a * self._gdims[0] + b)] = av * bv
        return out

    def mult_elements(self, x: SparseElt, y: SparseElt) -> SparseElt:
        out: SparseElt = {}
        for (i1, j1, k1), v1 in x.items():
            for (i2, j2, k2), v2 in y.items():
                if i1 + i2 + j1 + j2 > self.max_degree:
                    continue
                for key, val in self._basis_product(i1, j1, k1, i2, j2, k2).items():
                    _merge(out, key, v1 * v2 * val)
        return out

    def _basis_product(self, i1, j1, k1, i2, j2, k2) -> SparseElt:
        ck = (i1, j1, k1, i2, j2, k2)
        cached = self._prod_cache.get(ck)
        if cached is not None:
            return cached
        o1, g1 = divmod(k1, self._gdims[j1])
        o2, g2 = divmod(k2, self._gdims[j2])
        sign = -ONE if (i2 % 2 and j1 % 2) else ONE
        out: SparseElt = {}
        io, jo = i1 + i2, j1 + j2
        dg_out = self._gdims[jo]
        act = self._act[i2]
        mult_o = self.omega.mult[(i1, i2)]
        mult_g = self.gamma.mult[(j1, j2)]
        do2 = self._odims[i2]
        # γ1^(-1) ⊗ γ1^(0), then act on ω2, multiply components
        for r, cval in self._coact_cols[j1][g1]:
            h, g10 = divmod(r, self._gdims[j1])
            # h · ω2
            acted = [act[o, h * do2 + o2] for o in range(do2)]
            # γ1^(0) · γ2
            gprod_col = g10 * self._gdims[j2] + g2
            for go in range(dg_out):
                gval = mult_g[go, gprod_col]
                if gval == 0:
                    continue
                for om_mid, aval in enumerate(acted):
                    if aval == 0:
                        continue
                    oprod_col = o1 * do2 + om_mid
                    for oo in range(self._odims[io]):
                        oval = mult_o[oo, oprod_col]
                        if oval != 0:
                            _merge(out, (io, jo, oo * dg_out + go),
                                   sign * cval * aval * gval * oval)
        self._prod_cache[ck] = out
        return out

    def diff_element(self, x: SparseElt) -> SparseElt:
        out: SparseElt = {}
        for (i, j, k), v in x.items():
            o, g = divmod(k, self._gdims[j])
            if i + j >= self.max_degree:
                continue
            if i < self.omega.max_degree:
                dmat = self.omega.diff[i]
                for oo in range(self._odims[i + 1]):
                    val = dmat[oo, o]
                    if val != 0:
                        _merge(out, (i + 1, j, oo * self._gdims[j] + g), v * val)
            if j < self.gamma.max_degree:
                dmat = self.gamma.diff[j]
                sgn = -ONE if i % 2 else ONE
                for go in range(self._gdims[j + 1]):
                    val = dmat[go, g]
                    if val != 0:
                        _merge(out, (i, j + 1, o * self._gdims[j + 1] + go), v * sgn * val)
        return out


def dg_smash(omega: DGTruncation, gamma: DGTruncation, max_degree: Optional[int] = None,
             gate_degree: int = 2) -> SmashDG:
    """Build the twisted DG product and gate it: unit, d²=0, graded Leibniz
    and associativity on all basis tuples of total degree <= gate_degree."""
    if omega.action is None or gamma.coaction is None:
        raise ValueError("dg_smash needs an H-action on the first factor and a coaction on the second")
    N = min(omega.max_degree + gamma.max_degree,
            max_degree if max_degree is not None else omega.max_degree)
    sm = SmashDG(omega, gamma, N)
    unit = sm.unit
    cap = min(gate_degree, N)
    basis = [(i, j, k) for s in range(cap + 1) for (i, j) in sm.summands(s)
             if i <= omega.max_degree and j <= gamma.max_degree
             for k in range(sm.comp_dim(i, j))]
    for (i, j, k) in basis:
        x = sm.basis_element(i, j, k)
        lu = sm.mult_elements(unit, x)
        ru = sm.mult_elements(x, unit)
        _gate(lu == x, "smash unit.left", f"{(i,j,k)}")
        _gate(ru == x, "smash unit.right", f"{(i,j,k)}")
        dd = sm.diff_element(sm.diff_element(x))
        _gate(not dd, "smash d∘d=0", f"{(i,j,k)}")
    for (i1, j1, k1) in basis:
        x = sm.basis_element(i1, j1, k1)
        dx = sm.diff_element(x)
        sx = -ONE if (i1 + j1) % 2 else ONE
        for (i2, j2, k2) in basis:
            if i1 + j1 + i2 + j2 > cap:
                continue
            y = sm.basis_element(i2, j2, k2)
            xy = sm.mult_elements(x, y)
            lhs = sm.diff_element(xy)
            rhs: SparseElt = {}
            for key, val in sm.mult_elements(dx, y).items():
                _merge(rhs, key, val)
            for key, val in sm.mult_elements(x, sm.diff_element(y)).items():
                _merge(rhs, key, sx * val)
            _gate(lhs == rhs, "smash graded Leibniz", f"{(i1,j1,k1)},{(i2,j2,k2)}")
            for (i3, j3, k3) in basis:
                if i1 + j1 + i2 + j2 + i3 + j3 > cap:
                    continue
                z = sm.basis_element(i3, j3, k3)
                a1 = sm.mult_elements(xy, z)
                a2 = sm.mult_elements(x, sm.mult_elements(y, z))
                _gate(a1 == a2, "smash associativity", f"{(i1,j1,k1)},{(i2,j2,k2)},{(i3,j3,k3)}")
    return sm


# --------------------------------------------------------------------------
# Convolution DG algebra Hom_H(Θ, Ω)

HomElt = dict[tuple[int, int], Matrix]  # (i, j) -> matrix Θ_i -> Ω^j


@dataclass(eq=False)
class ConvolutionDG:
    """The convolution DG algebra of a DG H-module coalgebra Θ and a DG
    H-module algebra Ω: degree n is ⊕_{i+j=n} Hom_H(Θ_i, Ω^j), with
    f*g = (-1)^{deg g · deg θ^(1)} f(θ^(1)) g(θ^(2)) and df = d∘f − (−1)^{deg f} f∘d.
    """

    theta: DGTruncation
    omega: DGTruncation
    max_degree: int
    hom_bases: dict  # (i, j) -> list of Matrix (basis of Hom_H(Θ_i, Ω^j))

    def conv_mult(self, f: HomElt, g: HomElt) -> HomElt:
        out: HomElt = {}
        for (i1, j1), fm in f.items():
            for (i2, j2), gm in g.items():
                if i1 + i2 + j1 + j2 > self.max_degree:
                    continue
                sign = -ONE if ((i2 + j2) % 2 and i1 % 2) else ONE
                m = self.omega.mult[(j1, j2)].mul(fm.kron(gm)).mul(
                    self.theta.comult[(i1, i2)]).scale(sign)
                key = (i1 + i2, j1 + j2)
                out[key] = out[key].add(m) if key in out else m
        return {k: v for k, v in out.items() if not v.is_zero()}

    def conv_diff(self, f: HomElt) -> HomElt:
        out: HomElt = {}

        def acc(key, m):
            out[key] = out[key].add(m) if key in out else m

        for (i, j), fm in f.items():
            deg = i + j
            if j < self.omega.max_degree and deg + 1 <= self.max_degree:
                acc((i, j + 1), self.omega.diff[j].mul(fm))
            if i + 1 <= self.theta.max_degree and deg + 1 <= self.max_degree:
                sgn = -ONE if deg % 2 == 0 else ONE  # −(−1)^{deg f}
                acc((i + 1, j), fm.mul(theta_diff(self.theta, i + 1)).scale(sgn))
        return {k: v for k, v in out.items() if not v.is_zero()}

    @property
    def unit(self) -> HomElt:
        """θ ↦ ε_Θ(θ)·1_Ω."""
        u = Matrix.from_rows([[x] for x in self.omega.unit], cols=1)
        e = Matrix.from_rows([list(self.theta.counit)], cols=self.theta.dims[0])
        return {(0, 0): u.mul(e)}


def hom_h_basis(theta: DGTruncation, omega: DGTruncation, i: int, j: int) -> list[Matrix]:
    """Canonical basis of Hom_H(Θ_i, Ω^j): the kernel of the H-linearity
    constraint F∘(h·−) = h·F(−), rows of F flattened Ω-row-major."""
    from .exactla import Subspace, kernel_basis

    dth, dom = theta.dims[i], omega.dims[j]
    dh = theta.hopf.dim
    act_t = theta.action[i]
    act_o = omega.action[j]
    nvars = dom * dth
    rows = []
    for h in range(dh):
        t_slice = [[act_t[r, h * dth + c] for c in range(dth)] for r in range(dth)]
        o_slice = [[act_o[r, h * dom + c] for c in range(dom)] for r in range(dom)]
        for r in range(dom):
            for c in range(dth):
                row = [ZERO] * nvars
                # (F∘act_h)[r,c] = Σ_b F[r,b]·t_slice[b][c]
                for b in range(dth):
                    v = t_slice[b][c]
                    if v != 0:
                        row[r * dth + b] += v
                # (act_h∘F)[r,c] = Σ_s o_slice[r][s]·F[s,c]
                for s in range(dom):
                    v = o_slice[r][s]
                    if v != 0:
                        row[s * dth + c] -= v
                if any(x != 0 for x in row):
                    rows.append(row)
    if not rows:
        sub = Subspace.full(nvars)
    else:
        sub = kernel_basis(Matrix.from_rows(rows, cols=nvars))
    out = []
    for r in range(sub.dim):
        vec = sub.basis.row(r)
        out.append(Matrix(dom, dth, tuple(vec)))
    return out


def dg_convolution(theta: DGTruncation, omega: DGTruncation,
                   max_degree: Optional[int] = None, gate_degree: int = 2) -> ConvolutionDG:
    """Build the convolution DG algebra and gate it: the convolution of
    H-linear maps is H-linear, the unit law, d²=0, graded Leibniz, and
    associativity on Hom-basis tuples of total degree <= gate_degree."""
    if theta.kind != "coalgebra" or omega.kind != "algebra":
        raise ValueError("dg_convolution expects (coalgebra, algebra) truncations")
    if theta.hopf != omega.hopf:
        raise ValueError("dg_convolution requires a common Hopf algebra")
    N = max_degree if max_degree is not None else min(theta.max_degree + omega.max_degree,
                                                      max(theta.max_degree, omega.max_degree))
    bases = {}
    for i in range(min(theta.max_degree, N) + 1):
        for j in range(min(omega.max_degree, N - i) + 1):
            bases[(i, j)] = hom_h_basis(theta, omega, i, j)
    conv = ConvolutionDG(theta, omega, N, bases)
    cap = min(gate_degree, N)
    unit = conv.unit
    hom_basis_elts: list[HomElt] = []
    for (i, j), mats in bases.items():
        if i + j <= cap:
            hom_basis_elts.extend({(i, j): m} for m in mats)

    def is_h_linear(f: HomElt) -> bool:
        dh = theta.hopf.dim
        for (i, j), fm in f.items():
            dth, dom = theta.dims[i], omega.dims[j]
            for h in range(dh):
                for c in range(dth):
                    lhs = fm.apply(tuple(theta.action[i][r, h * dth + c] for r in range(dth)))
                    e = [ZERO] * dth
                    e[c] = ONE
                    fe = fm.apply(tuple(e))
                    rhs = tuple(sum((omega.action[j][r, h * dom + s] * fe[s]
                                     for s in range(dom)), ZERO) for r in range(dom))
                    if lhs != rhs:
                        return False
        return True

    for f in hom_basis_elts:
        _gate(_hom_eq(conv.conv_mult(unit, f), f), "convolution unit.left")
        _gate(_hom_eq(conv.conv_mult(f, unit), f), "convolution unit.right")
        _gate(not conv.conv_diff(conv.conv_diff(f)), "convolution d∘d=0")
    for f in hom_basis_elts:
        fdeg = sum(next(iter(f)))
        df = conv.conv_diff(f)
        for g in hom_basis_elts:
            gdeg = sum(next(iter(g)))
            if fdeg + gdeg > cap:
                continue
            fg = conv.conv_mult(f, g)
            _gate(is_h_linear(fg), "convolution H-linearity closure")
            lhs = conv.conv_diff(fg)
            rhs: HomElt = {}
            for k, v in conv.conv_mult(df, g).items():
                rhs[k] = rhs[k].add(v) if k in rhs else v
            sgn = -ONE if fdeg % 2 else ONE
            for k, v in conv.conv_mult(f, conv.conv_diff(g)).items():
                v = v.scale(sgn)
                rhs[k] = rhs[k].add(v) if k in rhs else v
            rhs = {k: v for k, v in rhs.items() if not v.is_zero()}
            _gate(_hom_eq(lhs, rhs), "convolution graded Leibniz")
            for e in hom_basis_elts:
                edeg = sum(next(iter(e)))
                if fdeg + gdeg + edeg > cap:
                    continue
                a1 = conv.conv_mult(fg, e)
                a2 = conv.conv_mult(f, conv.conv_mult(g, e))
                _gate(_hom_eq(a1, a2), "convolution associativity")
    return conv


def _hom_eq(a: HomElt, b: HomElt) -> bool:
    keys = set(a) | set(b)
    for k in keys:
        am = a.get(k)
        bm = b.get(k)
        if am is None:
            if not bm.is_zero():
                return False
        elif bm is None:
            if not am.is_zero():
                return False
        elif not am.sub(bm).is_zero():
            return False
    return True
