"""Hopf-cyclic cochain complexes, cohomology, and the correspondence between
cyclic cocycles and closed graded traces/cotraces on universal calculi.

Cochain realisations:

* kind A — functionals on M⊗A^{⊗(n+1)} invariant under the total diagonal
  H-action (coordinates in the dual basis, M-leg slowest);
* kind B — H-colinear maps B^{⊗(n+1)} → M (hom coordinates, M-row slowest);
* kind C — the quotient M⊗_H C^{⊗(n+1)} by the span of
  S(h)m⊗x − m⊗(h·x), H acting diagonally on the C-legs.

The operator conventions are gated, not trusted: every construction verifies
b∘b = 0, λ^{n+1} = id and that b preserves ker(1−λ), and raises
``OperatorGateError`` naming the failed identity otherwise (this is what makes
the stability/anti-Yetter-Drinfeld hypotheses on the coefficients visibly
load-bearing).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .exactla import (
    Matrix,
    ONE,
    QuotientSpace,
    Subspace,
    Vector,
    ZERO,
    check_budget,
    image_subspace,
    induce_map,
    kernel_basis,
    MapDescentError,
    restrict_map,
    solve_linear,
)
from .multilin import Space, multi_index, permute_map_output, tensor_space
from .calculi import (
    CalculusGateError,
    DGTruncation,
    _act_cols,
    _cols_of,
    _merge,
    build_omega_A,
    build_omega_B,
    build_omega_C,
    theta_diff,
)
from .structures import (
    AlgebraSpec,
    CoalgebraSpec,
    HopfAlgebraSpec,
    SymmetryBundle,
    antipode_inverse,
    iterated_comult_matrix,
)

Q = Fraction


class OperatorGateError(AssertionError):
    """A cocyclic identity failed at operator-construction time."""

    def __init__(self, identity: str, detail: str = ""):
        super().__init__(f"cocyclic gate failed: {identity}" + (f" ({detail})" if detail else ""))
        self.identity = identity


class PreconditionError(ValueError):
    """An argument does not satisfy a documented precondition."""


class TraceInvariantError(AssertionError):
    """A constructed trace/cotrace violates one of its defining identities."""

    def __init__(self, identity: str, detail: str = ""):
        super().__init__(f"trace invariant failed: {identity}" + (f" ({detail})" if detail else ""))
        self.identity = identity


# --------------------------------------------------------------------------
# diagonal (co)action matrices on plain tensor legs, built sparsely

def _diag_action_matrix(hopf: HopfAlgebraSpec, legs: list) -> Matrix:
    """Total action H⊗X -> X for X a tensor product of H-modules.

    legs: list of (dim, act_cols) with act_cols[h][v] a sparse column."""
    dh = hopf.dim
    dims = [d for d, _ in legs]
    total = 1
    for d in dims:
        total *= d
    check_budget(total * dh * total)
    delta_cols = _cols_of(iterated_comult_matrix(hopf, len(legs) - 1))
    hdims = (dh,) * len(legs)
    ent = [ZERO] * (total * dh * total)
    for h in range(dh):
        for x in range(total):
            xs = multi_index(x, dims)
            col = h * total + x
            acc: dict[tuple, Fraction] = {}
            for flat_h, cval in delta_cols[h]:
                hs = multi_index(flat_h, hdims)
                terms: dict[tuple, Fraction] = {(): cval}
                for leg, (d, cols) in enumerate(legs):
                    nxt: dict[tuple, Fraction] = {}
                    for prefix, pval in terms.items():
                        for c, aval in cols[hs[leg]][xs[leg]]:
                            _merge(nxt, prefix + (c,), pval * aval)
                    terms = nxt
                    if not terms:
                        break
                for tt, vv in terms.items():
                    _merge(acc, tt, vv)
            for tt, vv in acc.items():
                flat = 0
                for c, d in zip(tt, dims):
                    flat = flat * d + c
                ent[flat * (dh * total) + col] += vv
    return Matrix(total, dh * total, tuple(ent))


def _diag_coaction_matrix(hopf: HopfAlgebraSpec, legs: list) -> Matrix:
    """Total coaction X -> H⊗X, multiplying the legwise H-components.

    legs: list of (dim, coact_cols) with coact_cols[v] sparse in H⊗V."""
    dh = hopf.dim
    dims = [d for d, _ in legs]
    total = 1
    for d in dims:
        total *= d
    check_budget(dh * total * total)
    mult_cols = _cols_of(hopf.algebra.mult.matrix)
    ent = [ZERO] * (dh * total * total)
    for x in range(total):
        xs = multi_index(x, dims)
        terms: dict[tuple[int, tuple], Fraction] = {}
        d0, cols0 = legs[0]
        for r, val in cols0[xs[0]]:
            h0, v0 = divmod(r, d0)
            _merge(terms, (h0, (v0,)), val)
        for leg in range(1, len(legs)):
            d, cols = legs[leg]
            nxt: dict[tuple[int, tuple], Fraction] = {}
            for (hacc, prefix), pval in terms.items():
                for r, val in cols[xs[leg]]:
                    hl, vl = divmod(r, d)
                    for hnew, mval in mult_cols[hacc * dh + hl]:
                        _merge(nxt, (hnew, prefix + (vl,)), pval * val * mval)
            terms = nxt
        for (h, tt), vv in terms.items():
            flat = 0
            for c, d in zip(tt, dims):
                flat = flat * d + c
            ent[(h * total + flat) * total + x] += vv
    return Matrix(dh * total, total, tuple(ent))


def _coact_cols(coact_matrix: Matrix, dv: int) -> list:
    return _cols_of(coact_matrix)


def _kron(*mats: Matrix) -> Matrix:
    out = mats[0]
    for m in mats[1:]:
        out = out.kron(m)
    return out


def _id(n: int) -> Matrix:
    return Matrix.identity(n)


# --------------------------------------------------------------------------
# cochain spaces

@dataclass(eq=False)
class CochainSpace:
    """The degree-n Hopf-cyclic cochain space of a bundle, with its ambient
    multilinear coordinate space and the equivariance realisation."""

    bundle: SymmetryBundle
    degree: int
    ambient: Space
    kind: str
    equivariant: Optional[Subspace] = None
    quotient: Optional[QuotientSpace] = None

    @property
    def dim(self) -> int:
        return self.equivariant.dim if self.equivariant is not None else self.quotient.dim

    def lift(self, coords) -> Vector:
        """Ambient coordinates of a cochain given in canonical coordinates."""
        if self.equivariant is not None:
            return self.equivariant.vector_of(coords)
        return self.quotient.lift(coords)

    def reduce(self, ambient_vec) -> Optional[Vector]:
        if self.equivariant is not None:
            return self.equivariant.coords_of(ambient_vec)
        return self.quotient.project(ambient_vec)


@dataclass(frozen=True)
class Cochain:
    space: CochainSpace
    coords: Vector

    def __post_init__(self):
        if len(self.coords) != self.space.dim:
            raise ValueError("coordinate length does not match cochain space")

    def scale(self, c: Fraction) -> "Cochain":
        c = Fraction(c)
        return Cochain(self.space, tuple(c * x for x in self.coords))

    def add(self, other: "Cochain") -> "Cochain":
        if other.space is not self.space:
            raise ValueError("cochains live in different spaces")
        return Cochain(self.space, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coords)


@dataclass(eq=False)
class ComplexMaps:
    """b and λ in canonical cochain coordinates, gate-checked at build time."""

    space: CochainSpace
    b: Matrix
    lam: Matrix


@dataclass(frozen=True)
class CohomologyResult:
    degree: int
    hc_dim: int
    hh_dim: int
    representatives: tuple[Cochain, ...]


class _Complex:
    """Per-bundle lazy cache of cochain spaces and operators."""

    def __init__(self, bundle: SymmetryBundle):
        self.bundle = bundle
        self.h = bundle.hopf
        self.m_space = bundle.coeffs.carrier
        self.dm = self.m_space.dim
        self.dh = self.h.dim
        self.act_m_cols = _act_cols(bundle.coeffs.action.act, self.dh, self.dm)
        self.rho_m = bundle.coeffs.coaction.coact.matrix
        self.s_inv = antipode_inverse(self.h).matrix
        self.spaces: dict[int, CochainSpace] = {}
        self.raw_b: dict[int, Matrix] = {}
        self.raw_tau: dict[int, Matrix] = {}
        self.b_mat: dict[int, Matrix] = {}
        self.lam_mat: dict[int, Matrix] = {}
        if bundle.kind in ("A", "C"):
            self.dc = bundle.carrier.space.dim
            self.carrier_act_cols = _act_cols(bundle.structure.act, self.dh, self.dc)  # type: ignore[union-attr]
        else:
            self.dc = bundle.carrier.space.dim
            self.carrier_coact_cols = _cols_of(bundle.structure.coact.matrix)  # type: ignore[union-attr]

    # ---------------- spaces ----------------

    def space(self, n: int) -> CochainSpace:
        if n in self.spaces:
            return self.spaces[n]
        kind = self.bundle.kind
        if kind == "A":
            sp = self._space_A(n)
        elif kind == "B":
            sp = self._space_B(n)
        else:
            sp = self._space_C(n)
        self.spaces[n] = sp
        return sp

    def _arg_space(self, n: int) -> Space:
        carrier = self.bundle.carrier.space
        return tensor_space(self.m_space, *((carrier,) * (n + 1)))

    def _space_A(self, n: int) -> CochainSpace:
        amb = self._arg_space(n)
        total = _diag_action_matrix(
            self.h,
            [(self.dm, self.act_m_cols)] + [(self.dc, self.carrier_act_cols)] * (n + 1),
        )
        dim = amb.dim
        eps = self.h.coalgebra.counit
        rows = []
        for hh in range(self.dh):
            # functional constraint: f(h·x) = ε(h) f(x), i.e. (R_h^T − ε(h)I) f = 0
            for j in range(dim):
                row = [total[i, hh * dim + j] for i in range(dim)]
                row[j] -= eps[hh]
                if any(x != 0 for x in row):
                    rows.append(row)
        sub = Subspace.full(dim) if not rows else kernel_basis(Matrix.from_rows(rows, cols=dim))
        return CochainSpace(self.bundle, n, amb, "A", equivariant=sub)

    def _space_B(self, n: int) -> CochainSpace:
        carrier = self.bundle.carrier.space
        legs = tensor_space(*((carrier,) * (n + 1)))
        amb = tensor_space(self.m_space, legs)  # hom coordinates: M-row slowest
        dl = legs.dim
        nvars = self.dm * dl
        check_budget(nvars)
        rho_src = _diag_coaction_matrix(
            self.h, [(self.dc, self.carrier_coact_cols)] * (n + 1))
        rho_src_cols = _cols_of(rho_src)
        rho_m_cols = _cols_of(self.rho_m)
        rows = []
        for c in range(dl):
            src_terms = rho_src_cols[c]  # (h*dl + b, val)
            for hh in range(self.dh):
                for mp in range(self.dm):
                    row = [ZERO] * nvars
                    # LHS: Σ_m ρ_M[(h,m'),m] F[m,c]
                    for m in range(self.dm):
                        v = self.rho_m[hh * self.dm + mp, m]
                        if v != 0:
                            row[m * dl + c] += v
                    # RHS: Σ_b ρ_src[(h,b),c] F[m',b]
                    for r, v in src_terms:
                        h2, b = divmod(r, dl)
                        if h2 == hh:
                            row[mp * dl + b] -= v
                    if any(x != 0 for x in row):
                        rows.append(row)
        sub = Subspace.full(nvars) if not rows else kernel_basis(Matrix.from_rows(rows, cols=nvars))
        return CochainSpace(self.bundle, n, amb, "B", equivariant=sub)

    def _space_C(self, n: int) -> CochainSpace:
        amb = self._arg_space(n)
        dim = amb.dim
        check_budget(dim)
        diag = _diag_action_matrix(self.h, [(self.dc, self.carrier_act_cols)] * (n + 1))
        s_mat = self.h.antipode.matrix
        legs_dim = self.dc ** (n + 1)
        vecs = []
        for hh in range(self.dh):
            s_col = [s_mat[r, hh] for r in range(self.dh)]
            for m in range(self.dm):
                # S(h)·m as a vector over M
                shm = [ZERO] * self.dm
                for r, sval in enumerate(s_col):
                    if sval != 0:
                        for mm, aval in self.act_m_cols[r][m]:
                            shm[mm] += sval * aval
                for x in range(legs_dim):
                    vec = [ZERO] * dim
                    for mm, v in enumerate(shm):
                        if v != 0:
                            vec[mm * legs_dim + x] += v
                    for r in range(legs_dim):
                        v = diag[r, hh * legs_dim + x]
                        if v != 0:
                            vec[m * legs_dim + r] -= v
                    if any(v != 0 for v in vec):
                        vecs.append(vec)
        rel = Subspace.from_vectors(vecs, dim)
        return CochainSpace(self.bundle, n, amb, "C", quotient=QuotientSpace(dim, rel))

    # ---------------- raw argument-side operators ----------------

    def _faces_A_arg(self, n: int) -> list[Matrix]:
        """Argument-side faces M⊗A^{n+2} -> M⊗A^{n+1}."""
        da, dm, dh = self.dc, self.dm, self.dh
        mult = self.bundle.carrier.mult.matrix
        faces = []
        for i in range(n + 1):
            faces.append(_kron(_id(dm * da**i), mult, _id(da ** (n - i))))
        # last face: m⊗a0..a_{n+1} -> m^(0) ⊗ (S^{-1}(m^(-1))·a_{n+1})·a0 ⊗ a1..an
        x2 = dm * da ** (n + 2)
        s1 = _kron(self.rho_m, _id(da ** (n + 2)))
        s2 = _kron(self.s_inv, _id(dm * da ** (n + 2))).mul(s1)
        perm = [1, 0] + [3 + i for i in range(n + 1)] + [2]
        s3 = permute_map_output(s2, (dh, dm) + (da,) * (n + 2), tuple(perm))
        act = self.bundle.structure.act.matrix  # type: ignore[union-attr]
        s4 = _kron(_id(dm), act, _id(da ** (n + 1))).mul(s3)
        s5 = _kron(_id(dm), mult, _id(da**n)).mul(s4)
        faces.append(s5)
        return faces

    def _tau_A_arg(self, n: int) -> Matrix:
        da, dm, dh = self.dc, self.dm, self.dh
        s1 = _kron(self.rho_m, _id(da ** (n + 1)))
        s2 = _kron(self.s_inv, _id(dm * da ** (n + 1))).mul(s1)
        perm = [1, 0] + [3 + i for i in range(n)] + [2]
        s3 = permute_map_output(s2, (dh, dm) + (da,) * (n + 1), tuple(perm))
        act = self.bundle.structure.act.matrix  # type: ignore[union-attr]
        return _kron(_id(dm), act, _id(da**n)).mul(s3)

    def _faces_B_plain(self, n: int) -> list[Matrix]:
        """Plain merge faces B^{n+2} -> B^{n+1} (0..n); the twisted last face
        is handled at the cochain level."""
        da = self.dc
        mult = self.bundle.carrier.mult.matrix
        return [_kron(_id(da**i), mult, _id(da ** (n - i))) for i in range(n + 1)]

    def _rotation_B(self, k: int) -> Matrix:
        """B^{⊗k} -> H⊗B^{⊗k-?}: b0..b_{k-1} -> b_{k-1}^(-1) ⊗ b_{k-1}^(0) ⊗ b0..b_{k-2}."""
        da, dh = self.dc, self.dh
        coact = self.bundle.structure.coact.matrix  # type: ignore[union-attr]
        s1 = _kron(_id(da ** (k - 1)), coact)  # -> b0..b_{k-2}, h, b'
        perm = [2 + i for i in range(k - 1)] + [0, 1]
        return permute_map_output(s1, (da,) * (k - 1) + (dh, da), tuple(perm))

    def _last_face_B_arg(self, n: int) -> Matrix:
        """B^{n+2} -> H⊗B^{n+1}: b⃗ -> b_{n+1}^(-1) ⊗ (b_{n+1}^(0)·b0) ⊗ b1..bn."""
        da, dh = self.dc, self.dh
        rot = self._rotation_B(n + 2)
        mult = self.bundle.carrier.mult.matrix
        return _kron(_id(dh), mult, _id(da**n)).mul(rot)

    def _faces_C_arg(self, n: int) -> list[Matrix]:
        """Cofaces M⊗C^{n+1} -> M⊗C^{n+2}."""
        dc, dm, dh = self.dc, self.dm, self.dh
        dmc = self.bundle.carrier.comult.matrix
        faces = []
        for i in range(n + 1):
            faces.append(_kron(_id(dm * dc**i), dmc, _id(dc ** (n - i))))
        # last coface: m⊗c0..cn -> m^(0) ⊗ c0^(2) ⊗ c1..cn ⊗ m^(-1)·c0^(1)
        s1 = _kron(self.rho_m, dmc, _id(dc**n))  # (h, m, c0a, c0b, c1..cn)
        perm = [n + 2, 0, n + 3, 1] + [2 + i for i in range(n)]
        s2 = permute_map_output(s1, (dh, dm, dc, dc) + (dc,) * n, tuple(perm))
        act = self.bundle.structure.act.matrix  # type: ignore[union-attr]
        faces.append(_kron(_id(dm * dc ** (n + 1)), act).mul(s2))
        return faces

    def _tau_C_arg(self, n: int) -> Matrix:
        dc, dm, dh = self.dc, self.dm, self.dh
        s1 = _kron(self.rho_m, _id(dc ** (n + 1)))  # (h, m, c0..cn)
        perm = [n + 1, 0, n + 2] + [1 + i for i in range(n)]
        s2 = permute_map_output(s1, (dh, dm) + (dc,) * (n + 1), tuple(perm))
        act = self.bundle.structure.act.matrix  # type: ignore[union-attr]
        return _kron(_id(dm * dc**n), act).mul(s2)

    # ---------------- cochain-level operators ----------------

    def _hom_operator(self, n_src: int, arg: Matrix, twisted: bool) -> Matrix:
        """Kind-B cochain operator from an argument-side map.

        untwisted: F ↦ F∘arg for arg: B^{⊗a} -> B^{⊗b};
        twisted:   F ↦ act_M∘(id_H⊗F)∘arg for arg: B^{⊗a} -> H⊗B^{⊗b}."""
        dl_b = arg.rows if not twisted else arg.rows // self.dh
        nvars = self.dm * dl_b
        out_cols = []
        for var in range(nvars):
            m_row, b_col = divmod(var, dl_b)
            out = [ZERO] * (self.dm * arg.cols)
            if not twisted:
                for c in range(arg.cols):
                    v = arg[b_col, c]
                    if v != 0:
                        out[m_row * arg.cols + c] = v
            else:
                for c in range(arg.cols):
                    for hh in range(self.dh):
                        v = arg[hh * dl_b + b_col, c]
                        if v == 0:
                            continue
                        for mm, aval in self.act_m_cols[hh][m_row]:
                            out[mm * arg.cols + c] += v * aval
            out_cols.append(out)
        rows = [[out_cols[j][i] for j in range(nvars)] for i in range(self.dm * arg.cols)]
        return Matrix.from_rows(rows, cols=nvars)

    def operators(self, n: int) -> tuple[Matrix, Matrix]:
        """(b_n, λ_n) in canonical coordinates, without gates."""
        if n in self.b_mat:
            return self.b_mat[n], self.lam_mat[n]
        kind = self.bundle.kind
        sp_n = self.space(n)
        sp_n1 = self.space(n + 1)
        if kind == "A":
            faces = self._faces_A_arg(n)
            raw = faces[0]
            sign = -ONE
            for f in faces[1:]:
                raw = raw.add(f.scale(sign))
                sign = -sign
            b_amb = raw.transpose()
            tau_amb = self._tau_A_arg(n).transpose()
        elif kind == "C":
            faces = self._faces_C_arg(n)
            raw = faces[0]
            sign = -ONE
            for f in faces[1:]:
                raw = raw.add(f.scale(sign))
                sign = -sign
            b_amb = raw
            tau_amb = self._tau_C_arg(n)
        else:
            plain = self._faces_B_plain(n)
            mats = [self._hom_operator(n, f, twisted=False) for f in plain]
            mats.append(self._hom_operator(n, self._last_face_B_arg(n), twisted=True))
            raw = mats[0]
            sign = -ONE
            for f in mats[1:]:
                raw = raw.add(f.scale(sign))
                sign = -sign
            b_amb = raw
            tau_amb = self._hom_operator(n, self._rotation_B(n + 1), twisted=True)
        lam_amb = tau_amb if n % 2 == 0 else tau_amb.scale(-ONE)
        try:
            if kind == "C":
                b = induce_map(b_amb, sp_n.quotient, sp_n1.quotient)
                lam = induce_map(lam_amb, sp_n.quotient, sp_n.quotient)
            else:
                b = restrict_map(b_amb, sp_n.equivariant, sp_n1.equivariant)
                lam = restrict_map(lam_amb, sp_n.equivariant, sp_n.equivariant)
        except MapDescentError as e:
            raise OperatorGateError("operator well-definedness on the cochain space", str(e))
        self.b_mat[n] = b
        self.lam_mat[n] = lam
        return b, lam

    def gated_operators(self, n: int) -> ComplexMaps:
        b, lam = self.operators(n)
        sp = self.space(n)
        power = _id(sp.dim)
        for _ in range(n + 1):
            power = lam.mul(power)
        if not power.sub(_id(sp.dim)).is_zero():
            raise OperatorGateError("λ^(n+1) = id", f"degree {n}")
        b1, lam1 = self.operators(n + 1)
        if not b1.mul(b).is_zero():
            raise OperatorGateError("b∘b = 0", f"degree {n}")
        ker_n = kernel_basis(lam.sub(_id(sp.dim)))
        ker_n1 = kernel_basis(lam1.sub(_id(self.space(n + 1).dim)))
        for i in range(ker_n.dim):
            img = b.apply(ker_n.basis.row(i))
            if not ker_n1.contains_vector(img):
                raise OperatorGateError("b preserves ker(1−λ)", f"degree {n}")
        return ComplexMaps(sp, b, lam)


_COMPLEX_CACHE: dict[int, _Complex] = {}


def _complex_for(bundle: SymmetryBundle) -> _Complex:
    key = id(bundle)
    cpx = _COMPLEX_CACHE.get(key)
    if cpx is None:
        cpx = _Complex(bundle)
        _COMPLEX_CACHE[key] = cpx
    return cpx


def cochain_space(bundle: SymmetryBundle, n: int) -> CochainSpace:
    """The degree-n Hopf-cyclic cochain space of a validated bundle."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return _complex_for(bundle).space(n)


def complex_maps(space: CochainSpace) -> ComplexMaps:
    """b and λ on a cochain space, with the cocyclic identities machine-gated."""
    return _complex_for(space.bundle).gated_operators(space.degree)


def cyclic_subspace(space: CochainSpace) -> Subspace:
    """ker(1−λ) in canonical coordinates."""
    cpx = _complex_for(space.bundle)
    _, lam = cpx.operators(space.degree)
    return kernel_basis(lam.sub(_id(space.dim)))


def is_cyclic_cocycle(phi: Cochain) -> bool:
    cpx = _complex_for(phi.space.bundle)
    b, lam = cpx.operators(phi.space.degree)
    if lam.apply(phi.coords) != phi.coords:
        return False
    return all(x == 0 for x in b.apply(phi.coords))


def compute_cohomology(bundle: SymmetryBundle, n_max: int) -> tuple[CohomologyResult, ...]:
    """Cyclic (HC) and Hochschild (HH) cohomology in degrees 0..n_max,
    computed from the cyclic subcomplex (ker(1−λ), b) and the full b-complex."""
    cpx = _complex_for(bundle)
    results = []
    for n in range(n_max + 1):
        maps = cpx.gated_operators(n)
        sp = maps.space
        ker_b = kernel_basis(maps.b)
        ker_cyc = kernel_basis(maps.lam.sub(_id(sp.dim)))
        z = ker_b.intersection(ker_cyc)
        if n == 0:
            bd = Subspace.zero(sp.dim)
            hh_im = Subspace.zero(sp.dim)
        else:
            prev = cpx.gated_operators(n - 1)
            prev_cyc = kernel_basis(prev.lam.sub(_id(prev.space.dim)))
            bd = image_subspace(prev.b, prev_cyc)
            hh_im = image_subspace(prev.b, Subspace.full(prev.space.dim))
        if not z.contains(bd):
            raise OperatorGateError("cyclic coboundaries are cyclic cocycles", f"degree {n}")
        hc_dim = z.dim - bd.dim
        hh_dim = ker_b.dim - hh_im.intersection(ker_b).dim
        reps = []
        span = bd
        for i in range(z.dim):
            v = z.basis.row(i)
            grown = span.add(Subspace.from_vectors([v], sp.dim))
            if grown.dim > span.dim:
                reps.append(Cochain(sp, v))
                span = grown
        results.append(CohomologyResult(n, hc_dim, hh_dim, tuple(reps)))
    return tuple(results)


def coboundary_test(phi: Cochain) -> Optional[Cochain]:
    """A cyclic cochain η with bη = φ (η cyclic), or None.

    Degree 0 has no (−1)-cochains: only the zero cocycle is a coboundary."""
    cpx = _complex_for(phi.space.bundle)
    n = phi.space.degree
    _, lam = cpx.operators(n)
    if lam.apply(phi.coords) != phi.coords:
        raise PreconditionError("coboundary_test expects a cyclic cochain")
    if n == 0:
        if phi.is_zero():
            return Cochain(phi.space, phi.coords)
        return None
    prev_sp = cpx.space(n - 1)
    b_prev, lam_prev = cpx.operators(n - 1)
    ker = kernel_basis(lam_prev.sub(_id(prev_sp.dim)))
    if ker.dim == 0:
        return Cochain(prev_sp, (ZERO,) * prev_sp.dim) if phi.is_zero() else None
    cols = [b_prev.apply(ker.basis.row(i)) for i in range(ker.dim)]
    system = Matrix.from_rows([[cols[j][i] for j in range(ker.dim)]
                               for i in range(phi.space.dim)], cols=ker.dim)
    sol = solve_linear(system, phi.coords)
    if sol is None:
        return None
    out = [ZERO] * prev_sp.dim
    for c, i in zip(sol, range(ker.dim)):
        if c != 0:
            row = ker.basis.row(i)
            for j, x in enumerate(row):
                out[j] += c * x
    return Cochain(prev_sp, tuple(out))


# --------------------------------------------------------------------------
# traces and cotraces on universal calculi

@dataclass(eq=False)
class TraceFunctional:
    """A closed graded trace: kind A — a functional on M⊗Ω^n; kind B — an
    H-colinear map Γ^n -> M (hom coordinates, M-row slowest)."""

    bundle: SymmetryBundle
    calculus: DGTruncation
    degree: int
    coords: Vector


@dataclass(eq=False)
class CotraceElement:
    """A closed graded cotrace: an element of M⊗_H Θ_n, stored by an ambient
    representative in M⊗Θ_n."""

    bundle: SymmetryBundle
    calculus: DGTruncation
    degree: int
    coords: Vector


def _omega_action_on_m_omega(cpx: _Complex, omega: DGTruncation, n: int) -> Matrix:
    """Total diagonal action H⊗(M⊗Ω^n) -> M⊗Ω^n."""
    dim_o = omega.dims[n]
    act_o_cols = [[
        [(r, omega.action[n][r, hh * dim_o + v]) for r in range(dim_o)
         if omega.action[n][r, hh * dim_o + v] != 0]
        for v in range(dim_o)] for hh in range(cpx.dh)]
    return _diag_action_matrix(cpx.h, [(cpx.dm, cpx.act_m_cols), (dim_o, act_o_cols)])


def verify_trace(tf: TraceFunctional) -> None:
    """Check the defining identities of a closed graded trace exactly."""
    cpx = _complex_for(tf.bundle)
    omega = tf.calculus
    n = tf.degree
    dims = omega.dims
    if tf.bundle.kind == "A":
        dim_mo = cpx.dm * dims[n]
        if len(tf.coords) != dim_mo:
            raise ValueError("trace coordinate length mismatch")
        f = tf.coords
        total = _omega_action_on_m_omega(cpx, omega, n)
        eps = cpx.h.coalgebra.counit
        for hh in range(cpx.dh):
            for j in range(dim_mo):
                s = -eps[hh] * f[j]
                for i in range(dim_mo):
                    if f[i] != 0:
                        v = total[i, hh * dim_mo + j]
                        if v != 0:
                            s += f[i] * v
                if s != 0:
                    raise TraceInvariantError("H-invariance", f"h index {hh}")
        if n >= 1:
            d = omega.diff[n - 1]
            closed = _kron(_id(cpx.dm), d)
            for j in range(closed.cols):
                s = ZERO
                for i in range(closed.rows):
                    if f[i] != 0:
                        v = closed[i, j]
                        if v != 0:
                            s += f[i] * v
                if s != 0:
                    raise TraceInvariantError("closedness")
        for i in range(n + 1):
            j = n - i
            lhs = _kron(_id(cpx.dm), omega.mult[(i, j)])
            s1 = _kron(cpx.rho_m, _id(dims[i] * dims[j]))
            s2 = _kron(cpx.s_inv, _id(cpx.dm * dims[i] * dims[j])).mul(s1)
            s3 = permute_map_output(s2, (cpx.dh, cpx.dm, dims[i], dims[j]), (1, 0, 3, 2))
            s4 = _kron(_id(cpx.dm), omega.action[j], _id(dims[i])).mul(s3)
            rhs = _kron(_id(cpx.dm), omega.mult[(j, i)]).mul(s4)
            sign = -ONE if (i % 2 and j % 2) else ONE
            for col in range(lhs.cols):
                s = ZERO
                for r in range(lhs.rows):
                    if f[r] != 0:
                        s += f[r] * (lhs[r, col] - sign * rhs[r, col])
                if s != 0:
                    raise TraceInvariantError("graded trace property", f"bidegree ({i},{j})")
    else:
        dim_g = dims[n]
        if len(tf.coords) != cpx.dm * dim_g:
            raise ValueError("trace coordinate length mismatch")
        F = Matrix(cpx.dm, dim_g, tuple(tf.coords))
        lhs = cpx.rho_m.mul(F)
        rhs = _id(cpx.dh).kron(F).mul(omega.coaction[n])
        if not lhs.sub(rhs).is_zero():
            raise TraceInvariantError("H-colinearity")
        if n >= 1 and not F.mul(omega.diff[n - 1]).is_zero():
            raise TraceInvariantError("closedness")
        act_m = tf.bundle.coeffs.action.act.matrix
        for i in range(n + 1):
            j = n - i
            lhs_m = F.mul(omega.mult[(i, j)])
            w1 = _kron(_id(dims[i]), omega.coaction[j])
            w2 = permute_map_output(w1, (dims[i], cpx.dh, dims[j]), (2, 0, 1))
            rhs_m = act_m.mul(_id(cpx.dh).kron(F.mul(omega.mult[(j, i)]))).mul(w2)
            sign = -ONE if (i % 2 and j % 2) else ONE
            if not lhs_m.sub(rhs_m.scale(sign)).is_zero():
                raise TraceInvariantError("graded trace property", f"bidegree ({i},{j})")


def _theta_relations(cpx: _Complex, theta: DGTruncation, n: int) -> Subspace:
    """Relations of M⊗_H Θ_n: span of S(h)m⊗θ − m⊗(h·θ)."""
    dim_t = theta.dims[n]
    dim = cpx.dm * dim_t
    s_mat = cpx.h.antipode.matrix
    vecs = []
    for hh in range(cpx.dh):
        s_col = [s_mat[r, hh] for r in range(cpx.dh)]
        for m in range(cpx.dm):
            shm = [ZERO] * cpx.dm
            for r, sval in enumerate(s_col):
                if sval != 0:
                    for mm, aval in cpx.act_m_cols[r][m]:
                        shm[mm] += sval * aval
            for x in range(dim_t):
                vec = [ZERO] * dim
                for mm, v in enumerate(shm):
                    if v != 0:
                        vec[mm * dim_t + x] += v
                for r in range(dim_t):
                    v = theta.action[n][r, hh * dim_t + x]
                    if v != 0:
                        vec[m * dim_t + r] -= v
                if any(v != 0 for v in vec):
                    vecs.append(vec)
    return Subspace.from_vectors(vecs, dim)


def _theta_pair_relations(cpx: _Complex, theta: DGTruncation, a: int, b: int) -> Subspace:
    """Relations of M⊗_H(Θ_a⊗Θ_b) with H acting diagonally on the two legs."""
    da, db = theta.dims[a], theta.dims[b]
    dim_t = da * db
    dmh = cpx.h.coalgebra.comult.matrix
    inner = permute_map_output(
        dmh.kron(_id(dim_t)), (cpx.dh, cpx.dh, da, db), (0, 2, 1, 3))
    diag = theta.action[a].kron(theta.action[b]).mul(inner)
    s_mat = cpx.h.antipode.matrix
    dim = cpx.dm * dim_t
    vecs = []
    for hh in range(cpx.dh):
        s_col = [s_mat[r, hh] for r in range(cpx.dh)]
        for m in range(cpx.dm):
            shm = [ZERO] * cpx.dm
            for r, sval in enumerate(s_col):
                if sval != 0:
                    for mm, aval in cpx.act_m_cols[r][m]:
                        shm[mm] += sval * aval
            for x in range(dim_t):
                vec = [ZERO] * dim
                for mm, v in enumerate(shm):
                    if v != 0:
                        vec[mm * dim_t + x] += v
                for r in range(dim_t):
                    v = diag[r, hh * dim_t + x]
                    if v != 0:
                        vec[m * dim_t + r] -= v
                if any(v != 0 for v in vec):
                    vecs.append(vec)
    return Subspace.from_vectors(vecs, dim)


def cotrace_condition_maps(bundle: SymmetryBundle, theta: DGTruncation, n: int):
    """For each split (a, b) of n, the pair (map, relations) whose vanishing
    modulo relations expresses the graded cotrace symmetry."""
    cpx = _complex_for(bundle)
    out = []
    for a in range(n + 1):
        b = n - a
        da, db = theta.dims[a], theta.dims[b]
        rhs = _kron(_id(cpx.dm), theta.comult[(a, b)])
        s1 = _kron(cpx.rho_m, theta.comult[(b, a)])
        s2 = permute_map_output(s1, (cpx.dh, cpx.dm, db, da), (2, 0, 3, 1))
        lhs = _kron(_id(cpx.dm * da), theta.action[b]).mul(s2)
        sign = -ONE if (a % 2 and b % 2) else ONE
        rel = _theta_pair_relations(cpx, theta, a, b)
        diff = lhs.sub(rhs.scale(sign))
        src_rel = _theta_relations(cpx, theta, n)
        for i in range(src_rel.dim):
            img = diff.apply(src_rel.basis.row(i))
            if not rel.contains_vector(img):
                raise OperatorGateError("cotrace symmetry map descends", f"split ({a},{b})")
        out.append((diff, rel))
    return out


def verify_cotrace(ce: CotraceElement) -> None:
    """Closedness in M⊗_HΘ_{n-1} and the graded cotrace symmetry, checked per
    homogeneous comultiplication split."""
    cpx = _complex_for(ce.bundle)
    theta = ce.calculus
    n = ce.degree
    if n >= 1:
        d = _kron(_id(cpx.dm), theta_diff(theta, n))
        img = d.apply(ce.coords)
        rel = _theta_relations(cpx, theta, n - 1)
        if not rel.contains_vector(img):
            raise TraceInvariantError("closedness")
    for (diff, rel) in cotrace_condition_maps(ce.bundle, theta, n):
        img = diff.apply(ce.coords)
        if not rel.contains_vector(img):
            raise TraceInvariantError("graded cotrace symmetry")


def _calculus_for(bundle: SymmetryBundle, degree: int) -> DGTruncation:
    if bundle.kind == "A":
        return build_omega_A(bundle, degree)
    if bundle.kind == "B":
        return build_omega_B(bundle, degree)
    return build_omega_C(bundle, degree)


def trace_correspondence(direction: str,
                         datum: Union[Cochain, TraceFunctional, CotraceElement],
                         calculus: Optional[DGTruncation] = None):
    """The bijection between cyclic cocycles and closed graded traces (kinds
    A, B) or cotraces (kind C) on the degree-n universal calculus.

    to_trace sends the adjoined-slot components to zero (forced by
    closedness); to_cocycle reads off the carrier-led components.  Both
    directions verify every defining invariant of the result."""
    if direction == "to_trace":
        if not isinstance(datum, Cochain):
            raise PreconditionError("to_trace expects a Cochain")
        phi = datum
        bundle = phi.space.bundle
        n = phi.space.degree
        if not is_cyclic_cocycle(phi):
            raise PreconditionError("to_trace requires a cyclic cocycle")
        omega = calculus if calculus is not None else _calculus_for(bundle, n)
        cpx = _complex_for(bundle)
        d = bundle.carrier.space.dim
        basis = omega.basis_tuples[n]
        amb = phi.space.lift(phi.coords)
        if bundle.kind == "A":
            dim_mo = cpx.dm * omega.dims[n]
            coords = [ZERO] * dim_mo
            for m in range(cpx.dm):
                for k, t in enumerate(basis):
                    if t[0] == 0:
                        continue
                    arg = m * d ** (n + 1)
                    flat = (t[0] - 1)
                    for s in t[1:]:
                        flat = flat * d + s
                    coords[m * omega.dims[n] + k] = amb[arg + flat]
            tf = TraceFunctional(bundle, omega, n, tuple(coords))
            verify_trace(tf)
            return tf
        if bundle.kind == "B":
            dl = d ** (n + 1)
            coords = [ZERO] * (cpx.dm * omega.dims[n])
            for m in range(cpx.dm):
                for k, t in enumerate(basis):
                    if t[0] == 0:
                        continue
                    flat = (t[0] - 1)
                    for s in t[1:]:
                        flat = flat * d + s
                    coords[m * omega.dims[n] + k] = amb[m * dl + flat]
            tf = TraceFunctional(bundle, omega, n, tuple(coords))
            verify_trace(tf)
            return tf
        theta = omega
        dim_mt = cpx.dm * theta.dims[n]
        coords = [ZERO] * dim_mt
        dl = d ** (n + 1)
        for m in range(cpx.dm):
            for k, t in enumerate(theta.basis_tuples[n]):
                if t[0] == 0:
                    continue
                flat = (t[0] - 1)
                for s in t[1:]:
                    flat = flat * d + s
                coords[m * theta.dims[n] + k] = amb[m * dl + flat]
        ce = CotraceElement(bundle, theta, n, tuple(coords))
        verify_cotrace(ce)
        return ce

    if direction != "to_cocycle":
        raise ValueError("direction must be 'to_trace' or 'to_cocycle'")
    if isinstance(datum, TraceFunctional):
        bundle = datum.bundle
        omega = datum.calculus
        n = datum.degree
        verify_trace(datum)
        cpx = _complex_for(bundle)
        d = bundle.carrier.space.dim
        basis = omega.basis_tuples[n]
        sp = cochain_space(bundle, n)
        amb = [ZERO] * sp.ambient.dim
        if bundle.kind == "A":
            for m in range(cpx.dm):
                for k, t in enumerate(basis):
                    if t[0] == 0:
                        continue
                    flat = (t[0] - 1)
                    for s in t[1:]:
                        flat = flat * d + s
                    amb[m * d ** (n + 1) + flat] = datum.coords[m * omega.dims[n] + k]
        else:
            dl = d ** (n + 1)
            for m in range(cpx.dm):
                for k, t in enumerate(basis):
                    if t[0] == 0:
                        continue
                    flat = (t[0] - 1)
                    for s in t[1:]:
                        flat = flat * d + s
                    amb[m * dl + flat] = datum.coords[m * omega.dims[n] + k]
        coords = sp.reduce(tuple(amb))
        if coords is None:
            raise TraceInvariantError("character lies in the equivariant cochain space")
        phi = Cochain(sp, coords)
        if not is_cyclic_cocycle(phi):
            raise TraceInvariantError("character is a cyclic cocycle")
        return phi
    if isinstance(datum, CotraceElement):
        bundle = datum.bundle
        theta = datum.calculus
        n = datum.degree
        verify_cotrace(datum)
        cpx = _complex_for(bundle)
        d = bundle.carrier.space.dim
        sp = cochain_space(bundle, n)
        amb = [ZERO] * sp.ambient.dim
        dl = d ** (n + 1)
        for m in range(cpx.dm):
            for k, t in enumerate(theta.basis_tuples[n]):
                v = datum.coords[m * theta.dims[n] + k]
                if v == 0 or t[0] == 0:
                    continue
                flat = (t[0] - 1)
                for s in t[1:]:
                    flat = flat * d + s
                amb[m * dl + flat] += v
        phi = Cochain(sp, sp.reduce(tuple(amb)))
        if not is_cyclic_cocycle(phi):
            raise TraceInvariantError("character is a cyclic cocycle")
        return phi
    raise PreconditionError("to_cocycle expects a TraceFunctional or CotraceElement")
