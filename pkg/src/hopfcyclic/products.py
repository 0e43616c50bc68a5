"""Cup products: the pairing into the ordinary cyclic cohomology of a twisted
tensor product algebra, and the pairing through the convolution algebra
Hom_H(C, A) with pullback along the evaluation map.

Both products are computed exactly the way they are defined: the cochain
inputs are lifted to closed graded traces/cotraces on universal calculi, the
relevant DG construction (twisted product or convolution algebra) is built,
and the output cochain is the character ξ⃗ ↦ ∫(ξ_0·dξ_1⋯dξ_{p+q}) evaluated
on basis tuples.  Every output is verified to be an ordinary cyclic cocycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactla import Matrix, ONE, ZERO, Vector
from .multilin import LinMap, Space, permute_map_output, tensor_space
from .structures import (
    AlgebraSpec,
    CoalgebraSpec,
    SymmetryBundle,
    validate,
)
from .calculi import (
    ConvolutionDG,
    DGTruncation,
    HomElt,
    SmashDG,
    SparseElt,
    _merge,
    build_omega_A,
    build_omega_B,
    build_omega_C,
    dg_convolution,
    dg_smash,
    theta_diff,
)
from .cyclic import (
    Cochain,
    CotraceElement,
    PreconditionError,
    TraceFunctional,
    _complex_for,
    _theta_relations,
    coboundary_test,
    cochain_space,
    is_cyclic_cocycle,
    trace_correspondence,
)
from .fixtures import ordinary_bundle

Q = Fraction


@dataclass(eq=False)
class SmashAlgebra:
    """The twisted tensor product algebra of a module algebra and a comodule
    algebra over the same Hopf algebra."""

    algebra: AlgebraSpec
    bundle_a: SymmetryBundle
    bundle_b: SymmetryBundle
    ordinary: SymmetryBundle  # the target bundle for ordinary cyclic cochains


def smash_algebra(bundle_a: SymmetryBundle, bundle_b: SymmetryBundle) -> SmashAlgebra:
    """(a1⊗b1)(a2⊗b2) = a1·(b1^(-1)·a2) ⊗ b1^(0)·b2, validated associative
    and unital."""
    if bundle_a.kind != "A" or bundle_b.kind != "B":
        raise PreconditionError("smash_algebra expects a kind-A and a kind-B bundle")
    if bundle_a.hopf != bundle_b.hopf:
        raise PreconditionError("smash_algebra requires a common Hopf algebra")
    a_alg: AlgebraSpec = bundle_a.carrier  # type: ignore[assignment]
    b_alg: AlgebraSpec = bundle_b.carrier  # type: ignore[assignment]
    da, db = a_alg.space.dim, b_alg.space.dim
    dh = bundle_a.hopf.dim
    sp = tensor_space(a_alg.space, b_alg.space)
    coact = bundle_b.structure.coact.matrix  # type: ignore[union-attr]
    act = bundle_a.structure.act.matrix  # type: ignore[union-attr]
    s1 = Matrix.identity(da).kron(coact).kron(Matrix.identity(da * db))
    s2 = permute_map_output(s1, (da, dh, db, da, db), (0, 1, 3, 2, 4))
    s3 = Matrix.identity(da).kron(act).kron(Matrix.identity(db * db)).mul(s2)
    mult = a_alg.mult.matrix.kron(b_alg.mult.matrix).mul(s3)
    unit = [ZERO] * (da * db)
    for i, x in enumerate(a_alg.unit):
        for j, y in enumerate(b_alg.unit):
            if x != 0 and y != 0:
                unit[i * db + j] = x * y
    alg = AlgebraSpec(sp, LinMap(tensor_space(sp, sp), sp, mult), tuple(unit))
    rep = validate(alg)
    if not rep.passed:
        raise PreconditionError(
            f"smash product is not a unital associative algebra: {rep.failed_names()} "
            f"(witness {rep.failures()[0].witness})")
    return SmashAlgebra(alg, bundle_a, bundle_b, ordinary_bundle(alg))


def _as_trace_A(psi: Cochain, omega: DGTruncation) -> TraceFunctional:
    return trace_correspondence("to_trace", psi, calculus=omega)


def cup_first(phi: Cochain, psi: Cochain, smash: Optional[SmashAlgebra] = None) -> Cochain:
    """Cup product of a kind-B cyclic cocycle (degree p) and a kind-A cyclic
    cocycle (degree q): an ordinary cyclic cocycle of degree p+q on the
    twisted tensor product algebra.

    The inputs are lifted to closed graded traces ∫ on Γ^p and ∫' on M⊗Ω^q;
    the output is the character of ∫″(ω⊗γ) = ∫'((∫γ)⊗ω) evaluated on
    ξ_0·dξ_1⋯dξ_{p+q} inside the twisted DG product."""
    bundle_b = phi.space.bundle
    bundle_a = psi.space.bundle
    if bundle_b.kind != "B" or bundle_a.kind != "A":
        raise PreconditionError("cup_first expects (kind-B cochain, kind-A cochain)")
    if bundle_a.hopf != bundle_b.hopf or bundle_a.coeffs != bundle_b.coeffs:
        raise PreconditionError("cup_first requires a common Hopf algebra and coefficients")
    p = phi.space.degree
    q = psi.space.degree
    n = p + q
    if not is_cyclic_cocycle(phi) or not is_cyclic_cocycle(psi):
        raise PreconditionError("cup_first requires cyclic cocycles")
    omega = build_omega_A(bundle_a, n)
    gamma = build_omega_B(bundle_b, n)
    tr_psi = _as_trace_A(psi, build_omega_A(bundle_a, q))
    tr_phi = trace_correspondence("to_trace", phi, calculus=build_omega_B(bundle_b, p))
    sm = dg_smash(omega, gamma, max_degree=n, gate_degree=min(n, 2))
    if smash is None:
        smash = smash_algebra(bundle_a, bundle_b)
    cpx = _complex_for(bundle_a)
    dm = cpx.dm
    da = bundle_a.carrier.space.dim
    db = bundle_b.carrier.space.dim
    dim_gq = gamma.dims[p]
    dim_oq = omega.dims[q]

    def integrate(elt: SparseElt) -> Fraction:
        # ∫″ on the (q, p) component: ∫'((∫γ)⊗ω)
        total = ZERO
        for (i, j, k), v in elt.items():
            if i != q or j != p:
                continue
            o, g = divmod(k, dim_gq)
            # ∫γ ∈ M from the kind-B trace, then pair with the kind-A trace
            for m in range(dm):
                mg = tr_phi.coords[m * dim_gq + g]
                if mg != 0:
                    total += v * mg * tr_psi.coords[m * dim_oq + o]
        return total

    r_dim = da * db
    values = []
    tuples_dim = r_dim ** (n + 1)
    for flat in range(tuples_dim):
        rest = flat
        digits = []
        for _ in range(n + 1):
            digits.append(rest % r_dim)
            rest //= r_dim
        digits.reverse()
        elt = None
        for pos, dig in enumerate(digits):
            a, b = divmod(dig, db)
            j0: SparseElt = {(0, 0, (a + 1) * (db + 1) + (b + 1)): ONE}
            term = j0 if pos == 0 else sm.diff_element(j0)
            elt = term if elt is None else sm.mult_elements(elt, term)
        values.append(integrate(elt))
    sp = cochain_space(smash.ordinary, n)
    out = Cochain(sp, sp.reduce(tuple(values)))
    if not is_cyclic_cocycle(out):
        raise PreconditionError("cup_first output failed the cyclic-cocycle check")
    return out


@dataclass(eq=False)
class CoalgebraAction:
    """An action of a module coalgebra on a module algebra:
    c(ab) = c^(1)(a)·c^(2)(b), c(1) = ε(c)1, (h·c)(a) = h·(c(a))."""

    bundle_c: SymmetryBundle
    bundle_a: SymmetryBundle
    pairing: LinMap  # C⊗A -> A

    def __post_init__(self):
        if self.bundle_c.kind != "C" or self.bundle_a.kind != "A":
            raise PreconditionError("CoalgebraAction pairs a kind-C and a kind-A bundle")
        if self.bundle_c.hopf != self.bundle_a.hopf:
            raise PreconditionError("CoalgebraAction requires a common Hopf algebra")

    def validate(self) -> None:
        coalg: CoalgebraSpec = self.bundle_c.carrier  # type: ignore[assignment]
        alg: AlgebraSpec = self.bundle_a.carrier  # type: ignore[assignment]
        dc, da = coalg.space.dim, alg.space.dim
        dh = self.bundle_c.hopf.dim
        pair = self.pairing.matrix
        lhs = pair.mul(Matrix.identity(dc).kron(alg.mult.matrix))
        comult = coalg.comult.matrix
        inner = permute_map_output(
            comult.kron(Matrix.identity(da * da)), (dc, dc, da, da), (0, 2, 1, 3))
        rhs = alg.mult.matrix.mul(pair.kron(pair)).mul(inner)
        if not lhs.sub(rhs).is_zero():
            raise PreconditionError("coalgebra action violates c(ab) = c^(1)(a)c^(2)(b)")
        ucol = Matrix.from_rows([[x] for x in alg.unit], cols=1)
        lhs_u = pair.mul(Matrix.identity(dc).kron(ucol))
        rhs_u = ucol.mul(Matrix.from_rows([list(coalg.counit)], cols=dc))
        if not lhs_u.sub(rhs_u).is_zero():
            raise PreconditionError("coalgebra action violates c(1) = ε(c)1")
        act_c = self.bundle_c.structure.act.matrix  # type: ignore[union-attr]
        act_a = self.bundle_a.structure.act.matrix  # type: ignore[union-attr]
        lhs_h = pair.mul(act_c.kron(Matrix.identity(da)))
        rhs_h = act_a.mul(Matrix.identity(dh).kron(pair))
        if not lhs_h.sub(rhs_h).is_zero():
            raise PreconditionError("coalgebra action violates (h·c)(a) = h(c(a))")


@dataclass(eq=False)
class HomAlgebra:
    """Hom_H(C, A) with the convolution product, together with the evaluation
    algebra map e: A -> Hom_H(C, A)."""

    algebra: AlgebraSpec
    basis_maps: tuple[Matrix, ...]  # each A-dim x C-dim
    action: CoalgebraAction
    evaluation: LinMap  # A -> Hom_H(C,A) in basis coordinates
    ordinary: SymmetryBundle


def hom_algebra(action: CoalgebraAction) -> HomAlgebra:
    """Solve for the H-linear maps C -> A, realise the convolution product as
    an explicit algebra, and certify that evaluation is multiplicative."""
    action.validate()
    coalg: CoalgebraSpec = action.bundle_c.carrier  # type: ignore[assignment]
    alg: AlgebraSpec = action.bundle_a.carrier  # type: ignore[assignment]
    dc, da = coalg.space.dim, alg.space.dim
    dh = action.bundle_c.hopf.dim
    act_c = action.bundle_c.structure.act.matrix  # type: ignore[union-attr]
    act_a = action.bundle_a.structure.act.matrix  # type: ignore[union-attr]
    from .exactla import Subspace, kernel_basis, solve_linear

    nvars = da * dc
    rows = []
    for hh in range(dh):
        for r in range(da):
            for c in range(dc):
                row = [ZERO] * nvars
                for b in range(dc):
                    v = act_c[b, hh * dc + c]
                    if v != 0:
                        row[r * dc + b] += v
                for s in range(da):
                    v = act_a[r, hh * da + s]
                    if v != 0:
                        row[s * dc + c] -= v
                if any(x != 0 for x in row):
                    rows.append(row)
    sub = Subspace.full(nvars) if not rows else kernel_basis(Matrix.from_rows(rows, cols=nvars))
    basis = tuple(Matrix(da, dc, tuple(sub.basis.row(i))) for i in range(sub.dim))
    dim = len(basis)
    sp = Space.make(f"Hom({coalg.space.name},{alg.space.name})",
                    tuple(f"f{i}" for i in range(dim)))
    comult = coalg.comult.matrix
    mult_a = alg.mult.matrix

    def conv(f: Matrix, g: Matrix) -> Matrix:
        return mult_a.mul(f.kron(g)).mul(comult)

    def to_coords(f: Matrix) -> Vector:
        coords = sub.coords_of(f.entries)
        if coords is None:
            raise PreconditionError("convolution leaves Hom_H(C, A)")
        return coords

    cols = []
    for i in range(dim):
        for j in range(dim):
            cols.append(to_coords(conv(basis[i], basis[j])))
    mult_rows = [[cols[c][r] for c in range(dim * dim)] for r in range(dim)]
    mult = LinMap(tensor_space(sp, sp), sp,
                  Matrix.from_rows(mult_rows, cols=dim * dim))
    unit_map = Matrix.from_rows(
        [[alg.unit[r] * coalg.counit[c] for c in range(dc)] for r in range(da)], cols=dc)
    unit = to_coords(unit_map)
    hom_alg = AlgebraSpec(sp, mult, unit)
    rep = validate(hom_alg)
    if not rep.passed:
        raise PreconditionError(f"convolution algebra failed validation: {rep.failed_names()}")
    pair = action.pairing.matrix
    ev_cols = []
    for a in range(da):
        f = Matrix.from_rows([[pair[r, c * da + a] for c in range(dc)] for r in range(da)],
                             cols=dc)
        ev_cols.append(to_coords(f))
    ev = LinMap(alg.space, sp,
                Matrix.from_rows([[ev_cols[a][r] for a in range(da)] for r in range(dim)],
                                 cols=da))
    for a in range(da):
        for b in range(da):
            fa = Matrix(da, dc, tuple(sub.vector_of(ev.matrix.apply(alg.space.basis_vector(a)))))
            fb = Matrix(da, dc, tuple(sub.vector_of(ev.matrix.apply(alg.space.basis_vector(b)))))
            prod = conv(fa, fb)
            ab = alg.mult.matrix.apply(
                tuple(x * y for x in alg.space.basis_vector(a) for y in alg.space.basis_vector(b)))
            fab = Matrix(da, dc, tuple(sub.vector_of(ev.matrix.apply(ab))))
            if not prod.sub(fab).is_zero():
                raise PreconditionError("evaluation map is not multiplicative")
    return HomAlgebra(hom_alg, basis, action, ev, ordinary_bundle(hom_alg))


def _e_tilde(action: CoalgebraAction, theta: DGTruncation, omega: DGTruncation,
             a_vec: Vector) -> Matrix:
    """The evaluation of an element of A as a map Θ_0 -> Ω^0 (ê ↦ 0)."""
    dc = action.bundle_c.carrier.space.dim
    da = action.bundle_a.carrier.space.dim
    pair = action.pairing.matrix
    ent = [ZERO] * ((da + 1) * (dc + 1))
    for c in range(dc):
        for r in range(da):
            v = sum((pair[r, c * da + a] * a_vec[a] for a in range(da)), ZERO)
            if v != 0:
                ent[(r + 1) * (dc + 1) + (c + 1)] = v
    return Matrix(da + 1, dc + 1, tuple(ent))


def _hom_as_theta_omega(f: Matrix, dc: int, da: int) -> Matrix:
    """Lift an H-linear map C -> A to Θ_0 -> Ω^0 with ê ↦ 0."""
    ent = [ZERO] * ((da + 1) * (dc + 1))
    for r in range(da):
        for c in range(dc):
            v = f[r, c]
            if v != 0:
                ent[(r + 1) * (dc + 1) + (c + 1)] = v
    return Matrix(da + 1, dc + 1, tuple(ent))


def cup_second(x: Cochain, psi: Cochain, action: Optional[CoalgebraAction] = None,
               hom: Optional[HomAlgebra] = None):
    """Cup product of a kind-C cyclic cocycle (degree p) and a kind-A cyclic
    cocycle (degree q) through the convolution DG algebra Hom_H(Θ, Ω).

    Returns the cyclic cocycle on Hom_H(C, A); when an action is supplied the
    pullback along evaluation, an ordinary cyclic cocycle on A, is returned as
    well: (cocycle_on_hom, cocycle_on_A or None)."""
    bundle_c = x.space.bundle
    bundle_a = psi.space.bundle
    if bundle_c.kind != "C" or bundle_a.kind != "A":
        raise PreconditionError("cup_second expects (kind-C cochain, kind-A cochain)")
    if bundle_c.hopf != bundle_a.hopf or bundle_c.coeffs != bundle_a.coeffs:
        raise PreconditionError("cup_second requires a common Hopf algebra and coefficients")
    p = x.space.degree
    q = psi.space.degree
    n = p + q
    if not is_cyclic_cocycle(x) or not is_cyclic_cocycle(psi):
        raise PreconditionError("cup_second requires cyclic cocycles")
    theta = build_omega_C(bundle_c, p)
    omega = build_omega_A(bundle_a, q)
    cot = trace_correspondence("to_trace", x, calculus=theta)
    tr_psi = trace_correspondence("to_trace", psi, calculus=omega)
    conv = dg_convolution(theta, omega, max_degree=n, gate_degree=min(n, 2))
    cpx = _complex_for(bundle_a)
    dm = cpx.dm
    dim_tp = theta.dims[p]
    dim_oq = omega.dims[q]
    rel = _theta_relations(_complex_for(bundle_c), theta, p)

    def integrate(f: HomElt) -> Fraction:
        fm = f.get((p, q))
        if fm is None:
            return ZERO
        # well-definedness on M⊗_H Θ_p: ∫(id⊗F) kills the relations
        for i in range(rel.dim):
            rv = rel.basis.row(i)
            s = ZERO
            for m in range(dm):
                for t in range(dim_tp):
                    v = rv[m * dim_tp + t]
                    if v != 0:
                        col = [fm[r, t] for r in range(dim_oq)]
                        for r, fv in enumerate(col):
                            if fv != 0:
                                s += v * fv * tr_psi.coords[m * dim_oq + r]
            if s != 0:
                raise PreconditionError("pairing is not well-defined on M⊗_H Θ")
        total = ZERO
        for m in range(dm):
            for t in range(dim_tp):
                v = cot.coords[m * dim_tp + t]
                if v == 0:
                    continue
                for r in range(dim_oq):
                    fv = fm[r, t]
                    if fv != 0:
                        total += v * fv * tr_psi.coords[m * dim_oq + r]
        return total

    if action is not None:
        action.validate()
        if hom is None:
            hom = hom_algebra(action)
    elif hom is not None:
        action = hom.action

    dc = bundle_c.carrier.space.dim
    da = bundle_a.carrier.space.dim

    def character(lifts: list[Matrix]) -> Fraction:
        elt: Optional[HomElt] = None
        for pos, f0 in enumerate(lifts):
            term: HomElt = {(0, 0): f0}
            if pos > 0:
                term = conv.conv_diff(term)
            elt = term if elt is None else conv.conv_mult(elt, term)
        return integrate(elt)

    hom_cocycle = None
    if hom is not None:
        dim_h = hom.algebra.space.dim
        values = []
        for flat in range(dim_h ** (n + 1)):
            rest = flat
            digits = []
            for _ in range(n + 1):
                digits.append(rest % dim_h)
                rest //= dim_h
            digits.reverse()
            lifts = [_hom_as_theta_omega(hom.basis_maps[d], dc, da) for d in digits]
            values.append(character(lifts))
        sp = cochain_space(hom.ordinary, n)
        hom_cocycle = Cochain(sp, sp.reduce(tuple(values)))
        if not is_cyclic_cocycle(hom_cocycle):
            raise PreconditionError("cup_second output on Hom_H(C,A) failed the cyclic-cocycle check")
    if action is None:
        raise PreconditionError("cup_second needs a CoalgebraAction or a HomAlgebra")
    values = []
    for flat in range(da ** (n + 1)):
        rest = flat
        digits = []
        for _ in range(n + 1):
            digits.append(rest % da)
            rest //= da
        digits.reverse()
        lifts = [_e_tilde(action, theta, omega,
                          bundle_a.carrier.space.basis_vector(d)) for d in digits]
        values.append(character(lifts))
    ord_a = ordinary_bundle(bundle_a.carrier)
    sp_a = cochain_space(ord_a, n)
    a_cocycle = Cochain(sp_a, sp_a.reduce(tuple(values)))
    if not is_cyclic_cocycle(a_cocycle):
        raise PreconditionError("cup_second pullback failed the cyclic-cocycle check")
    return hom_cocycle, a_cocycle


def class_invariance_check(product: str, inputs: tuple, perturbation: Cochain,
                           **kwargs) -> bool:
    """Shift the first cup input by the coboundary of a cyclic cochain and
    test that the output class is unchanged (difference is a coboundary)."""
    first, second = inputs
    cpx = _complex_for(first.space.bundle)
    n = perturbation.space.degree
    if n != first.space.degree - 1:
        raise PreconditionError("perturbation degree must be one below the first input")
    _, lam = cpx.operators(n)
    if lam.apply(perturbation.coords) != perturbation.coords:
        raise PreconditionError("perturbation must be a cyclic cochain")
    b_mat, _ = cpx.operators(n)
    shifted = Cochain(first.space,
                      tuple(a + b for a, b in zip(first.coords, b_mat.apply(perturbation.coords))))
    if product == "first":
        smash = kwargs.get("smash") or smash_algebra(second.space.bundle, first.space.bundle)
        base = cup_first(first, second, smash=smash)
        moved = cup_first(shifted, second, smash=smash)
        diff = Cochain(base.space, tuple(a - b for a, b in zip(moved.coords, base.coords)))
        return coboundary_test(diff) is not None
    if product == "second":
        action = kwargs.get("action")
        hom = kwargs.get("hom")
        base = cup_second(first, second, action=action, hom=hom)[1]
        moved = cup_second(shifted, second, action=action, hom=hom)[1]
        diff = Cochain(base.space, tuple(a - b for a, b in zip(moved.coords, base.coords)))
        return coboundary_test(diff) is not None
    raise ValueError("product must be 'first' or 'second'")
