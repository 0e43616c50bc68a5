"""Cochain-level maps and homotopies: inner/co-inner automorphism pullbacks,
the contracting homotopy for inner conjugation, and the matrix-algebra
inclusion/trace maps.

The homotopy κ against an invertible coinvariant unit u acts on an n-cochain
f by the alternating sum over insertion positions

    κf(b_0, …, b_{n-1}) = Σ_{i=0}^{n-1} (−1)^i
        f(b_0·u⁻¹, u·b_1·u⁻¹, …, u·b_i·u⁻¹, u, b_{i+1}, …, b_{n-1}),

the convention being pinned by the machine-checked identity
bκ + κb = Ad_u^* − id on the Hochschild complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactla import Matrix, ONE, ZERO, Vector, solve_linear, restrict_map, MapDescentError
from .multilin import Space, tensor_space
from .structures import (
    CoalgebraSpec,
    SymmetryBundle,
    convolution_inverse,
    iterated_comult_matrix,
)
from .cyclic import (
    Cochain,
    CochainSpace,
    OperatorGateError,
    PreconditionError,
    _complex_for,
    cochain_space,
)
from .fixtures import matrix_bundle_B

Q = Fraction


@dataclass(frozen=True)
class CoinvariantUnit:
    """An invertible element u of a comodule algebra with ρ(u) = 1⊗u."""

    bundle: SymmetryBundle
    element: Vector
    inverse: Vector


def coinvariant_unit(bundle: SymmetryBundle, element) -> CoinvariantUnit:
    """Validate coinvariance and invertibility, solving for u⁻¹."""
    if bundle.kind != "B":
        raise PreconditionError("coinvariant units live in kind-B bundles")
    alg = bundle.carrier
    d = alg.space.dim
    u = tuple(Fraction(x) for x in element)
    rho = bundle.structure.coact.matrix  # type: ignore[union-attr]
    dh = bundle.hopf.dim
    coacted = rho.apply(u)
    expected = [ZERO] * (dh * d)
    for hh, hv in enumerate(bundle.hopf.algebra.unit):
        if hv != 0:
            for i, x in enumerate(u):
                expected[hh * d + i] = hv * x
    if list(coacted) != expected:
        raise PreconditionError("element is not H-coinvariant")
    mult = alg.mult.matrix
    left = Matrix.from_rows(
        [[sum((mult[i, a * d + b] * u[a] for a in range(d)), ZERO) for b in range(d)]
         for i in range(d)], cols=d)
    inv = solve_linear(left, alg.unit)
    if inv is None:
        raise PreconditionError("element is not invertible")
    right = Matrix.from_rows(
        [[sum((mult[i, a * d + b] * u[b] for b in range(d)), ZERO) for a in range(d)]
         for i in range(d)], cols=d)
    if right.apply(inv) != tuple(alg.unit):
        raise PreconditionError("element has no two-sided inverse")
    return CoinvariantUnit(bundle, u, tuple(inv))


@dataclass(frozen=True)
class ConvolutionUnit:
    """An H-linear convolution-invertible functional on a module coalgebra."""

    bundle: SymmetryBundle
    functional: Vector
    inverse: Vector


def convolution_unit(bundle: SymmetryBundle, chi) -> ConvolutionUnit:
    if bundle.kind != "C":
        raise PreconditionError("convolution units live in kind-C bundles")
    coalg: CoalgebraSpec = bundle.carrier  # type: ignore[assignment]
    d = coalg.space.dim
    chi = tuple(Fraction(x) for x in chi)
    act = bundle.structure.act.matrix  # type: ignore[union-attr]
    eps_h = bundle.hopf.coalgebra.counit
    for hh in range(bundle.hopf.dim):
        for c in range(d):
            acted = sum((act[r, hh * d + c] * chi[r] for r in range(d)), ZERO)
            if acted != eps_h[hh] * chi[c]:
                raise PreconditionError("functional is not H-linear")
    inv = convolution_inverse(coalg, chi)
    return ConvolutionUnit(bundle, chi, tuple(inv))


def _left_mult_matrix(alg, vec: Vector) -> Matrix:
    d = alg.space.dim
    mult = alg.mult.matrix
    return Matrix.from_rows(
        [[sum((mult[i, a * d + b] * vec[a] for a in range(d)), ZERO) for b in range(d)]
         for i in range(d)], cols=d)


def _right_mult_matrix(alg, vec: Vector) -> Matrix:
    d = alg.space.dim
    mult = alg.mult.matrix
    return Matrix.from_rows(
        [[sum((mult[i, a * d + b] * vec[b] for b in range(d)), ZERO) for a in range(d)]
         for i in range(d)], cols=d)


def _hom_precompose(space_src: CochainSpace, space_tgt: CochainSpace, arg: Matrix) -> Matrix:
    """Kind-B cochain map F ↦ F∘arg between canonical coordinates."""
    cpx = _complex_for(space_src.bundle)
    dm = cpx.dm
    nvars = dm * arg.rows
    out_cols = []
    for var in range(nvars):
        m_row, b_col = divmod(var, arg.rows)
        out = [ZERO] * (dm * arg.cols)
        for c in range(arg.cols):
            v = arg[b_col, c]
            if v != 0:
                out[m_row * arg.cols + c] = v
        out_cols.append(out)
    amb = Matrix.from_rows(
        [[out_cols[j][i] for j in range(nvars)] for i in range(dm * arg.cols)], cols=nvars)
    try:
        return restrict_map(amb, space_src.equivariant, space_tgt.equivariant)
    except MapDescentError as e:
        raise OperatorGateError("cochain map preserves H-colinearity", str(e))


def ad_u_pullback(u: CoinvariantUnit, phi: Cochain) -> Cochain:
    """(Ad_u^*φ)(b_0,…,b_n) = φ(u·b_0·u⁻¹, …, u·b_n·u⁻¹)."""
    bundle = u.bundle
    if phi.space.bundle is not bundle:
        raise PreconditionError("cochain and unit live over different bundles")
    alg = bundle.carrier
    conj = _left_mult_matrix(alg, u.element).mul(_right_mult_matrix(alg, u.inverse))
    n = phi.space.degree
    arg = conj
    for _ in range(n):
        arg = arg.kron(conj)
    op = _hom_precompose(phi.space, phi.space, arg)
    return Cochain(phi.space, op.apply(phi.coords))


_KAPPA_CACHE: dict = {}


def kappa_matrix(u: CoinvariantUnit, n: int) -> Matrix:
    """Matrix of the homotopy on degree-n cochains, in canonical coordinates.

    The summand against insertion position i carries sign (−1)^{i+1}: that
    orientation is the one (machine-verified) for which bκ + κb = Ad_u^* − id
    on the Hochschild complex."""
    key = (id(u.bundle), u.element, u.inverse, n)
    cached = _KAPPA_CACHE.get(key)
    if cached is not None:
        return cached
    bundle = u.bundle
    if n < 1:
        raise PreconditionError("the homotopy needs degree >= 1")
    alg = bundle.carrier
    d = alg.space.dim
    r_inv = _right_mult_matrix(alg, u.inverse)
    conj = _left_mult_matrix(alg, u.element).mul(r_inv)
    u_col = Matrix.from_rows([[x] for x in u.element], cols=1)
    src = cochain_space(bundle, n)
    tgt = cochain_space(bundle, n - 1)
    total: Optional[Matrix] = None
    for i in range(n):
        mats = [r_inv] + [conj] * i + [u_col] + [Matrix.identity(d)] * (n - 1 - i)
        arg = mats[0]
        for m in mats[1:]:
            arg = arg.kron(m)
        op = _hom_precompose(src, tgt, arg)
        term = op.scale(-ONE) if i % 2 == 0 else op
        total = term if total is None else total.add(term)
    _KAPPA_CACHE[key] = total
    return total


def kappa_homotopy(u: CoinvariantUnit, f: Cochain) -> Cochain:
    """The contracting homotopy of Ad_u^* − id on the Hochschild complex."""
    n = f.space.degree
    tgt = cochain_space(u.bundle, n - 1)
    return Cochain(tgt, kappa_matrix(u, n).apply(f.coords))


def matrix_maps(bundle: SymmetryBundle, size: int):
    """(i_star, tr_map) between cochains of B and of M_size(B).

    i_star precomposes with b ↦ b⊗e_11; tr_map weights by the trace of the
    matrix-unit product.  i_star∘tr_map = id at cochain level."""
    if size < 1:
        raise PreconditionError("matrix size must be >= 1")
    mat_bundle = matrix_bundle_B(bundle, size)
    d = bundle.carrier.space.dim
    dk = d * size * size

    def degree_maps(p: int):
        sp_b = cochain_space(bundle, p)
        sp_m = cochain_space(mat_bundle, p)
        ent = [ZERO] * (dk * d)
        for b in range(d):
            ent[(b * size * size) * d + b] = ONE  # b ⊗ E_11
        inc = Matrix(dk, d, tuple(ent))
        arg_i = inc
        for _ in range(p):
            arg_i = arg_i.kron(inc)
        i_star = _hom_precompose(sp_m, sp_b, arg_i)

        # trace map: M_k(B)^{⊗(p+1)} -> B^{⊗(p+1)} weighted by tr(m_0⋯m_p)
        rows_dim = d ** (p + 1)
        cols_dim = dk ** (p + 1)
        ent = [ZERO] * (rows_dim * cols_dim)
        for col in range(cols_dim):
            rest = col
            digits = []
            for _ in range(p + 1):
                digits.append(rest % dk)
                rest //= dk
            digits.reverse()
            bs, rs, ss = [], [], []
            for dig in digits:
                b, rc = divmod(dig, size * size)
                r, s = divmod(rc, size)
                bs.append(b)
                rs.append(r)
                ss.append(s)
            ok = all(ss[t] == rs[(t + 1) % (p + 1)] for t in range(p + 1))
            if not ok:
                continue
            row = 0
            for b in bs:
                row = row * d + b
            ent[row * cols_dim + col] = ONE
        arg_tr = Matrix(rows_dim, cols_dim, tuple(ent))
        tr_map = _hom_precompose(sp_b, sp_m, arg_tr)
        return i_star, tr_map, sp_b, sp_m

    return mat_bundle, degree_maps


def ad_chi_pullback(chi: ConvolutionUnit, y: Cochain) -> Cochain:
    """Pullback along the co-inner automorphism
    Ad_χ(c) = χ(c^{(1)})·c^{(2)}·χ^{-1}(c^{(3)}), applied in every tensor slot
    of M⊗_H C^{⊗(n+1)}."""
    bundle = chi.bundle
    if y.space.bundle is not bundle:
        raise PreconditionError("cochain and functional live over different bundles")
    coalg: CoalgebraSpec = bundle.carrier  # type: ignore[assignment]
    d = coalg.space.dim
    delta2 = iterated_comult_matrix_coalg(coalg, 2)
    chi_row = Matrix.from_rows([list(chi.functional)], cols=d)
    inv_row = Matrix.from_rows([list(chi.inverse)], cols=d)
    ad = chi_row.kron(Matrix.identity(d)).kron(inv_row).mul(delta2)
    cpx = _complex_for(bundle)
    n = y.space.degree
    big = Matrix.identity(cpx.dm)
    for _ in range(n + 1):
        big = big.kron(ad)
    from .exactla import induce_map

    try:
        op = induce_map(big, y.space.quotient, y.space.quotient)
    except MapDescentError as e:
        raise OperatorGateError("co-inner pullback descends to the quotient", str(e))
    return Cochain(y.space, op.apply(y.coords))


def iterated_comult_matrix_coalg(coalg: CoalgebraSpec, n: int) -> Matrix:
    """Matrix of the n-fold coproduct C -> C^{⊗(n+1)} of a plain coalgebra."""
    d = coalg.space.dim
    out = Matrix.identity(d)
    dm = coalg.comult.matrix
    legs = 1
    for _ in range(n):
        out = dm.kron(Matrix.identity(d ** (legs - 1))).mul(out) if legs > 1 else dm.mul(out)
        legs += 1
    return out
