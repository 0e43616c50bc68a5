"""Structure-constant algebra/coalgebra/Hopf data and the axiom verifier.

Every axiom is an exact matrix identity between composites of the structure
maps; by multilinearity, checking it on the chosen bases decides it on the
whole space.  ``validate`` never stops at the first failure: it returns an
exhaustive report, with a witness basis tuple for each violated identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .exactla import (
    Matrix,
    Vector,
    ZERO,
    ONE,
    kernel_basis,
    rank,
    rref,
    solve_linear,
)
from .multilin import (
    LinMap,
    Space,
    TensorElement,
    flat_index,
    multi_index,
    permute_map_output,
    tensor_space,
)

Q = Fraction


class SpecFormatError(ValueError):
    """The pieces of a structure spec do not fit together shape-wise."""


class NonInvertibleAntipodeError(ValueError):
    """The antipode matrix is singular, so S^{-1} does not exist."""


class ConvolutionNotInvertibleError(ValueError):
    """A functional has no convolution inverse."""


@dataclass(frozen=True)
class AlgebraSpec:
    space: Space
    mult: LinMap
    unit: Vector

    def __post_init__(self):
        d = self.space.dim
        if self.mult.matrix.rows != d or self.mult.matrix.cols != d * d:
            raise SpecFormatError("mult must map A⊗A to A")
        if len(self.unit) != d:
            raise SpecFormatError("unit vector has wrong length")


@dataclass(frozen=True)
class CoalgebraSpec:
    space: Space
    comult: LinMap
    counit: Vector

    def __post_init__(self):
        d = self.space.dim
        if self.comult.matrix.rows != d * d or self.comult.matrix.cols != d:
            raise SpecFormatError("comult must map C to C⊗C")
        if len(self.counit) != d:
            raise SpecFormatError("counit functional has wrong length")


@dataclass(frozen=True)
class HopfAlgebraSpec:
    algebra: AlgebraSpec
    coalgebra: CoalgebraSpec
    antipode: LinMap

    def __post_init__(self):
        if self.algebra.space.dim != self.coalgebra.space.dim:
            raise SpecFormatError("algebra and coalgebra live on different spaces")
        d = self.algebra.space.dim
        if self.antipode.matrix.rows != d or self.antipode.matrix.cols != d:
            raise SpecFormatError("antipode must be an endomorphism of H")

    @property
    def space(self) -> Space:
        return self.algebra.space

    @property
    def dim(self) -> int:
        return self.algebra.space.dim


@dataclass(frozen=True)
class ActionSpec:
    hopf: HopfAlgebraSpec
    carrier: Space
    act: LinMap

    def __post_init__(self):
        h, v = self.hopf.dim, self.carrier.dim
        if self.act.matrix.rows != v or self.act.matrix.cols != h * v:
            raise SpecFormatError("action must map H⊗V to V")


@dataclass(frozen=True)
class CoactionSpec:
    hopf: HopfAlgebraSpec
    carrier: Space
    coact: LinMap
    side: str = "left"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise SpecFormatError("coaction side must be 'left' or 'right'")
        h, v = self.hopf.dim, self.carrier.dim
        if self.coact.matrix.rows != h * v or self.coact.matrix.cols != v:
            raise SpecFormatError("coaction must map V to H⊗V (left) or V⊗H (right)")


@dataclass(frozen=True)
class SAYDSpec:
    """Left-left stable anti-Yetter-Drinfeld coefficient module."""

    action: ActionSpec
    coaction: CoactionSpec

    def __post_init__(self):
        if self.action.carrier.dim != self.coaction.carrier.dim:
            raise SpecFormatError("action and coaction carriers differ")
        if self.coaction.side != "left":
            raise SpecFormatError("SAYD modules use a left coaction")

    @property
    def hopf(self) -> HopfAlgebraSpec:
        return self.action.hopf

    @property
    def carrier(self) -> Space:
        return self.action.carrier


@dataclass(frozen=True)
class ModularPair:
    """A character delta and group-like sigma, accepted iff ^sigma k_delta is SAYD."""

    hopf: HopfAlgebraSpec
    delta: Vector
    sigma: Vector

    def to_sayd(self) -> SAYDSpec:
        h = self.hopf
        m_space = Space.make("k", ("m",))
        act = LinMap(
            tensor_space(h.space, m_space),
            m_space,
            Matrix.from_rows([list(self.delta)], cols=h.dim),
        )
        coact = LinMap(
            m_space,
            tensor_space(h.space, m_space),
            Matrix.from_rows([[x] for x in self.sigma], cols=1),
        )
        return SAYDSpec(ActionSpec(h, m_space, act), CoactionSpec(h, m_space, coact))


@dataclass(frozen=True)
class SymmetryBundle:
    """A module algebra (A), comodule algebra (B) or module coalgebra (C)
    over a Hopf algebra, with SAYD coefficients."""

    kind: str
    hopf: HopfAlgebraSpec
    carrier: Union[AlgebraSpec, CoalgebraSpec]
    structure: Union[ActionSpec, CoactionSpec]
    coeffs: SAYDSpec

    def __post_init__(self):
        if self.kind not in ("A", "B", "C"):
            raise SpecFormatError("bundle kind must be A, B or C")
        if self.kind in ("A", "B") and not isinstance(self.carrier, AlgebraSpec):
            raise SpecFormatError("kinds A and B carry an algebra")
        if self.kind == "C" and not isinstance(self.carrier, CoalgebraSpec):
            raise SpecFormatError("kind C carries a coalgebra")
        if self.kind in ("A", "C") and not isinstance(self.structure, ActionSpec):
            raise SpecFormatError("kinds A and C use an H-action")
        if self.kind == "B" and not isinstance(self.structure, CoactionSpec):
            raise SpecFormatError("kind B uses an H-coaction")
        if self.structure.carrier.dim != self.carrier.space.dim:
            raise SpecFormatError("structure map lives on the wrong carrier")
        if self.coeffs.hopf.dim != self.hopf.dim:
            raise SpecFormatError("coefficients live over a different Hopf algebra")


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    witness: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class ValidationReport:
    subject: str
    checks: tuple[ValidationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[ValidationCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def failed_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.failures())


def _id(n: int) -> Matrix:
    return Matrix.identity(n)


def _kron(*mats: Matrix) -> Matrix:
    out = mats[0]
    for m in mats[1:]:
        out = out.kron(m)
    return out


def _col(v: Sequence[Fraction]) -> Matrix:
    return Matrix.from_rows([[x] for x in v], cols=1)


def _row(v: Sequence[Fraction]) -> Matrix:
    return Matrix.from_rows([list(v)], cols=len(v))


def _witness(diff: Matrix, arg_spaces: Sequence[Space]) -> Optional[tuple[str, ...]]:
    dims = [s.dim for s in arg_spaces]
    for j in range(diff.cols):
        if any(diff[i, j] != 0 for i in range(diff.rows)):
            multi = multi_index(j, dims) if dims else ()
            return tuple(s.basis_labels[i] for s, i in zip(arg_spaces, multi))
    return None


def _check(name: str, lhs: Matrix, rhs: Matrix, arg_spaces: Sequence[Space]) -> ValidationCheck:
    diff = lhs.sub(rhs)
    if diff.is_zero():
        return ValidationCheck(name, True, None)
    return ValidationCheck(name, False, _witness(diff, arg_spaces))


def _algebra_checks(a: AlgebraSpec, prefix: str = "") -> list[ValidationCheck]:
    d = a.space.dim
    m = a.mult.matrix
    i = _id(d)
    assoc_l = m.mul(_kron(m, i))
    assoc_r = m.mul(_kron(i, m))
    u = _col(a.unit)
    unit_l = m.mul(_kron(u, i))
    unit_r = m.mul(_kron(i, u))
    sp = a.space
    return [
        _check(prefix + "algebra.associativity", assoc_l, assoc_r, (sp, sp, sp)),
        _check(prefix + "algebra.unit.left", unit_l, i, (sp,)),
        _check(prefix + "algebra.unit.right", unit_r, i, (sp,)),
    ]


def _coalgebra_checks(c: CoalgebraSpec, prefix: str = "") -> list[ValidationCheck]:
    d = c.space.dim
    dm = c.comult.matrix
    i = _id(d)
    coassoc_l = _kron(dm, i).mul(dm)
    coassoc_r = _kron(i, dm).mul(dm)
    e = _row(c.counit)
    counit_l = _kron(e, i).mul(dm)
    counit_r = _kron(i, e).mul(dm)
    sp = c.space
    return [
        _check(prefix + "coalgebra.coassociativity", coassoc_l, coassoc_r, (sp,)),
        _check(prefix + "coalgebra.counit.left", counit_l, i, (sp,)),
        _check(prefix + "coalgebra.counit.right", counit_r, i, (sp,)),
    ]


def _hopf_checks(h: HopfAlgebraSpec, prefix: str = "") -> list[ValidationCheck]:
    d = h.dim
    sp = h.space
    m = h.algebra.mult.matrix
    dm = h.coalgebra.comult.matrix
    u = _col(h.algebra.unit)
    e = _row(h.coalgebra.counit)
    s = h.antipode.matrix
    i = _id(d)
    checks = _algebra_checks(h.algebra, prefix) + _coalgebra_checks(h.coalgebra, prefix)
    bialg_mult = _check(
        prefix + "bialgebra.comult_multiplicative",
        dm.mul(m),
        _kron(m, m).mul(permute_map_output(_kron(dm, dm), (d, d, d, d), (0, 2, 1, 3))),
        (sp, sp),
    )
    bialg_counit = _check(
        prefix + "bialgebra.counit_multiplicative", e.mul(m), _kron(e, e), (sp, sp)
    )
    unit_gl = _check(prefix + "bialgebra.comult_unit", dm.mul(u), _kron(u, u), ())
    counit_unit = _check(prefix + "bialgebra.counit_unit", e.mul(u), Matrix.identity(1), ())
    conv_unit = u.mul(e)
    antipode_l = _check(
        prefix + "hopf.antipode.left", m.mul(_kron(s, i)).mul(dm), conv_unit, (sp,)
    )
    antipode_r = _check(
        prefix + "hopf.antipode.right", m.mul(_kron(i, s)).mul(dm), conv_unit, (sp,)
    )
    invertible = ValidationCheck(prefix + "hopf.antipode_invertible", rank(s) == d, None)
    checks += [bialg_mult, bialg_counit, unit_gl, counit_unit, antipode_l, antipode_r, invertible]
    return checks


def _action_checks(a: ActionSpec, prefix: str = "") -> list[ValidationCheck]:
    h = a.hopf
    dh, dv = h.dim, a.carrier.dim
    act = a.act.matrix
    m = h.algebra.mult.matrix
    ih, iv = _id(dh), _id(dv)
    compat = _check(
        prefix + "module.compat",
        act.mul(_kron(m, iv)),
        act.mul(_kron(ih, act)),
        (h.space, h.space, a.carrier),
    )
    u = _col(h.algebra.unit)
    unital = _check(prefix + "module.unit", act.mul(_kron(u, iv)), iv, (a.carrier,))
    return [compat, unital]


def _coaction_checks(c: CoactionSpec, prefix: str = "") -> list[ValidationCheck]:
    h = c.hopf
    dh, dv = h.dim, c.carrier.dim
    rho = c.coact.matrix
    dm = h.coalgebra.comult.matrix
    e = _row(h.coalgebra.counit)
    ih, iv = _id(dh), _id(dv)
    if c.side == "left":
        coassoc = _check(
            prefix + "comodule.coassociativity",
            _kron(dm, iv).mul(rho),
            _kron(ih, rho).mul(rho),
            (c.carrier,),
        )
        counit = _check(prefix + "comodule.counit", _kron(e, iv).mul(rho), iv, (c.carrier,))
    else:
        coassoc = _check(
            prefix + "comodule.coassociativity",
            _kron(iv, dm).mul(rho),
            _kron(rho, ih).mul(rho),
            (c.carrier,),
        )
        counit = _check(prefix + "comodule.counit", _kron(iv, e).mul(rho), iv, (c.carrier,))
    return [coassoc, counit]


def _sayd_checks(s: SAYDSpec, prefix: str = "") -> list[ValidationCheck]:
    h = s.hopf
    dh, dm_ = h.dim, s.carrier.dim
    checks = _action_checks(s.action, prefix) + _coaction_checks(s.coaction, prefix)
    act = s.action.act.matrix
    rho = s.coaction.coact.matrix
    sm = h.antipode.matrix
    if rank(sm) != dh:
        checks.append(ValidationCheck(prefix + "sayd.antipode_invertible", False, None))
        return checks
    checks.append(ValidationCheck(prefix + "sayd.antipode_invertible", True, None))
    s_inv = antipode_inverse(h).matrix
    dmm = h.coalgebra.comult.matrix
    ih, im = _id(dh), _id(dm_)
    delta2 = _kron(dmm, ih).mul(dmm)  # H -> H⊗H⊗H
    lhs = rho.mul(act)
    t1 = _kron(delta2, rho)  # H⊗M -> (h1 h2 h3) ⊗ (m-1 m0)
    twist = _kron(ih, ih, s_inv, ih, im)
    m = h.algebra.mult.matrix
    mult3 = m.mul(_kron(m, _id(dh)))  # H⊗H⊗H -> H
    permuted = permute_map_output(twist.mul(t1), (dh, dh, dh, dh, dm_), (0, 3, 2, 1, 4))
    rhs = _kron(mult3, act).mul(permuted)
    checks.append(_check(prefix + "sayd.ayd", lhs, rhs, (h.space, s.carrier)))
    checks.append(_check(prefix + "sayd.stability", act.mul(rho), im, (s.carrier,)))
    return checks


def _bundle_checks(b: SymmetryBundle) -> list[ValidationCheck]:
    checks = _hopf_checks(b.hopf, "hopf.")
    h = b.hopf
    dh = h.dim
    if b.kind in ("A", "B"):
        alg: AlgebraSpec = b.carrier  # type: ignore[assignment]
        checks += _algebra_checks(alg, "carrier.")
        da = alg.space.dim
        m = alg.mult.matrix
        ia = _id(da)
        if b.kind == "A":
            act = b.structure.act.matrix  # type: ignore[union-attr]
            checks += _action_checks(b.structure, "carrier.")  # type: ignore[arg-type]
            dmm = h.coalgebra.comult.matrix
            lhs = act.mul(_kron(_id(dh), m))
            rhs = m.mul(_kron(act, act)).mul(
                permute_map_output(_kron(dmm, ia, ia), (dh, dh, da, da), (0, 2, 1, 3)))
            checks.append(_check("module_algebra.mult", lhs, rhs, (h.space, alg.space, alg.space)))
            u = _col(alg.unit)
            e = _row(h.coalgebra.counit)
            checks.append(
                _check("module_algebra.unit", act.mul(_kron(_id(dh), u)), u.mul(e), (h.space,))
            )
        else:
            rho = b.structure.coact.matrix  # type: ignore[union-attr]
            checks += _coaction_checks(b.structure, "carrier.")  # type: ignore[arg-type]
            mh = h.algebra.mult.matrix
            lhs = rho.mul(m)
            rhs = _kron(mh, m).mul(
                permute_map_output(_kron(rho, rho), (dh, da, dh, da), (0, 2, 1, 3)))
            checks.append(
                _check("comodule_algebra.mult", lhs, rhs, (alg.space, alg.space))
            )
            uh = _col(h.algebra.unit)
            ua = _col(alg.unit)
            checks.append(
                _check("comodule_algebra.unit", rho.mul(ua), uh.kron(ua), ())
            )
    else:
        coa: CoalgebraSpec = b.carrier  # type: ignore[assignment]
        checks += _coalgebra_checks(coa, "carrier.")
        dc = coa.space.dim
        act = b.structure.act.matrix  # type: ignore[union-attr]
        checks += _action_checks(b.structure, "carrier.")  # type: ignore[arg-type]
        dmc = coa.comult.matrix
        dmh = h.coalgebra.comult.matrix
        ic = _id(dc)
        lhs = dmc.mul(act)
        rhs = _kron(act, act).mul(
            permute_map_output(_kron(dmh, dmc), (dh, dh, dc, dc), (0, 2, 1, 3)))
        checks.append(_check("module_coalgebra.comult", lhs, rhs, (h.space, coa.space)))
        ec = _row(coa.counit)
        eh = _row(h.coalgebra.counit)
        checks.append(
            _check("module_coalgebra.counit", ec.mul(act), _kron(eh, ec), (h.space, coa.space))
        )
    checks += _sayd_checks(b.coeffs, "coeffs.")
    return checks


def validate(spec) -> ValidationReport:
    """Exhaustively check every axiom family of the given structure."""
    if isinstance(spec, AlgebraSpec):
        return ValidationReport("AlgebraSpec", tuple(_algebra_checks(spec)))
    if isinstance(spec, CoalgebraSpec):
        return ValidationReport("CoalgebraSpec", tuple(_coalgebra_checks(spec)))
    if isinstance(spec, HopfAlgebraSpec):
        return ValidationReport("HopfAlgebraSpec", tuple(_hopf_checks(spec)))
    if isinstance(spec, ActionSpec):
        return ValidationReport("ActionSpec", tuple(_action_checks(spec)))
    if isinstance(spec, CoactionSpec):
        return ValidationReport("CoactionSpec", tuple(_coaction_checks(spec)))
    if isinstance(spec, SAYDSpec):
        return ValidationReport("SAYDSpec", tuple(_sayd_checks(spec)))
    if isinstance(spec, ModularPair):
        return ValidationReport("ModularPair", tuple(_sayd_checks(spec.to_sayd())))
    if isinstance(spec, SymmetryBundle):
        return ValidationReport("SymmetryBundle", tuple(_bundle_checks(spec)))
    raise SpecFormatError(f"cannot validate object of type {type(spec).__name__}")


def iterated_comult_matrix(h: HopfAlgebraSpec, n: int) -> Matrix:
    """Matrix of the n-fold coproduct H -> H^(n+1); n = 0 is the identity."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    d = h.dim
    out = _id(d)
    dm = h.coalgebra.comult.matrix
    cur_legs = 1
    for _ in range(n):
        out = _kron(dm, _id(d ** (cur_legs - 1))).mul(out) if cur_legs > 1 else dm.mul(out)
        cur_legs += 1
    return out


def iterated_coproduct(h: HopfAlgebraSpec, element: Sequence[Fraction], n: int) -> TensorElement:
    """Iterated coproduct of an element of H as a tensor in H^(n+1)."""
    mat = iterated_comult_matrix(h, n)
    coords = mat.apply(tuple(Fraction(x) for x in element))
    return TensorElement((h.space,) * (n + 1), coords)


def antipode_inverse(h: HopfAlgebraSpec) -> LinMap:
    """Linear inverse of the antipode; raises if S is singular."""
    s = h.antipode.matrix
    d = h.dim
    cols = []
    for j in range(d):
        e = [ZERO] * d
        e[j] = ONE
        x = solve_linear(s, e)
        if x is None:
            raise NonInvertibleAntipodeError("antipode matrix is singular")
        cols.append(x)
    rows = [[cols[j][i] for j in range(d)] for i in range(d)]
    inv = Matrix.from_rows(rows, cols=d)
    if not inv.mul(s).sub(_id(d)).is_zero() or not s.mul(inv).sub(_id(d)).is_zero():
        raise NonInvertibleAntipodeError("antipode matrix is singular")
    return LinMap(h.space, h.space, inv)


def convolution_product(c: CoalgebraSpec, f: Sequence[Fraction], g: Sequence[Fraction]) -> Vector:
    """Convolution f*g of two functionals on a coalgebra."""
    dm = c.comult.matrix
    d = c.space.dim
    out = []
    for k in range(d):
        col = [dm[r, k] for r in range(d * d)]
        s = ZERO
        for r, val in enumerate(col):
            if val != 0:
                i, j = divmod(r, d)
                s += val * Fraction(f[i]) * Fraction(g[j])
        out.append(s)
    return tuple(out)


def convolution_inverse(c: CoalgebraSpec, chi: Sequence[Fraction]) -> Vector:
    """Two-sided convolution inverse of a functional, or a raised error."""
    d = c.space.dim
    dm = c.comult.matrix
    chi_row = _row(tuple(Fraction(x) for x in chi))
    left = _kron(chi_row, _id(d)).mul(dm)   # c -> chi(c^(1)) c^(2)
    right = _kron(_id(d), chi_row).mul(dm)  # c -> chi(c^(2)) c^(1)
    system = left.transpose().vstack(right.transpose())
    target = tuple(c.counit) + tuple(c.counit)
    psi = solve_linear(system, target)
    if psi is None:
        raise ConvolutionNotInvertibleError("functional has no convolution inverse")
    return psi
