"""Curated example data: group algebras, the sign-action algebra, Sweedler's
4-dimensional Hopf algebra, SAYD coefficient modules, symmetry bundles, and a
negative-control suite of single-entry mutants.

Every non-mutant fixture passes ``validate``; every mutant fails with the
recorded axiom.  Mutants differ from their base fixture in exactly one
structure-constant entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Callable, Optional, Union

from .exactla import Matrix, ONE, ZERO
from .multilin import LinMap, Space, tensor_space
from .structures import (
    ActionSpec,
    AlgebraSpec,
    CoactionSpec,
    CoalgebraSpec,
    HopfAlgebraSpec,
    ModularPair,
    SAYDSpec,
    SymmetryBundle,
)

Q = Fraction


class UnknownFixtureError(KeyError):
    def __init__(self, name: str, available: tuple[str, ...]):
        super().__init__(name)
        self.name = name
        self.available = available

    def __str__(self):
        return f"unknown fixture {self.name!r}; available: {', '.join(self.available)}"


@dataclass(frozen=True)
class FixtureBundle:
    name: str
    payload: object
    expected: dict


def _algebra(name: str, labels: tuple[str, ...], table: dict, unit_label: str) -> AlgebraSpec:
    sp = Space.make(name, labels)
    src = tensor_space(sp, sp)
    entries = {}
    for (a, b), out in table.items():
        for out_label, val in out.items():
            entries[(out_label, a + "⊗" + b)] = val
    mult = LinMap.from_entries(src, sp, entries)
    unit = [ZERO] * sp.dim
    unit[sp.index_of(unit_label)] = ONE
    return AlgebraSpec(sp, mult, tuple(unit))


def _group_hopf(name: str, elements: tuple[str, ...], compose: Callable[[str, str], str],
                inverse: Callable[[str], str]) -> HopfAlgebraSpec:
    table = {(a, b): {compose(a, b): ONE} for a in elements for b in elements}
    alg = _algebra(name, elements, table, elements[0])
    sp = alg.space
    tgt = tensor_space(sp, sp)
    comult = LinMap.from_entries(sp, tgt, {(g + "⊗" + g, g): ONE for g in elements})
    counit = tuple(ONE for _ in elements)
    coalg = CoalgebraSpec(sp, comult, counit)
    antipode = LinMap.from_entries(sp, sp, {(inverse(g), g): ONE for g in elements})
    return HopfAlgebraSpec(alg, coalg, antipode)


def kZ2() -> HopfAlgebraSpec:
    els = ("1", "g")

    def mul(a, b):
        return "1" if a == b else "g"

    return _group_hopf("kZ2", els, mul, lambda g: g)


def kZ3() -> HopfAlgebraSpec:
    els = ("1", "g", "g2")
    val = {"1": 0, "g": 1, "g2": 2}
    names = {0: "1", 1: "g", 2: "g2"}

    def mul(a, b):
        return names[(val[a] + val[b]) % 3]

    return _group_hopf("kZ3", els, mul, lambda g: names[(-val[g]) % 3])


def kS3() -> HopfAlgebraSpec:
    perms = tuple(permutations((0, 1, 2)))
    labels = tuple("s" + "".join(str(x) for x in p) for p in perms)
    by_perm = dict(zip(perms, labels))

    def compose(a, b):
        pa = perms[labels.index(a)]
        pb = perms[labels.index(b)]
        pc = tuple(pa[pb[i]] for i in range(3))
        return by_perm[pc]

    def inverse(a):
        pa = perms[labels.index(a)]
        inv = [0, 0, 0]
        for i, x in enumerate(pa):
            inv[x] = i
        return by_perm[tuple(inv)]

    return _group_hopf("kS3", labels, compose, inverse)


def sweedler4() -> HopfAlgebraSpec:
    labels = ("1", "g", "x", "gx")
    table = {
        ("1", "1"): {"1": ONE}, ("1", "g"): {"g": ONE}, ("1", "x"): {"x": ONE}, ("1", "gx"): {"gx": ONE},
        ("g", "1"): {"g": ONE}, ("g", "g"): {"1": ONE}, ("g", "x"): {"gx": ONE}, ("g", "gx"): {"x": ONE},
        ("x", "1"): {"x": ONE}, ("x", "g"): {"gx": -ONE}, ("x", "x"): {}, ("x", "gx"): {},
        ("gx", "1"): {"gx": ONE}, ("gx", "g"): {"x": -ONE}, ("gx", "x"): {}, ("gx", "gx"): {},
    }
    alg = _algebra("H4", labels, table, "1")
    sp = alg.space
    tgt = tensor_space(sp, sp)
    comult = LinMap.from_entries(sp, tgt, {
        ("1⊗1", "1"): ONE,
        ("g⊗g", "g"): ONE,
        ("x⊗1", "x"): ONE, ("g⊗x", "x"): ONE,
        ("gx⊗g", "gx"): ONE, ("1⊗gx", "gx"): ONE,
    })
    counit = (ONE, ONE, ZERO, ZERO)
    coalg = CoalgebraSpec(sp, comult, counit)
    antipode = LinMap.from_entries(sp, sp, {
        ("1", "1"): ONE, ("g", "g"): ONE, ("gx", "x"): -ONE, ("x", "gx"): ONE,
    })
    return HopfAlgebraSpec(alg, coalg, antipode)


def sign_algebra() -> AlgebraSpec:
    table = {
        ("1", "1"): {"1": ONE}, ("1", "x"): {"x": ONE},
        ("x", "1"): {"x": ONE}, ("x", "x"): {"1": ONE},
    }
    return _algebra("A", ("1", "x"), table, "1")


def sign_action(h: HopfAlgebraSpec, a: AlgebraSpec) -> ActionSpec:
    src = tensor_space(h.space, a.space)
    act = LinMap.from_entries(src, a.space, {
        ("1", "1⊗1"): ONE, ("x", "1⊗x"): ONE,
        ("1", "g⊗1"): ONE, ("x", "g⊗x"): -ONE,
    })
    return ActionSpec(h, a.space, act)


def trivial_hopf() -> HopfAlgebraSpec:
    return _group_hopf("k", ("1",), lambda a, b: "1", lambda g: "1")


def _one_dim_sayd(h: HopfAlgebraSpec, delta: dict, sigma_label: str) -> SAYDSpec:
    dvec = [ZERO] * h.dim
    for lbl, v in delta.items():
        dvec[h.space.index_of(lbl)] = Fraction(v)
    svec = [ZERO] * h.dim
    svec[h.space.index_of(sigma_label)] = ONE
    return ModularPair(h, tuple(dvec), tuple(svec)).to_sayd()


def m_trivial(h: HopfAlgebraSpec) -> SAYDSpec:
    return _one_dim_sayd(h, {lbl: h.coalgebra.counit[i] for i, lbl in enumerate(h.space.basis_labels)},
                         h.space.basis_labels[0])


def m_sigma_kZ2(h: HopfAlgebraSpec) -> SAYDSpec:
    """^g k_eps over kZ2: counit action, coaction m -> g⊗m."""
    return _one_dim_sayd(h, {"1": ONE, "g": ONE}, "g")


def m_bad_ayd_kZ2(h: HopfAlgebraSpec) -> SAYDSpec:
    """Sign-character action with coaction m -> g⊗m: stability fails (gm = -m)."""
    return _one_dim_sayd(h, {"1": ONE, "g": -ONE}, "g")


def bundle_kind_A(h: HopfAlgebraSpec, alg: AlgebraSpec, act: ActionSpec, m: SAYDSpec) -> SymmetryBundle:
    return SymmetryBundle("A", h, alg, act, m)


def bundle_B_equals_H(h: HopfAlgebraSpec, m: SAYDSpec) -> SymmetryBundle:
    """The comodule algebra B = H with coaction the comultiplication."""
    alg = AlgebraSpec(h.space, h.algebra.mult, h.algebra.unit)
    coact = CoactionSpec(h, h.space, LinMap(h.space, tensor_space(h.space, h.space),
                                            h.coalgebra.comult.matrix))
    return SymmetryBundle("B", h, alg, coact, m)


def bundle_C_equals_H(h: HopfAlgebraSpec, m: SAYDSpec) -> SymmetryBundle:
    """The module coalgebra C = H with action the multiplication."""
    coalg = CoalgebraSpec(h.space, h.coalgebra.comult, h.coalgebra.counit)
    act = ActionSpec(h, h.space, LinMap(tensor_space(h.space, h.space), h.space,
                                        h.algebra.mult.matrix))
    return SymmetryBundle("C", h, coalg, act, m)


_ORDINARY_CACHE: dict = {}


def ordinary_bundle(alg: AlgebraSpec) -> SymmetryBundle:
    """An algebra as a kind-A bundle over the trivial Hopf algebra (H = k, M = k)."""
    cached = _ORDINARY_CACHE.get(id(alg))
    if cached is not None:
        return cached
    h = trivial_hopf()
    src = tensor_space(h.space, alg.space)
    act = ActionSpec(h, alg.space, LinMap(src, alg.space, Matrix.identity(alg.space.dim)))
    bundle = SymmetryBundle("A", h, alg, act, m_trivial(h))
    _ORDINARY_CACHE[id(alg)] = bundle
    return bundle


def matrix_algebra(n: int, base: AlgebraSpec) -> AlgebraSpec:
    """n x n matrices over a based algebra, basis b·E_ij."""
    labels = tuple(
        f"{lbl}·E{i+1}{j+1}" for lbl in base.space.basis_labels
        for i in range(n) for j in range(n)
    )
    sp = Space.make(f"M{n}({base.space.name})", labels)
    entries = {}
    mm = base.mult.matrix
    d = base.space.dim
    for ai, albl in enumerate(base.space.basis_labels):
        for bi, blbl in enumerate(base.space.basis_labels):
            prod = [mm[k, ai * d + bi] for k in range(d)]
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        for l in range(n):
                            if j != k:
                                continue
                            src_lbl = f"{albl}·E{i+1}{j+1}" + "⊗" + f"{blbl}·E{k+1}{l+1}"
                            for ci, cval in enumerate(prod):
                                if cval != 0:
                                    tgt = f"{base.space.basis_labels[ci]}·E{i+1}{l+1}"
                                    entries[(tgt, src_lbl)] = entries.get((tgt, src_lbl), ZERO) + cval
    mult = LinMap.from_entries(tensor_space(sp, sp), sp, entries)
    unit = [ZERO] * sp.dim
    for i in range(n):
        for ci, cval in enumerate(base.unit):
            if cval != 0:
                unit[sp.index_of(f"{base.space.basis_labels[ci]}·E{i+1}{i+1}")] = cval
    return AlgebraSpec(sp, mult, tuple(unit))


def matrix_bundle_B(bundle: SymmetryBundle, n: int) -> SymmetryBundle:
    """M_n(B) as a kind-B bundle with the entrywise coaction."""
    assert bundle.kind == "B"
    base: AlgebraSpec = bundle.carrier  # type: ignore[assignment]
    h = bundle.hopf
    malg = matrix_algebra(n, base)
    rho = bundle.structure.coact.matrix  # type: ignore[union-attr]
    d = base.space.dim
    dh = h.dim
    entries = {}
    for bi, blbl in enumerate(base.space.basis_labels):
        col = [rho[r, bi] for r in range(dh * d)]
        for r, val in enumerate(col):
            if val != 0:
                hi, b0 = divmod(r, d)
                for i in range(n):
                    for j in range(n):
                        src = f"{blbl}·E{i+1}{j+1}"
                        tgt = h.space.basis_labels[hi] + "⊗" + f"{base.space.basis_labels[b0]}·E{i+1}{j+1}"
                        entries[(tgt, src)] = val
    coact = LinMap.from_entries(malg.space, tensor_space(h.space, malg.space), entries)
    return SymmetryBundle("B", h, malg, CoactionSpec(h, malg.space, coact), bundle.coeffs)


def _with_mult_entry(alg: AlgebraSpec, a: str, b: str, out: dict) -> AlgebraSpec:
    """Copy an algebra, replacing the product of one basis pair."""
    sp = alg.space
    rows = alg.mult.matrix.row_list()
    col = sp.index_of(a) * sp.dim + sp.index_of(b)
    for i in range(sp.dim):
        rows[i][col] = ZERO
    for lbl, v in out.items():
        rows[sp.index_of(lbl)][col] = Fraction(v)
    mult = LinMap(alg.mult.source, sp, Matrix.from_rows(rows, cols=sp.dim * sp.dim))
    return AlgebraSpec(sp, mult, alg.unit)


def _with_comult_entry(coalg: CoalgebraSpec, c: str, out: dict) -> CoalgebraSpec:
    sp = coalg.space
    rows = coalg.comult.matrix.row_list()
    col = sp.index_of(c)
    for i in range(sp.dim * sp.dim):
        rows[i][col] = ZERO
    for (l1, l2), v in out.items():
        rows[sp.index_of(l1) * sp.dim + sp.index_of(l2)][col] = Fraction(v)
    comult = LinMap(sp, coalg.comult.target, Matrix.from_rows(rows, cols=sp.dim))
    return CoalgebraSpec(sp, comult, coalg.counit)


def _with_counit_value(coalg: CoalgebraSpec, c: str, v) -> CoalgebraSpec:
    counit = list(coalg.counit)
    counit[coalg.space.index_of(c)] = Fraction(v)
    return CoalgebraSpec(coalg.space, coalg.comult, tuple(counit))


def _with_antipode_entry(h: HopfAlgebraSpec, c: str, out: dict) -> HopfAlgebraSpec:
    sp = h.space
    rows = h.antipode.matrix.row_list()
    col = sp.index_of(c)
    for i in range(sp.dim):
        rows[i][col] = ZERO
    for lbl, v in out.items():
        rows[sp.index_of(lbl)][col] = Fraction(v)
    return HopfAlgebraSpec(h.algebra, h.coalgebra, LinMap(sp, sp, Matrix.from_rows(rows, cols=sp.dim)))


def _with_action_entry(act: ActionSpec, hlbl: str, vlbl: str, out: dict) -> ActionSpec:
    h, sp = act.hopf, act.carrier
    rows = act.act.matrix.row_list()
    col = h.space.index_of(hlbl) * sp.dim + sp.index_of(vlbl)
    for i in range(sp.dim):
        rows[i][col] = ZERO
    for lbl, v in out.items():
        rows[sp.index_of(lbl)][col] = Fraction(v)
    return ActionSpec(h, sp, LinMap(act.act.source, sp, Matrix.from_rows(rows, cols=h.dim * sp.dim)))


def _replace_hopf(h: HopfAlgebraSpec, algebra=None, coalgebra=None, antipode=None) -> HopfAlgebraSpec:
    return HopfAlgebraSpec(algebra or h.algebra, coalgebra or h.coalgebra, antipode or h.antipode)


def _fixture_builders() -> dict[str, Callable[[], FixtureBundle]]:
    b: dict[str, Callable[[], FixtureBundle]] = {}

    def add(name: str, fn: Callable[[], tuple[object, dict]]):
        def build() -> FixtureBundle:
            payload, expected = fn()
            return FixtureBundle(name, payload, expected)

        b[name] = build

    # --- valid structures -------------------------------------------------
    add("kZ2", lambda: (kZ2(), {"valid": True}))
    add("kZ3", lambda: (kZ3(), {"valid": True}))
    add("kS3", lambda: (kS3(), {"valid": True}))
    add("sweedler4", lambda: (sweedler4(), {"valid": True}))
    add("Mtriv", lambda: (m_trivial(kZ2()), {"valid": True}))
    add("Msigma", lambda: (m_sigma_kZ2(kZ2()), {"valid": True}))

    def _signA():
        h = kZ2()
        a = sign_algebra()
        return bundle_kind_A(h, a, sign_action(h, a), m_trivial(h)), {"valid": True, "hc_dims": (1, 0, 1)}

    add("signA", _signA)

    def _signA_msigma():
        h = kZ2()
        a = sign_algebra()
        return bundle_kind_A(h, a, sign_action(h, a), m_sigma_kZ2(h)), {"valid": True}

    add("signA-Msigma", _signA_msigma)

    add("B=H-kZ2", lambda: (bundle_B_equals_H(kZ2(), m_trivial(kZ2())), {"valid": True}))
    add("B=H-kZ3", lambda: (bundle_B_equals_H(kZ3(), m_trivial(kZ3())), {"valid": True}))
    add("C=H-kZ2", lambda: (bundle_C_equals_H(kZ2(), m_trivial(kZ2())), {"valid": True, "hc_dims": (1, 0, 1)}))
    add("C=H-kZ3", lambda: (bundle_C_equals_H(kZ3(), m_trivial(kZ3())), {"valid": True, "hc_dims": (1, 0, 1)}))
    add("C=H-kZ2-Msigma", lambda: (bundle_C_equals_H(kZ2(), m_sigma_kZ2(kZ2())), {"valid": True}))

    # --- mutants: one structure-constant entry each -----------------------
    def mutant(name: str, axiom: str, fn: Callable[[], object]):
        add(name, lambda: (fn(), {"valid": False, "axiom": axiom}))

    mutant("kZ2-badcoassoc", "coalgebra.counit.left",
           lambda: _replace_hopf(kZ2(), coalgebra=_with_comult_entry(kZ2().coalgebra, "g", {("g", "1"): 1})))
    mutant("kZ2-badcounit", "coalgebra.counit.left",
           lambda: _replace_hopf(kZ2(), coalgebra=_with_counit_value(kZ2().coalgebra, "g", 0)))
    mutant("kZ2-badcounit-unit", "coalgebra.counit.left",
           lambda: _replace_hopf(kZ2(), coalgebra=_with_counit_value(kZ2().coalgebra, "1", 0)))
    mutant("kZ2-badantipode", "hopf.antipode.left",
           lambda: _replace_hopf(kZ2(), antipode=LinMap.from_entries(
               kZ2().space, kZ2().space, {("1", "1"): 1, ("1", "g"): 1})))
    mutant("kZ2-badunit", "algebra.unit.left",
           lambda: _replace_hopf(kZ2(), algebra=_with_mult_entry(kZ2().algebra, "1", "g", {"1": 1})))
    mutant("kZ3-badassoc", "algebra.associativity",
           lambda: _replace_hopf(kZ3(), algebra=_with_mult_entry(kZ3().algebra, "g", "g", {"1": 1})))
    mutant("kZ3-badantipode", "hopf.antipode.left",
           lambda: _replace_hopf(kZ3(), antipode=LinMap.from_entries(
               kZ3().space, kZ3().space, {("1", "1"): 1, ("g", "g"): 1, ("g", "g2"): 1})))
    mutant("kZ3-badcounit", "coalgebra.counit.left",
           lambda: _replace_hopf(kZ3(), coalgebra=_with_counit_value(kZ3().coalgebra, "g", 2)))
    mutant("kZ3-badcomult", "coalgebra.coassociativity",
           lambda: _replace_hopf(kZ3(), coalgebra=_with_comult_entry(kZ3().coalgebra, "g", {("1", "g2"): 1})))
    mutant("kS3-badassoc", "algebra.associativity",
           lambda: _replace_hopf(kS3(), algebra=_with_mult_entry(kS3().algebra, "s102", "s021", {"s012": 1})))
    mutant("kS3-badantipode", "hopf.antipode.left",
           lambda: _with_antipode_entry(kS3(), "s102", {"s021": 1}))
    mutant("sweedler4-badcomult", "coalgebra.counit.left",
           lambda: _replace_hopf(sweedler4(), coalgebra=_with_comult_entry(
               sweedler4().coalgebra, "x", {("x", "1"): 1})))
    mutant("sweedler4-badantipode", "hopf.antipode.left",
           lambda: _with_antipode_entry(sweedler4(), "x", {"x": 1}))
    mutant("sweedler4-badcounit", "coalgebra.counit.left",
           lambda: _replace_hopf(sweedler4(), coalgebra=_with_counit_value(sweedler4().coalgebra, "g", 0)))
    mutant("sweedler4-badmult", "algebra.associativity",
           lambda: _replace_hopf(sweedler4(), algebra=_with_mult_entry(
               sweedler4().algebra, "x", "g", {"gx": 1})))

    def _bad_ayd():
        return m_bad_ayd_kZ2(kZ2()), {"valid": False, "axiom": "sayd.stability"}

    add("Mtriv-badAYD", _bad_ayd)

    mutant("Mtriv-badaction", "module.compat", lambda: (lambda h: SAYDSpec(
        _with_action_entry(m_trivial(h).action, "g", "m", {"m": 2}),
        m_trivial(h).coaction))(kZ2()))
    def _msigma_badcounit():
        h = kZ2()
        base = m_sigma_kZ2(h)
        coact = LinMap.from_entries(base.coaction.coact.source,
                                    base.coaction.coact.target, {("g⊗m", "m"): 2})
        return SAYDSpec(base.action, CoactionSpec(h, base.carrier, coact))

    mutant("Msigma-badcounit", "comodule.counit", _msigma_badcounit)

    def _signA_mut(name, axiom, alg_fn=None, act_fn=None):
        def fn():
            h = kZ2()
            a = sign_algebra()
            act = sign_action(h, a)
            if alg_fn is not None:
                a = alg_fn(a)
                act = ActionSpec(h, a.space, act.act)
            if act_fn is not None:
                act = act_fn(h, act)
            return bundle_kind_A(h, a, act, m_trivial(h))

        mutant(name, axiom, fn)

    _signA_mut("signA-badmodule", "carrier.module.compat",
               act_fn=lambda h, act: _with_action_entry(act, "g", "x", {"x": 2}))
    _signA_mut("signA-badunitaction", "module_algebra.unit",
               act_fn=lambda h, act: _with_action_entry(act, "g", "1", {"1": -1}))
    _signA_mut("signA-badmultcompat", "module_algebra.mult",
               alg_fn=lambda a: _with_mult_entry(a, "x", "x", {"x": 1}))

    def _bh_mut(name, axiom, mutate):
        def fn():
            h = kZ2()
            bundle = bundle_B_equals_H(h, m_trivial(h))
            return mutate(h, bundle)

        mutant(name, axiom, fn)

    _bh_mut("BH-badcounit-coaction", "carrier.comodule.counit",
            lambda h, b: SymmetryBundle("B", h, b.carrier, CoactionSpec(
                h, h.space, LinMap.from_entries(h.space, tensor_space(h.space, h.space),
                                                {("1⊗1", "1"): 1, ("g⊗1", "g"): 1})), b.coeffs))
    _bh_mut("BH-badmult", "comodule_algebra.mult",
            lambda h, b: SymmetryBundle("B", h, _with_mult_entry(b.carrier, "g", "g", {"g": 1}),
                                        b.structure, b.coeffs))

    def _ch_mut(name, axiom, mutate):
        def fn():
            h = kZ2()
            bundle = bundle_C_equals_H(h, m_trivial(h))
            return mutate(h, bundle)

        mutant(name, axiom, fn)

    _ch_mut("CH-badaction", "carrier.module.compat",
            lambda h, b: SymmetryBundle("C", h, b.carrier,
                                        _with_action_entry(b.structure, "g", "g", {"g": 1}),
                                        b.coeffs))
    _ch_mut("CH-badcounit-action", "module_coalgebra.counit",
            lambda h, b: SymmetryBundle("C", h, b.carrier,
                                        _with_action_entry(b.structure, "g", "g", {"1": 2}),
                                        b.coeffs))
    return b


_BUILDERS = None


def catalog() -> tuple[str, ...]:
    global _BUILDERS
    if _BUILDERS is None:
        _BUILDERS = _fixture_builders()
    return tuple(sorted(_BUILDERS))


def fixture(name: str) -> FixtureBundle:
    """Look up a fixture by name; unknown names list the catalog."""
    global _BUILDERS
    if _BUILDERS is None:
        _BUILDERS = _fixture_builders()
    if name not in _BUILDERS:
        raise UnknownFixtureError(name, catalog())
    return _BUILDERS[name]()


def mutant_names() -> tuple[str, ...]:
    return tuple(n for n in catalog() if fixture(n).expected.get("valid") is False)
