"""Courant presentations: bracket extension against the exterior-calculus
oracle, axiom certification with a negative control, Dirac structures with
the three classical constructors, morphisms, and the Bott connection."""

import random

import pytest

from algebroids.algebroid import (AnchoredBundle, DullAlgebroid,
                                  check_algebroid, tangent_algebroid)
from algebroids.bundles import Frame, Section, Subbundle, TrivialBundle
from algebroids.cartan import (cotangent, d_oneform, interior_vf_2form,
                               lie_bracket_vf, lie_derivative_1form, tangent)
from algebroids.courant import (CourantPresentation, bott_dorfman,
                                check_courant_axioms, check_courant_morphism,
                                check_dirac, degenerate_courant,
                                dirac_algebroid, dirac_from_2form,
                                dirac_from_foliation, dirac_from_poisson,
                                standard_courant)
from algebroids.scalars import Patch


def xy():
    return Patch(["x", "y"])


def analytic_bracket(C, c1, c2):
    """([X1, X2], L_{X1} theta2 - i_{X2} d theta1) computed with the
    exterior-calculus operators, as an independent oracle."""
    p = C.patch
    dim = p.dim
    TM, TsM = tangent(p), cotangent(p)
    X1, th1 = Section(TM, c1.components[:dim]), Section(TsM, c1.components[dim:])
    X2, th2 = Section(TM, c2.components[:dim]), Section(TsM, c2.components[dim:])
    first = lie_bracket_vf(X1, X2)
    second = lie_derivative_1form(X1, th2) \
        - interior_vf_2form(X2, d_oneform(th1))
    return Section(C.bundle, list(first.components) + list(second.components))


def aff1_action_algebroid(patch):
    A = TrivialBundle(patch, 2, "A")
    e1 = A.basis_section(0)
    table = [[A.zero_section(), e1], [-e1, A.zero_section()]]
    return DullAlgebroid(
        AnchoredBundle(A, [[patch.one, patch.coordinate(0)],
                           [patch.zero, patch.zero]]), table)


# ---------------------------------------------------------------------------
# the standard bracket


def test_standard_bracket_worked_examples():
    p = xy()
    C = standard_courant(p)
    B = C.bundle
    assert C.bracket(B.section([1, 0, 0, 0]), B.section([0, 1, 0, 0])).is_zero()
    assert C.bracket(B.section([0, "x", 0, 0]), B.section([1, 0, 0, 1])) \
        == B.section([0, -1, 1, 0])
    assert C.pairing(B.section([1, 0, 0, 0]), B.section([0, 0, 1, 0])) == 1


def test_standard_bracket_matches_calculus_oracle():
    p = xy()
    C = standard_courant(p)
    rng = random.Random(21)
    for _ in range(6):
        c1 = C.random_element(rng, 2)
        c2 = C.random_element(rng, 2)
        assert (C.bracket(c1, c2) - analytic_bracket(C, c1, c2)).is_zero()


def test_degenerate_bracket_on_tangent_coincides_with_standard():
    p = xy()
    C = standard_courant(p)
    Cd = degenerate_courant(tangent_algebroid(p))
    rng = random.Random(22)
    for _ in range(5):
        c1 = C.random_element(rng, 2)
        c2 = C.random_element(rng, 2)
        lhs = Cd.bracket(Section(Cd.bundle, c1.components),
                         Section(Cd.bundle, c2.components))
        assert list(lhs.components) == list(C.bracket(c1, c2).components)


def test_degenerate_bracket_blocks():
    p = xy()
    aff = aff1_action_algebroid(p)
    Cd = degenerate_courant(aff)
    B = Cd.bundle
    # [(a,0),(b,0)] = ([a,b],0)
    a = B.section([1, 0, 0, 0])
    b = B.section([0, "x", 0, 0])
    val = Cd.bracket(a, b)
    inner = Section(aff.bundle, val.components[:2])
    from algebroids.algebroid import bracket_eval
    want = bracket_eval(aff, Section(aff.bundle, a.components[:2]),
                        Section(aff.bundle, b.components[:2]))
    assert (inner - want).is_zero()
    assert all(c.is_zero() for c in val.components[2:])


def test_degenerate_bracket_with_zero_anchor_kills_forms():
    p = xy()
    A = TrivialBundle(p, 2, "A")
    zero = [[p.zero, p.zero], [p.zero, p.zero]]
    e1 = A.basis_section(0)
    table = [[A.zero_section(), e1], [-e1, A.zero_section()]]
    alg = DullAlgebroid(AnchoredBundle(A, zero), table)
    Cd = degenerate_courant(alg)
    c1 = Cd.bundle.section([1, 0, "x", 0])
    c2 = Cd.bundle.section([0, 1, 0, "y"])
    val = Cd.bracket(c1, c2)
    assert val == Cd.bundle.section([1, 0, 0, 0])  # ([e1,e2], 0)


# ---------------------------------------------------------------------------
# axiom certification


def test_standard_courant_axioms_pass():
    p = xy()
    C = standard_courant(p)
    results = check_courant_axioms(C)
    assert [r.name for r in results] == [
        "courant.jacobi", "courant.pairing_invariance", "courant.skew_defect",
        "courant.anchor_morphism", "courant.leibniz",
        "courant.differential_pairing"]
    assert all(r.passed for r in results)
    assert C.axioms_checked


def test_degenerate_courant_axioms_pass():
    p = xy()
    results = check_courant_axioms(degenerate_courant(aff1_action_algebroid(p)))
    assert all(r.passed for r in results)


class DroppedTerm(CourantPresentation):
    """Standard bracket with the i_{X2} d theta1 term removed."""

    def bracket(self, c1, c2):
        p = self.patch
        dim = p.dim
        TM, TsM = tangent(p), cotangent(p)
        X1 = Section(TM, c1.components[:dim])
        X2, th2 = Section(TM, c2.components[:dim]), \
            Section(TsM, c2.components[dim:])
        first = lie_bracket_vf(X1, X2)
        second = lie_derivative_1form(X1, th2)
        return Section(self.bundle,
                       list(first.components) + list(second.components))


def test_dropped_term_fails_skew_defect_only():
    # the defect (0, i_{X2} d theta1) pairs antisymmetrically, so pairing
    # invariance and Jacobi survive; the symmetric part of the bracket is
    # what breaks
    p = xy()
    C = standard_courant(p)
    bad = DroppedTerm(C.bundle, C.anchor, C.gram, C.table, C.dmat)
    results = {r.name: r for r in check_courant_axioms(bad)}
    assert results["courant.skew_defect"].status == "fail"
    assert results["courant.skew_defect"].witnesses
    for name in ("courant.jacobi", "courant.pairing_invariance",
                 "courant.anchor_morphism", "courant.leibniz"):
        assert results[name].passed


def test_nondegenerate_constructor_rejects_singular_gram():
    p = xy()
    C = standard_courant(p)
    gram = [[p.zero] * 4 for _ in range(4)]
    with pytest.raises(ValueError):
        CourantPresentation(C.bundle, C.anchor, gram, C.table, C.dmat)
    CourantPresentation(C.bundle, C.anchor, gram, C.table, C.dmat,
                        degenerate=True)


def test_constructor_rejects_asymmetric_gram():
    p = xy()
    C = standard_courant(p)
    gram = [list(row) for row in C.gram]
    gram[0][1] = p.one
    with pytest.raises(ValueError):
        CourantPresentation(C.bundle, C.anchor, gram, C.table, C.dmat)


# ---------------------------------------------------------------------------
# Dirac structures


def test_poisson_graph_is_dirac():
    p = xy()
    C = standard_courant(p)
    D = dirac_from_poisson(p, [[0, "x"], ["-x", 0]])
    assert [list(map(str, s.components)) for s in D.frame] == [
        ["0", "x", "1", "0"], ["-x", "0", "0", "1"]]
    assert all(r.passed for r in check_dirac(C, D))
    assert all(r.passed for r in check_algebroid(dirac_algebroid(C, D)))


def test_2form_graph_is_dirac():
    p = xy()
    C = standard_courant(p)
    D = dirac_from_2form(p, [[0, 1], [-1, 0]])
    assert all(r.passed for r in check_dirac(C, D))
    assert all(r.passed for r in check_algebroid(dirac_algebroid(C, D)))


def test_foliation_sum_is_dirac():
    p = xy()
    C = standard_courant(p)
    TM = tangent(p)
    F = Subbundle(TM, Frame(TM, [TM.basis_section(0)]))
    D = dirac_from_foliation(F)
    assert [list(map(str, s.components)) for s in D.frame] == [
        ["1", "0", "0", "0"], ["0", "0", "0", "1"]]
    assert all(r.passed for r in check_dirac(C, D))
    assert all(r.passed for r in check_algebroid(dirac_algebroid(C, D)))


def test_nonclosed_2form_graph_fails_closure():
    p = Patch(["x", "y", "z"])
    C = standard_courant(p)
    D = dirac_from_2form(p, [[0, "z", 0], ["-z", 0, 0], [0, 0, 0]])
    results = {r.name: r for r in check_dirac(C, D)}
    assert results["dirac.half_rank"].passed
    assert results["dirac.isotropic"].passed
    assert results["dirac.self_perp"].passed
    assert results["dirac.closed"].status == "fail"
    assert results["dirac.closed"].witnesses


def test_dirac_constructor_degenerate_graphs():
    p = xy()
    z = [[0, 0], [0, 0]]
    assert [str(s) for s in dirac_from_poisson(p, z).frame] \
        == ["(0, 0, 1, 0)", "(0, 0, 0, 1)"]
    assert [str(s) for s in dirac_from_2form(p, z).frame] \
        == ["(1, 0, 0, 0)", "(0, 1, 0, 0)"]
    TM = tangent(p)
    full = Subbundle(TM, Frame(TM, [TM.basis_section(0), TM.basis_section(1)]))
    assert [str(s) for s in dirac_from_foliation(full).frame] \
        == ["(1, 0, 0, 0)", "(0, 1, 0, 0)"]


def test_dirac_constructors_reject_asymmetric_input():
    p = xy()
    with pytest.raises(ValueError):
        dirac_from_poisson(p, [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        dirac_from_2form(p, [[0, 1], [1, 1]])


def test_check_dirac_on_degenerate_carrier_skips_rank_logic():
    p = xy()
    Cd = degenerate_courant(aff1_action_algebroid(p))
    D = Subbundle(Cd.bundle, Frame(Cd.bundle, [Cd.bundle.basis_section(0)]))
    results = {r.name: r for r in check_dirac(Cd, D)}
    assert results["dirac.half_rank"].status == "skipped"
    assert results["dirac.self_perp"].status == "skipped"
    assert results["dirac.isotropic"].passed


def test_check_dirac_rejects_odd_rank():
    p = xy()
    bundle = TrivialBundle(p, 3, "E")
    gram = [[p.one if i == j else p.zero for j in range(3)] for i in range(3)]
    table = [[bundle.zero_section()] * 3 for _ in range(3)]
    anchor = [[p.zero] * 3 for _ in range(2)]
    dmat = [[p.zero] * 2 for _ in range(3)]
    C = CourantPresentation(bundle, anchor, gram, table, dmat)
    D = Subbundle(bundle, Frame(bundle, [bundle.basis_section(0)]))
    with pytest.raises(ValueError):
        check_dirac(C, D)


# ---------------------------------------------------------------------------
# morphisms


def test_identity_is_courant_morphism():
    p = xy()
    C = standard_courant(p)
    ident = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    assert all(r.passed for r in check_courant_morphism(ident, C, C))


def _sigma_morphism(patch, omega):
    """Phi(a, theta) = (a, sigma(a) + theta) for sigma = omega-flat, from
    the degenerate presentation over TM into the standard one."""
    dim = patch.dim
    Phi = [[patch.zero] * (2 * dim) for _ in range(2 * dim)]
    for i in range(dim):
        Phi[i][i] = patch.one
        Phi[dim + i][dim + i] = patch.one
        for j in range(dim):
            Phi[dim + i][j] = patch.scalar(omega[j][i])
    return Phi


def test_closed_2form_shift_is_morphism():
    p = xy()
    Cd = degenerate_courant(tangent_algebroid(p))
    C = standard_courant(p)
    Phi = _sigma_morphism(p, [[0, 1], [-1, 0]])
    assert all(r.passed for r in check_courant_morphism(Phi, Cd, C))


def test_nonclosed_2form_shift_fails_bracket_check():
    p = Patch(["x", "y", "z"])
    Cd = degenerate_courant(tangent_algebroid(p))
    C = standard_courant(p)
    Phi = _sigma_morphism(p, [[0, "z", 0], ["-z", 0, 0], [0, 0, 0]])
    results = {r.name: r for r in check_courant_morphism(Phi, Cd, C)}
    assert results["morphism.anchor"].passed
    assert results["morphism.pairing"].passed
    assert results["morphism.bracket"].status == "fail"


def test_morphism_shape_mismatch():
    p = xy()
    C = standard_courant(p)
    with pytest.raises(ValueError):
        check_courant_morphism([[1, 0], [0, 1]], C, C)


# ---------------------------------------------------------------------------
# Bott connection on C/D


def test_bott_on_tangent_dirac_is_form_lie_derivative():
    p = xy()
    C = standard_courant(p)
    TM = tangent(p)
    full = Subbundle(TM, Frame(TM, [TM.basis_section(0), TM.basis_section(1)]))
    D = dirac_from_foliation(full)          # TM + 0
    bott, checks = bott_dorfman(C, D)
    assert all(r.passed for r in checks)
    # constant frames bracket to zero, so the table vanishes
    assert all(s.is_zero() for row in bott.table for s in row)
    # Delta_{(X,0)} [(0, theta)] = [L_X theta]
    rng = random.Random(23)
    TsM = cotangent(p)
    from algebroids.bundles import random_section
    for _ in range(5):
        X = random_section(TM, rng, 2)
        theta = random_section(TsM, rng, 2)
        d = Section(C.bundle, list(X.components) + [p.zero, p.zero])
        c = Section(C.bundle, [p.zero, p.zero] + list(theta.components))
        got = bott.eval(d, c)
        want = lie_derivative_1form(X, theta)
        assert list(map(str, got.components)) == list(map(str, want.components))


def test_bott_well_defined_on_poisson_dirac():
    p = xy()
    C = standard_courant(p)
    D = dirac_from_poisson(p, [[0, "x"], ["-x", 0]])
    bott, checks = bott_dorfman(C, D)
    assert all(r.passed for r in checks)
    assert bott.quotient.rank == 2
