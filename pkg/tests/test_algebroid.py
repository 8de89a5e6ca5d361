from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gqk import EVEN, ODD, Chart, to_text
from gqk.algebroid import (
    AlgebroidData,
    BundleMap,
    axiom_check,
    base_chart,
    four_fold_verdicts,
    from_antialgebroid,
    from_linear_bracket,
    from_structure_constants,
    modular_check,
    modular_representative,
    morphism_check,
    sign_table,
    to_antialgebroid,
    to_poisson_dual,
    to_schouten_antidual,
    validate_algebroid,
)
from gqk.brackets import jacobi_check
from gqk.catalog import abelian, algebroid_suite, b2, morphism_suite, sl2, super_heisenberg, tangent
from gqk.errors import ParityViolation, WeightViolation
from gqk.geometry import VectorField


def test_tangent_line_antialgebroid():
    chart, Q = to_antialgebroid(tangent(1))
    assert chart.names == ["x", "xi_dx"]
    assert Q == VectorField(chart, {"x": chart.var("xi_dx")}, ODD)
    assert Q.weight == (1,)


def test_two_dim_algebra_antialgebroid():
    chart, Q = to_antialgebroid(b2())
    assert Q.to_text() == "(-xi_e1*xi_e2)*d/dxi_e2"
    assert to_antialgebroid(abelian(3))[1].is_zero()


def test_poisson_and_schouten_duals():
    chart, P = to_poisson_dual(tangent(1))
    assert P[("u_dx", "x")] == chart.one()
    assert P[("x", "u_dx")] == -chart.one()
    chart, P = to_poisson_dual(sl2())
    assert to_text(P[("u_h", "u_e")]) == "2*u_e"
    assert to_text(P[("u_h", "u_f")]) == "-2*u_f"
    assert to_text(P[("u_e", "u_f")]) == "u_h"
    chart, S = to_schouten_antidual(sl2())
    assert S.sigma == ODD and S.weight == (-1,)
    assert to_text(S[("eta_e", "eta_f")]) == "eta_h"
    assert all(v.is_zero() for v in to_poisson_dual(abelian(2))[1].table().values())


def test_from_antialgebroid_examples():
    for A in (tangent(1), b2(), abelian(2)):
        chart, Q = to_antialgebroid(A)
        back = from_antialgebroid(chart, Q, name=A.name)
        assert back == A
    chart, _ = to_antialgebroid(tangent(1))
    # anchor x d/dx
    scaled = VectorField(chart, {"x": chart.var("xi_dx") * chart.var("x")}, ODD)
    assert from_antialgebroid(chart, scaled).anchor[("dx", "x")] == base_chart(["x"]).var("x")
    two = to_antialgebroid(b2())[0]
    with pytest.raises(WeightViolation):
        from_antialgebroid(two, VectorField(two, {"xi_e1": two.one()}, ODD))


def test_validate_algebroid_witness():
    r = validate_algebroid(sl2(perturbed=True))
    assert [(v.location, v.residue_text) for v in r.violations] == [(("xi_e",), "-4*xi_h*xi_e*xi_f")]
    assert validate_algebroid(sl2()).passed


def test_invariant_errors():
    pt = base_chart([], "pt")
    with pytest.raises(ParityViolation):
        from_structure_constants("bad", (("e", EVEN), ("q", ODD)), {("e", "q"): {"e": 1}})
    with pytest.raises(ParityViolation):
        M = base_chart(["x"])
        AlgebroidData(M, (("q", ODD),), {("q", "x"): M.one()}, {}, "odd-anchor")
    with pytest.raises(ParityViolation):
        # [e, f] = e and [f, e] = e contradict antisymmetry
        AlgebroidData(pt, (("e", EVEN), ("f", EVEN)), {}, {("e", "f"): {"e": pt.one()}, ("f", "e"): {"e": pt.one()}})


def test_four_fold_agreement_on_suite():
    for A, valid in algebroid_suite():
        verdicts = four_fold_verdicts(A)
        assert set(verdicts.values()) == {valid}, (A.name, verdicts)


def test_round_trip_on_suite():
    for A, _ in algebroid_suite():
        chart, Q = to_antialgebroid(A)
        assert from_antialgebroid(chart, Q, name=A.name) == A
        for build, prefix in ((to_poisson_dual, "u_"), (to_schouten_antidual, "eta_")):
            _, B = build(A)
            assert from_linear_bracket(B, prefix, A.name) == A


def test_super_sign_rule():
    A = super_heisenberg()
    assert A.bracket_of("q", "q", "h") == A.base.one()
    assert A.structure_function("q", "q", "h") == -A.base.one()
    chart, Q = to_antialgebroid(A)
    assert [c.parity for c in chart.coords] == [ODD, EVEN]
    assert Q.to_text() == "(-1/2*xi_q^2)*d/dxi_h"


# independent oracle for Lie algebras over a point --------------------------

def _oracle_jacobiators(names, c):
    """``[a,[b,c]] - [[a,b],c] - [b,[a,c]]`` by structure constants."""

    def br(x, y):
        out = {}
        for i, xi in x.items():
            for j, yj in y.items():
                for k, v in c.get((i, j), {}).items():
                    out[k] = out.get(k, 0) + xi * yj * v
        return {k: v for k, v in out.items() if v}

    def sub(x, y):
        out = dict(x)
        for k, v in y.items():
            out[k] = out.get(k, 0) - v
        return {k: v for k, v in out.items() if v}

    unit = {n: {n: 1} for n in names}
    res = {}
    for a, b, d in combinations_with_replacement(names, 3):
        A, B, D = unit[a], unit[b], unit[d]
        j = sub(sub(br(A, br(B, D)), br(br(A, B), D)), br(B, br(A, D)))
        if j:
            res[(a, b, d)] = j
    return res


def _full_constants(consts):
    c = {}
    for (i, j), d in consts.items():
        c[(i, j)] = dict(d)
        if i != j:
            c[(j, i)] = {k: -v for k, v in d.items()}
    return c


structure_constants = st.dictionaries(
    st.sampled_from([("a", "b"), ("a", "c"), ("b", "c")]),
    st.dictionaries(st.sampled_from("abc"), st.integers(-2, 2).filter(bool), min_size=1, max_size=2),
    max_size=3,
)


@given(structure_constants)
def test_poisson_residues_match_oracle(consts):
    names = ["a", "b", "c"]
    A = from_structure_constants("rnd", tuple((n, EVEN) for n in names), consts)
    oracle = _oracle_jacobiators(names, _full_constants(consts))
    r = jacobi_check(to_poisson_dual(A)[1])
    chart = to_poisson_dual(A)[0]
    got = {tuple(n[2:] for n in v.location): v.residue for v in r.violations}
    want = {k: sum((Fraction(x) * chart.var("u_" + g) for g, x in j.items()), chart.zero()) for k, j in oracle.items()}
    assert got == want
    assert validate_algebroid(A).passed == (not oracle)
    assert axiom_check(A).passed == (not oracle)


def test_oracle_on_named_algebras():
    for A in (b2(), sl2(), sl2(perturbed=True), abelian(2)):
        names = A.frame_names
        consts = {k: {g: p.constant_term() for g, p in v.items()} for k, v in A.brackets.items()}
        oracle = _oracle_jacobiators(names, consts)
        assert jacobi_check(to_poisson_dual(A)[1]).passed == (not oracle)


# morphisms -------------------------------------------------------------------

def test_morphism_suite_classification():
    for label, Phi, A1, A2, expected in morphism_suite():
        assert morphism_check(Phi, A1, A2).passed == expected, label


def test_morphism_witness():
    cases = {c[0]: c for c in morphism_suite()}
    _, Phi, A1, A2, _ = cases["sl2-naive-swap"]
    r = morphism_check(Phi, A1, A2)
    assert [(v.location, v.residue_text) for v in r.violations][0] == (("xi_h",), "-2*xi_e*xi_f")


def test_morphism_parity_violation():
    pt = base_chart([], "pt")
    A = super_heisenberg()
    Phi = BundleMap({}, {("h", "q"): pt.one()})
    with pytest.raises(ParityViolation):
        morphism_check(Phi, A, A)


def test_morphisms_compose():
    positive = [(Phi, A1, A2) for _, Phi, A1, A2, ok in morphism_suite() if ok]
    composed = 0
    for Phi, A1, A2 in positive:
        for Psi, B1, B3 in positive:
            if B1 == A2:
                comp = Phi.then(Psi, A1, A2, B3)
                assert morphism_check(comp, A1, B3).passed
                composed += 1
    assert composed >= 8


# modular class -------------------------------------------------------------------

def test_modular_representatives():
    assert modular_representative(sl2()).is_zero()
    assert to_text(modular_representative(b2())) == "xi_e1"
    assert modular_representative(abelian(2)).is_zero()
    r = modular_check(b2())
    assert r.passed and r.details == {"representative": "xi_e1", "vanishes": False}


def test_sign_table_mentions_every_convention():
    table = sign_table()
    for needle in ("left", "Q_ij^k", "i(u)", "{p_c, c} = 1", "div X"):
        assert needle in table
