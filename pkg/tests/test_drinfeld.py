import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gqk import ODD, to_text
from gqk.brackets import bracket_eval, is_poisson_map, jacobi_check
from gqk.catalog import (
    algebroid_suite,
    b2,
    b2_bialgebra,
    bialgebroid_suite,
    sl2,
    sl2_standard,
    super_bialgebra,
    tangent,
)
from gqk.doubles import random_bundle
from gqk.drinfeld import (
    BialgebroidData,
    bialgebroid_check,
    bialgebroid_verdicts,
    double_algebroid_check,
    double_report,
    drinfeld_double,
    frame_bundle,
    lie_lift,
    pi2_cotangent_identification,
    pi_tangent_lift,
    qs_check,
    schouten_hamiltonian,
)
from gqk.errors import BaseMismatch, ParityViolation
from gqk.geometry import VectorField, is_homological
from gqk.superpoly import embed


def test_verdicts_agree_on_suite():
    for D, expected in bialgebroid_suite():
        verdicts = bialgebroid_verdicts(D)
        assert len(verdicts) == 6
        assert set(verdicts.values()) == {expected}, (D.name, verdicts)
        assert bialgebroid_check(D).passed == expected


def test_b2_double_hamiltonians():
    dd = drinfeld_double(b2_bialgebra())
    assert to_text(dd.H_E) == "-xi_e1*xi_e2*p_xi_e2"
    assert to_text(dd.H_Estar) == "-xi_e2*p_xi_e1*p_xi_e2"
    assert bracket_eval(dd.bracket, dd.H_E, dd.H_Estar).is_zero()
    assert is_homological(dd.Q)
    assert dd.Q.parity == ODD


def test_double_report_on_compatible_pairs():
    for D, expected in bialgebroid_suite():
        if not expected:
            continue
        r = double_report(D)
        assert r.passed, (D.name, r.violations)
        assert r.details["weights"] == {"H_E": [2, 1], "H_E*": [1, 2]}


def test_double_report_witness_on_broken_pair():
    r = double_report(sl2_standard(broken=True))
    assert not r.passed
    assert [v.identity for v in r.violations] == ["{H_E,H_E*}"]


def test_transported_hamiltonian_is_schouten():
    for D, _ in bialgebroid_suite():
        dd = drinfeld_double(D)
        _, _, S = D.pi_e()
        assert schouten_hamiltonian(S, dd.chart) == dd.H_Estar, D.name


def test_derived_bracket_recovers_schouten():
    D = sl2_standard()
    dd = drinfeld_double(D)
    _, _, S = D.pi_e()
    H = schouten_hamiltonian(S, dd.chart)
    names = S.chart.names
    for a in names:
        for b in names:
            f, g = dd.chart.var(a), dd.chart.var(b)
            derived = bracket_eval(dd.bracket, bracket_eval(dd.bracket, H, f), g)
            assert derived == embed(S[(a, b)], dd.chart), (a, b)


def test_flip_is_symplectic():
    for D, _ in bialgebroid_suite():
        dd = drinfeld_double(D)
        # the flip swaps the two weight gradings, so only the inverse laws are checked
        assert dd.flip.check(strict=False) == []
        assert [v[0] for v in dd.flip.check()][0] == "forward-weight"
        assert not list(is_poisson_map(dd.flip, dd.bracket, dd.dual_bracket)), D.name


def test_base_mismatch():
    with pytest.raises(BaseMismatch):
        BialgebroidData(tangent(1), b2())
    with pytest.raises(BaseMismatch):
        BialgebroidData(sl2(), b2())


def test_qs_on_named_examples():
    assert qs_check(b2_bialgebra()).passed
    assert qs_check(super_bialgebra()).passed
    assert not qs_check(super_bialgebra(broken=True)).passed


def test_pi_tangent_lift():
    D = sl2_standard()
    _, Q, S = D.pi_e()
    L = pi_tangent_lift(S)
    assert L.sigma == 0
    assert jacobi_check(L).passed
    with pytest.raises(ParityViolation):
        pi_tangent_lift(L)
    X = lie_lift(Q)
    for name in Q.chart.names:
        assert X[name] == embed(Q[name], X.chart)
    assert is_homological(X)


def test_double_algebroid_of_independent_factors():
    # b2 on (a1, a2) and b2 on (b1, b2) commute, with weights (1,0) and (0,1)
    from gqk import Chart

    C = Chart.build("P", [("a1", ODD, (1, 0)), ("a2", ODD, (1, 0)), ("b1", ODD, (0, 1)), ("b2", ODD, (0, 1))])
    QA = VectorField(C, {"a2": -C.var("a1") * C.var("a2")}, ODD)
    QB = VectorField(C, {"b2": -C.var("b1") * C.var("b2")}, ODD)
    assert double_algebroid_check(C, QA, QB).passed
    r = double_algebroid_check(C, QA, QA)
    assert [v.identity for v in r.violations] == ["weight"]
    mixed = VectorField(C, {"b2": C.var("a1") * C.var("b2")}, ODD)
    r = double_algebroid_check(C, QA, mixed)
    assert not r.passed


def test_pi2_identification_on_suite():
    for A, _ in algebroid_suite():
        r = pi2_cotangent_identification(frame_bundle(A))
        assert r.passed, (A.name, r.violations)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_pi2_identification_random(seed):
    assert pi2_cotangent_identification(random_bundle(seed)).passed
