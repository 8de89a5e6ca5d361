import pathlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gqk import to_text
from gqk.algebroid import base_chart
from gqk.doubles import (
    MultiVectorBundle,
    VectorBundle,
    core_of,
    cotangent_double,
    cotangent_flip,
    dual_cycle_check,
    dual_law,
    dualize,
    flip_as_dvb_iso,
    pairing_check,
    parity_reverse,
    primed_chart,
    random_bundle,
    random_dvb,
    tangent_prolongation,
    trivial_bundle,
    trivial_dvb,
    validate_dvb,
    validate_multi,
)
from gqk.dsl import parse
from gqk.errors import ProvenanceMismatch
from gqk.geometry import Transition, tangent_lift
from gqk.superpoly import substitute

GOLDEN = pathlib.Path(__file__).parent / "golden"
DOC = parse((GOLDEN / "dvb.gqk").read_text())
M = base_chart(["x"])
P = primed_chart(M)


def test_trivial_and_mixed_are_valid():
    for name in ("trivial", "mixed", "wide"):
        assert validate_dvb(DOC[name]).passed, name


def test_mixed_instance_laws():
    tr = DOC["mixed"].transition()
    assert to_text(tr.forward["z1"]) == "z1' + x'*u1'*w1'"
    assert to_text(tr.backward["z1'"]) == "z1 - x*u1*w1"


def test_quadratic_z_law_fails_weight_check():
    tr = DOC["mixed"].transition()
    src = tr.source
    fwd = dict(tr.forward)
    fwd["z1"] = fwd["z1"] + src.var("u1'") ** 2
    bad = MultiVectorBundle(Transition(src, tr.target, fwd, tr.backward, "bad"), "bad")
    r = validate_dvb(bad)
    assert not r.passed
    assert r.violations[0].identity == "forward-weight"


def test_block_inverse_is_checked():
    D = DOC["wide"]
    from dataclasses import replace

    broken = replace(D, Tu_inv=D.Tu)
    r = validate_dvb(broken)
    assert [v.identity for v in r.violations] == ["Tu*Tu_inv=1"]


def test_cocycle_on_triple_overlap():
    D = DOC["mixed"]
    triv = DOC["trivial"]
    assert validate_dvb(D, others=(triv, D)).passed
    assert not validate_dvb(D, others=(D, D)).passed


def test_cores():
    E = trivial_bundle(M, ("v",))
    TE = tangent_prolongation(E)
    core = core_of(TE)
    assert core.fibre == ("dv",) and core.T == E.T
    assert core_of(cotangent_double(E)).fibre == ("p_x",)
    assert core_of(trivial_dvb(M, ["u"], ["w"], ["z"])).same_as(trivial_bundle(M, ("z",), "core"))


def test_cotangent_core_is_cotangent_of_base():
    from gqk.superpoly import partial_derivative

    for seed in range(6):
        E = random_bundle(seed)
        core = core_of(cotangent_double(E))
        names = E.base.names
        for b, xb in enumerate(names):
            for a, xa in enumerate(names):
                jac = partial_derivative(E.base_backward[xb + "'"], xa)
                jac = substitute(jac, dict(E.base_forward), target=E.base_primed)
                assert core.T[b][a] == jac, (seed, xb, xa)


def test_dual_of_trivial():
    D = trivial_dvb(M, ["u"], ["w"], ["z"])
    DA = dualize(D, "A")
    assert (DA.u, DA.w, DA.z) == (("u",), ("z_d",), ("w_d",))
    assert not DA.has_mixing()
    assert validate_dvb(DA).passed


def test_dual_law_gains_mixing_term():
    D = DOC["mixed"]
    law = dual_law(D, "A")
    assert to_text(law["w1_d'"]) == "w1_d + x*u1*z1_d"
    assert to_text(law["z1_d'"]) == "z1_d"
    assert to_text(dualize(D, "A").Tmix[0][0][0]) == "-x'"
    law_b = dual_law(D, "B")
    assert to_text(law_b["u1_d'"]) == "u1_d + x*z1_d*w1"


def test_dual_law_matches_dual_bundle():
    for name in ("mixed", "wide"):
        D = DOC[name]
        for side in ("A", "B"):
            tr = dualize(D, side).transition()
            for k, v in dual_law(D, side).items():
                assert tr.backward[k] == v, (name, side, k)


def test_double_dual_and_cycle():
    for name in ("trivial", "mixed", "wide"):
        D = DOC[name]
        assert dualize(dualize(D, "A"), "A").same_as(D)
        assert dualize(dualize(D, "B"), "B").same_as(D)
        assert dual_cycle_check(D).passed


def test_pairing_examples():
    triv = DOC["trivial"]
    for sign in (-1, 1):
        assert pairing_check(dualize(triv, "A"), dualize(triv, "B"), sign).passed
    D = DOC["mixed"]
    DA, DB = dualize(D, "A"), dualize(D, "B")
    assert pairing_check(DA, DB).passed
    r = pairing_check(DA, DB, sign=1)
    assert [v.residue_text for v in r.violations] == ["-2*x'*u1'*z1_d'*w1'"]


def test_pairing_provenance():
    with pytest.raises(ProvenanceMismatch):
        pairing_check(dualize(DOC["mixed"], "A"), dualize(DOC["wide"], "B"))
    with pytest.raises(ProvenanceMismatch):
        pairing_check(dualize(DOC["mixed"], "A"), dualize(DOC["mixed"], "A"))


def test_parity_reversions():
    D = DOC["wide"]
    p12 = parity_reverse(parity_reverse(D, [1]), [0])
    p21 = parity_reverse(parity_reverse(D, [0]), [1])
    assert p12.same_as(p21)
    assert p12.same_as(parity_reverse(D, [0, 1]))
    assert parity_reverse(D, []).same_as(D.to_multi())
    assert parity_reverse(parity_reverse(D, [0]), [0]).same_as(D.to_multi())
    assert validate_multi(parity_reverse(D, [0, 1])).passed
    odd = [c.name for c in parity_reverse(D, [0]).chart.coords if c.parity]
    assert odd == ["u1", "u2", "z1"]
    assert [c.name for c in parity_reverse(D, [0, 1]).chart.coords if c.parity] == ["u1", "u2", "w1"]


def test_tangent_prolongation_laws():
    E = trivial_bundle(M, ("v",))
    TE = tangent_prolongation(E)
    assert not TE.has_mixing()
    # rank 1 with T = x': only the forward law exists polynomially
    E1 = VectorBundle(M, ("v",), ((P.var("x'"),),), ((P.zero(),),), name="E1")
    fwd = tangent_lift(E1.transition(), prefix="d").forward
    assert to_text(fwd["dv"]) == "v'*dx' + x'*dv'"
    # an invertible rank-2 analogue: T = [[1, x'], [0, 1]]
    one, x = P.one(), P.var("x'")
    E2 = VectorBundle(M, ("v1", "v2"), ((one, x), (P.zero(), one)), ((one, -x), (P.zero(), one)), name="E2")
    TE2 = tangent_prolongation(E2)
    assert validate_dvb(TE2).passed
    assert to_text(TE2.Tmix[0][0][1]) == "1"
    assert core_of(TE2).T == E2.T


def test_cotangent_double_and_flip():
    E = trivial_bundle(M, ("v",))
    C = cotangent_double(E)
    assert (C.u, C.w, C.z) == (("v",), ("p_v",), ("p_x",))
    assert not C.has_mixing()
    fwd, bwd = cotangent_flip(E)
    assert to_text(fwd["v_d"]) == "p_v" and to_text(fwd["p_v_d"]) == "-v"
    assert flip_as_dvb_iso(E).passed


def test_flip_twice_is_fibre_negation():
    E = random_bundle(1)
    f1, _ = cotangent_flip(E)
    f2, _ = cotangent_flip(E.dual())
    # pull T*E coordinates back through T*E* and then to T*E
    tE = next(iter(f1.values())).chart
    for name, img in f2.items():
        back = substitute(img, f1, target=tE)
        expected = -tE.var(name) if not name.startswith("x") and not name.startswith("p_x") else tE.var(name)
        assert back == expected, name


def test_triple_vector_bundle_from_tangent_of_double():
    D = DOC["wide"]
    M3 = MultiVectorBundle(tangent_lift(D.transition(), prefix="d"), "TD")
    assert M3.multiplicity == 3
    assert validate_multi(M3).passed
    assert parity_reverse(parity_reverse(M3, [2]), [0]).same_as(parity_reverse(M3, [0, 2]))
    assert parity_reverse(parity_reverse(M3, [0, 1]), [1, 2]).same_as(parity_reverse(M3, [0, 2]))


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_random_dvbs(seed):
    D = random_dvb(seed)
    assert validate_dvb(D).passed
    DA, DB = dualize(D, "A"), dualize(D, "B")
    assert validate_dvb(DA).passed and validate_dvb(DB).passed
    assert pairing_check(DA, DB).passed
    assert pairing_check(DA, DB, sign=1).passed == (not D.has_mixing())
    assert dual_cycle_check(D).passed


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_random_prolongations(seed):
    E = random_bundle(seed)
    assert E.check().passed
    assert validate_dvb(tangent_prolongation(E)).passed
    assert validate_dvb(cotangent_double(E)).passed
    assert flip_as_dvb_iso(E).passed
