"""Named example structures used by the tests, the acceptance suite and the CLI."""

from __future__ import annotations

from .algebroid import AlgebroidData, BundleMap, base_chart, from_structure_constants
from .drinfeld import BialgebroidData
from .superpoly import EVEN, ODD, partial_derivative


def point():
    return base_chart([], "pt")


def tangent(n: int = 1) -> AlgebroidData:
    """``T R^n`` with frame ``d_a`` and identity anchor."""
    names = ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]
    M = base_chart(names)
    frame = tuple((f"d{x}", EVEN) for x in names)
    anchor = {(f"d{x}", x): M.one() for x in names}
    return AlgebroidData(M, frame, anchor, {}, f"TR{n}")


def abelian(n: int = 2) -> AlgebroidData:
    frame = tuple((f"e{i + 1}", EVEN) for i in range(n))
    return from_structure_constants(f"ab{n}", frame, {})


def b2() -> AlgebroidData:
    """Two-dimensional nonabelian Lie algebra ``[e1, e2] = e2``."""
    return from_structure_constants("b2", (("e1", EVEN), ("e2", EVEN)), {("e1", "e2"): {"e2": 1}})


def sl2(perturbed: bool = False) -> AlgebroidData:
    consts = {
        ("h", "e"): {"e": 2},
        ("h", "f"): {"f": -2},
        ("e", "f"): {"h": 1, "e": 1} if perturbed else {"h": 1},
    }
    frame = (("h", EVEN), ("e", EVEN), ("f", EVEN))
    return from_structure_constants("sl2_broken" if perturbed else "sl2", frame, consts)


def super_heisenberg(broken: bool = False) -> AlgebroidData:
    """``(1|1)`` superalgebra with ``[q, q] = h``; ``broken`` adds ``[h, q] = q``."""
    consts = {("q", "q"): {"h": 1}}
    if broken:
        consts[("h", "q")] = {"q": 1}
    name = "sheis_broken" if broken else "sheis"
    return from_structure_constants(name, (("h", EVEN), ("q", ODD)), consts)


def super_line() -> AlgebroidData:
    """Algebroid over ``R`` with even ``d`` (anchor ``d/dx``) and odd ``t``, ``[d, t] = x t``."""
    M = base_chart(["x"])
    x = M.var("x")
    return AlgebroidData(M, (("d", EVEN), ("t", ODD)), {("d", "x"): M.one()}, {("d", "t"): {"t": x}}, "sline")


def action_b2() -> AlgebroidData:
    """Action algebroid of ``b2`` on ``R``: ``a(e1) = -x d/dx``, ``a(e2) = d/dx``."""
    M = base_chart(["x"])
    x = M.var("x")
    return AlgebroidData(
        M,
        (("e1", EVEN), ("e2", EVEN)),
        {("e1", "x"): -x, ("e2", "x"): M.one()},
        {("e1", "e2"): {"e2": M.one()}},
        "act_b2",
    )


def bad_anchor() -> AlgebroidData:
    """``R^2`` with commuting frame but ``a(d2) = x1 d/dx2``: anchor not a morphism."""
    M = base_chart(["x1", "x2"])
    x1 = M.var("x1")
    return AlgebroidData(
        M, (("d1", EVEN), ("d2", EVEN)), {("d1", "x1"): M.one(), ("d2", "x2"): x1}, {}, "bad_anchor"
    )


def algebroid_suite():
    """Valid and broken algebroids; the second element tells which is valid."""
    return [
        (tangent(1), True),
        (tangent(2), True),
        (abelian(2), True),
        (b2(), True),
        (sl2(), True),
        (super_heisenberg(), True),
        (super_line(), True),
        (action_b2(), True),
        (sl2(perturbed=True), False),
        (super_heisenberg(broken=True), False),
        (bad_anchor(), False),
    ]


def morphism_suite():
    """``(Phi, A1, A2, expected)`` cases for the morphism criterion."""
    pt = point()
    one = pt.one
    cases = []
    s = sl2()
    ident = BundleMap({}, {(e, e): one() for e in s.frame_names})
    cases.append(("sl2-identity", ident, s, s, True))
    chevalley = BundleMap({}, {("h", "h"): -one(), ("e", "f"): one(), ("f", "e"): one()})
    cases.append(("sl2-chevalley", chevalley, s, s, True))
    swap = BundleMap({}, {("h", "h"): one(), ("e", "f"): one(), ("f", "e"): one()})
    cases.append(("sl2-naive-swap", swap, s, s, False))
    b = b2()
    ab1 = abelian(1)
    quotient = BundleMap({}, {("e1", "e1"): one()})
    cases.append(("b2-abelianization", quotient, b, ab1, True))
    incl = BundleMap({}, {("e1", "e1"): one()})
    cases.append(("ab1-into-b2", incl, ab1, b, True))
    scale2 = BundleMap({}, {("e1", "e1"): 2 * one(), ("e2", "e2"): one()})
    cases.append(("b2-scale-e1", scale2, b, b, False))
    scale_e2 = BundleMap({}, {("e1", "e1"): one(), ("e2", "e2"): 3 * one()})
    cases.append(("b2-scale-e2", scale_e2, b, b, True))
    t = tangent(1)
    M = t.base
    x = M.var("x")
    shift = BundleMap({"x": x + 1}, {("dx", "dx"): M.one()})
    cases.append(("TR1-translation", shift, t, t, True))
    bad = BundleMap({"x": x}, {("dx", "dx"): x})
    cases.append(("TR1-rescale-by-x", bad, t, t, False))
    act = action_b2()
    anchor_map = BundleMap({"x": act.base.var("x")}, {("e1", "dx"): -act.base.var("x"), ("e2", "dx"): act.base.one()})
    cases.append(("act_b2-anchor", anchor_map, act, t, True))
    return cases


# bialgebroids ---------------------------------------------------------------

def _dual_frame(A: AlgebroidData):
    return tuple((e + "_d", p) for e, p in A.frame)


def b2_bialgebra() -> BialgebroidData:
    """``b2`` with the cobracket dual to ``[e1_d, e2_d] = e2_d``."""
    A = b2()
    dual = from_structure_constants("b2_d", _dual_frame(A), {("e1_d", "e2_d"): {"e2_d": 1}})
    return BialgebroidData(A, dual, "b2_bi")


def sl2_standard(broken: bool = False) -> BialgebroidData:
    """Standard cobracket ``d e = e^h``, ``d f = f^h``; ``broken`` uses ``[e_d, f_d] = h_d`` instead."""
    A = sl2()
    if broken:
        consts = {("e_d", "f_d"): {"h_d": 1}}
    else:
        consts = {("e_d", "h_d"): {"e_d": 1}, ("f_d", "h_d"): {"f_d": 1}}
    name = "sl2_bi_broken" if broken else "sl2_bi"
    return BialgebroidData(A, from_structure_constants(name + "_d", _dual_frame(A), consts), name)


def super_bialgebra(broken: bool = False) -> BialgebroidData:
    """Super Heisenberg with dual ``[h_d, q_d] = q_d``; ``broken`` uses ``[q_d, q_d] = h_d``."""
    A = super_heisenberg()
    consts = {("q_d", "q_d"): {"h_d": 1}} if broken else {("h_d", "q_d"): {"q_d": 1}}
    name = "sheis_bi_broken" if broken else "sheis_bi"
    return BialgebroidData(A, from_structure_constants(name + "_d", _dual_frame(A), consts), name)


def koszul(pi12, name: str) -> AlgebroidData:
    """``T* R^2`` of the bivector ``pi12 d/dx1 ^ d/dx2`` (a Lie algebroid: every bivector on R^2 is Poisson)."""
    M = pi12.chart
    anchor = {("dx1_d", "x2"): pi12, ("dx2_d", "x1"): -pi12}
    brackets = {("dx1_d", "dx2_d"): {"dx1_d": partial_derivative(pi12, "x1"), "dx2_d": partial_derivative(pi12, "x2")}}
    return AlgebroidData(M, (("dx1_d", EVEN), ("dx2_d", EVEN)), anchor, brackets, name)


def poisson_plane(quadratic: bool = False) -> BialgebroidData:
    """``(T R^2, T* R^2)`` for ``pi = x1 d1^d2`` (or ``x1 x2 d1^d2``)."""
    T = tangent(2)
    x1, x2 = T.base.var("x1"), T.base.var("x2")
    pi12 = x1 * x2 if quadratic else x1
    name = "plane_pi2" if quadratic else "plane_pi"
    return BialgebroidData(T, koszul(pi12, name + "_d"), name)


def lie_bundle_plane() -> BialgebroidData:
    """``T R^2`` against a bundle of Lie algebras ``[dx1_d, dx2_d] = x2 dx1_d``: incompatible."""
    T = tangent(2)
    x2 = T.base.var("x2")
    dual = AlgebroidData(T.base, (("dx1_d", EVEN), ("dx2_d", EVEN)), {}, {("dx1_d", "dx2_d"): {"dx1_d": x2}}, "lie_bundle")
    return BialgebroidData(T, dual, "plane_bundle")


def bialgebroid_suite():
    """``(bialgebroid, compatible)`` pairs; both parts are valid algebroids in every case."""
    return [
        (b2_bialgebra(), True),
        (sl2_standard(), True),
        (super_bialgebra(), True),
        (poisson_plane(), True),
        (poisson_plane(quadratic=True), True),
        (sl2_standard(broken=True), False),
        (super_bialgebra(broken=True), False),
        (lie_bundle_plane(), False),
    ]
