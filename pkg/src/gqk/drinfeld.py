"""Lie bialgebroids, their cotangent (Drinfeld) doubles and double algebroids.

For a pair ``(E, E*)`` in positional duality of frames the compatibility is
tested in several equivalent ways: ``Q_E`` differentiating the Schouten
bracket of ``E*`` on ``Pi E`` (and the mirror statement on ``Pi E*``), the
tangent-lifted versions on ``Pi T(Pi E)`` and ``Pi T(Pi E*)``, and the
vanishing of ``{H_E, H_E*}`` on ``T* Pi E``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from .algebroid import XI, AlgebroidData, to_antialgebroid, to_schouten_antidual, validate_algebroid
from .brackets import (
    BracketStructure,
    bracket_eval,
    canonical_cotangent,
    derivation_check,
    hamiltonian_field,
    hamiltonian_lift,
    is_poisson_map,
)
from .doubles import MultiVectorBundle, VectorBundle, parity_reverse, trivial_bundle
from .errors import BaseMismatch, ParityViolation
from .geometry import (
    Transition,
    VectorField,
    apply,
    commutator,
    cotangent_lift,
    de_rham_field,
    tangent_chart,
)
from .report import Report
from .superpoly import EVEN, ODD, Chart, SuperPolynomial, embed, reinterpret, weight_of

PREFIX_D = "d"


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def rename_frame(A: AlgebroidData, names, name: str | None = None) -> AlgebroidData:
    """Same algebroid with frame element ``i`` called ``names[i]``."""
    old = A.frame_names
    m = dict(zip(old, names))
    frame = tuple((m[e], p) for e, p in A.frame)
    anchor = {(m[e], x): p for (e, x), p in A.anchor.items()}
    brackets = {(m[e], m[f]): {m[g]: p for g, p in comps.items()} for (e, f), comps in A.brackets.items()}
    return AlgebroidData(A.base, frame, anchor, brackets, name or A.name)


def _rechart(B: BracketStructure, chart: Chart) -> BracketStructure:
    return BracketStructure(chart, {k: reinterpret(p, chart) for k, p in B.structure.items()}, B.sigma, B.weight, B.name)


@dataclass(frozen=True)
class BialgebroidData:
    """``E`` and ``E*`` over one base; frame ``i`` of ``E*`` is dual to frame ``i`` of ``E``."""

    E: AlgebroidData
    Estar: AlgebroidData
    name: str = ""

    def __post_init__(self):
        if self.E.base != self.Estar.base:
            raise BaseMismatch(f"{self.E.name!r} and {self.Estar.name!r} live over different bases")
        if len(self.E.frame) != len(self.Estar.frame):
            raise BaseMismatch("E and E* must have the same rank")
        for (e, p), (f, q) in zip(self.E.frame, self.Estar.frame):
            if p != q:
                raise ParityViolation(f"dual frame elements {e!r} and {f!r} have different parities")

    @property
    def base(self) -> Chart:
        return self.E.base

    def transposed(self) -> "BialgebroidData":
        return BialgebroidData(self.Estar, self.E, self.name + "*")

    # Pi E with Q_E and the Schouten bracket of E*
    def pi_e(self):
        chart, Q = to_antialgebroid(self.E, XI)
        dual = rename_frame(self.Estar, self.E.frame_names)
        _, S = to_schouten_antidual(dual, XI)
        return chart, Q, _rechart(S, chart)


def validate_pair(D: BialgebroidData) -> Report:
    report = Report("bialgebroid-parts", D.name)
    report.merge(validate_algebroid(D.E))
    report.merge(validate_algebroid(D.Estar))
    return report


def qs_check(D: BialgebroidData) -> Report:
    """``Q_E`` is a derivation of the Schouten bracket induced by ``E*`` on ``Pi E``."""
    chart, Q, S = D.pi_e()
    return derivation_check(S, Q, f"QS({D.name})")


# Pi T lifts -----------------------------------------------------------------------

def insertion_field(X: VectorField, chart: Chart, prefix: str = PREFIX_D) -> VectorField:
    """``i_X = sum X^A d/d(dA)`` on ``Pi T N``."""
    coeffs = {prefix + a: embed(p, chart) for a, p in X.coeffs.items()}
    return VectorField(chart, coeffs, (X.parity + 1) % 2)


def lie_lift(X: VectorField, prefix: str = PREFIX_D) -> VectorField:
    """``L_X = (-1)^|X| [d, i_X]`` on ``Pi T N``; restricts to ``X`` on functions of ``N``."""
    chart = tangent_chart(X.chart, odd=True, prefix=prefix)
    d = de_rham_field(chart, prefix)
    L = commutator(d, insertion_field(X, chart, prefix))
    return L.scale(-1) if X.parity % 2 else L


def pi_tangent_lift(S: BracketStructure, prefix: str = PREFIX_D) -> BracketStructure:
    """Complete lift of an odd bracket on ``N`` to an even bracket on ``Pi T N``.

    ``{y^A, y^B} = 0``, ``{y^A, dy^B} = P^{AB}``, ``{dy^A, dy^B} = d P^{AB}``.
    """
    if S.sigma != ODD:
        raise ParityViolation("only odd brackets lift to an even bracket on Pi T")
    chart = tangent_chart(S.chart, odd=True, prefix=prefix)
    d = de_rham_field(chart, prefix)
    structure = {}
    for (a, b), p in S.structure.items():
        q = embed(p, chart)
        structure[(a, prefix + b)] = q
        structure[(prefix + a, prefix + b)] = apply(d, q)
    weight = (S.weight + (-1,)) if S.weight is not None else None
    return BracketStructure(chart, structure, EVEN, weight, name=f"PiT({S.name})")


def pq_check(Q: VectorField, S: BracketStructure, label: str = "") -> Report:
    return derivation_check(pi_tangent_lift(S), lie_lift(Q), label)


# the cotangent double ---------------------------------------------------------------

def flip_map(D: BialgebroidData, T: Chart, Tdual: Chart):
    """Pullback of ``T* Pi E*`` coordinates to ``T* Pi E``.

    ``xi_f -> p_xi_e``, ``p_xi_f -> (-1)^|e| xi_e``, base and base momenta fixed.
    """
    sigma = {}
    for x in D.base.names:
        sigma[x] = T.var(x)
        sigma["p_" + x] = T.var("p_" + x)
    for (e, p), (f, _) in zip(D.E.frame, D.Estar.frame):
        sigma[XI + f] = T.var("p_" + XI + e)
        sigma["p_" + XI + f] = T.var(XI + e) * _sign(p)
    inverse = {}
    for x in D.base.names:
        inverse[x] = Tdual.var(x)
        inverse["p_" + x] = Tdual.var("p_" + x)
    for (e, p), (f, _) in zip(D.E.frame, D.Estar.frame):
        inverse["p_" + XI + e] = Tdual.var(XI + f)
        inverse[XI + e] = Tdual.var("p_" + XI + f) * _sign(p)
    return Transition(T, Tdual, sigma, inverse, "flip")


@dataclass
class DrinfeldDouble:
    chart: Chart
    bracket: BracketStructure
    H_E: SuperPolynomial
    H_Estar: SuperPolynomial
    flip: Transition
    dual_bracket: BracketStructure

    @property
    def X_E(self) -> VectorField:
        return hamiltonian_field(self.bracket, self.H_E)

    @property
    def X_Estar(self) -> VectorField:
        return hamiltonian_field(self.bracket, self.H_Estar)

    @property
    def Q(self) -> VectorField:
        return self.X_E + self.X_Estar


def drinfeld_double(D: BialgebroidData) -> DrinfeldDouble:
    """``T* Pi E`` with ``H_E`` and ``H_E*`` transported from ``T* Pi E*``."""
    piE, QE = to_antialgebroid(D.E, XI)
    piEs, QEs = to_antialgebroid(D.Estar, XI)
    T, B = canonical_cotangent(piE)
    Td, Bd = canonical_cotangent(piEs)
    flip = flip_map(D, T, Td)
    H_E = hamiltonian_lift(QE, T)
    H_star = flip.pullback(hamiltonian_lift(QEs, Td))
    return DrinfeldDouble(T, B, H_E, H_star, flip, Bd)


def schouten_hamiltonian(S: BracketStructure, T: Chart, prefix: str = "p_") -> SuperPolynomial:
    """Fibrewise quadratic function on ``T* N`` whose derived bracket is ``S``.

    ``{{H, f}, g} = S(f, g)`` for functions of ``N`` (momentum-first
    canonical bracket).
    """
    H = T.zero()
    chart = S.chart
    for (a, b), p in S.structure.items():
        pa = chart.coord(a).parity
        # each unordered pair appears twice in the full table
        H = H + T.var(prefix + b) * T.var(prefix + a) * embed(p, T) * _sign(pa + 1) / 2
    return H


def double_report(D: BialgebroidData) -> Report:
    """Every identity of the cotangent double, one report."""
    report = Report("drinfeld", D.name)
    dd = drinfeld_double(D)
    B = dd.bracket
    for pair, res in is_poisson_map(dd.flip, B, dd.dual_bracket):
        report.fail("flip-symplectic", pair, res)
    _, _, S = D.pi_e()
    SE = schouten_hamiltonian(S, dd.chart)
    if SE != dd.H_Estar:
        report.fail("H_E*=S_E", ("H_E*",), dd.H_Estar - SE)
    for label, f, g in (("{H_E,H_E}", dd.H_E, dd.H_E), ("{H_E*,H_E*}", dd.H_Estar, dd.H_Estar), ("{H_E,H_E*}", dd.H_E, dd.H_Estar)):
        res = bracket_eval(B, f, g)
        if res:
            report.fail(label, (label,), res)
    report.details["weights"] = {"H_E": list(weight_of(dd.H_E) or ()), "H_E*": list(weight_of(dd.H_Estar) or ())}
    return report


def double_algebroid_check(chart: Chart, QA: VectorField, QB: VectorField, label: str = "") -> Report:
    """Two homological fields of weights ``(1,0)`` and ``(0,1)`` that commute."""
    report = Report("double-algebroid", label)
    for name, X, w in (("QA", QA, (1, 0)), ("QB", QB, (0, 1))):
        if X.chart != chart:
            report.fail("chart", (name,), X.chart.zero())
            continue
        if X and X.weight != w:
            report.fail("weight", (name,), X.to_text())
        sq = commutator(X, X)
        for c, p in sq.coeffs.items():
            if p:
                report.fail(f"[{name},{name}]=0", (c,), p)
    br = commutator(QA, QB)
    for c, p in br.coeffs.items():
        if p:
            report.fail("[QA,QB]=0", (c,), p)
    return report


def bialgebroid_verdicts(D: BialgebroidData) -> Dict[str, bool]:
    """Six presentations of compatibility; on valid parts they all agree."""
    chart, QE, S_on_E = D.pi_e()
    T = D.transposed()
    chart_s, QEs, S_on_Es = T.pi_e()
    dd = drinfeld_double(D)
    return {
        "QS(PiE)": derivation_check(S_on_E, QE).passed,
        "QS(PiE*)": derivation_check(S_on_Es, QEs).passed,
        "PQ(PiT PiE)": pq_check(QE, S_on_E).passed,
        "PQ(PiT PiE*)": pq_check(QEs, S_on_Es).passed,
        "[X_HE,X_HE*]=0": not commutator(dd.X_E, dd.X_Estar),
        "{H_E,H_E*}=0": not bracket_eval(dd.bracket, dd.H_E, dd.H_Estar),
    }


def bialgebroid_check(D: BialgebroidData) -> Report:
    report = Report("bialgebroid", D.name)
    parts = validate_pair(D)
    if not parts.passed:
        report.merge(parts)
        return report
    verdicts = bialgebroid_verdicts(D)
    report.details["verdicts"] = verdicts
    if len(set(verdicts.values())) != 1:
        report.fail("verdicts-agree", tuple(k for k, v in verdicts.items() if not v), "presentations disagree")
    report.merge(qs_check(D))
    return report


def pi2_cotangent_identification(E: VectorBundle) -> Report:
    """``Pi^2(T* E)`` and ``T*(Pi E)`` carry the same chart and transition data.

    The labels match through ``v -> xi_v``, ``p_v -> p_xi_v``.
    """
    report = Report("pi2-cotangent", E.name)
    raw = cotangent_lift(E.transition())
    rev = parity_reverse(MultiVectorBundle(raw, "T*" + E.name), (0, 1)).transition
    piE = E.pi()
    other = cotangent_lift(piE.transition())
    fib = {v: XI + v for v in E.fibre}

    def new(n: str) -> str:
        core = n[:-1] if n.endswith("'") else n
        tick = "'" if n.endswith("'") else ""
        if core.startswith("p_") and core[2:] in fib:
            return "p_" + fib[core[2:]] + tick
        return fib.get(core, core) + tick

    smap = {c.name: new(c.name) for c in rev.source.coords}
    tmap = {c.name: new(c.name) for c in rev.target.coords}
    try:
        moved = rev.relabel(other.source, other.target, smap, tmap)
    except Exception as exc:  # layout mismatch
        report.fail("pi2-cotangent-charts", ("chart",), str(exc))
        return report
    for c, (pc, oc) in enumerate(zip(rev.target.coords, other.target.coords)):
        if (pc.parity, pc.weight, new(pc.name)) != (oc.parity, oc.weight, oc.name):
            report.fail("pi2-cotangent-charts", (pc.name, oc.name), f"{pc} vs {oc}")
    for n, p in other.forward.items():
        if moved.forward[n] != p:
            report.fail("pi2-cotangent-forward", (n,), moved.forward[n] - p)
    for n, p in other.backward.items():
        if moved.backward[n] != p:
            report.fail("pi2-cotangent-backward", (n,), moved.backward[n] - p)
    return report


def frame_bundle(A: AlgebroidData) -> VectorBundle:
    """Trivial bundle on the frame of ``A`` (all suite algebroids are global)."""
    return trivial_bundle(A.base, A.frame_names, A.name or "E")
