"""Dispatch of check directives and the text outputs of ``convert`` and ``double``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, List, Optional

from . import algebroid as alg
from .brackets import BracketStructure, bracket_eval, jacobi_check
from .doubles import (
    DoubleVectorBundle,
    dual_cycle_check,
    dualize,
    pairing_check,
    parity_reverse,
    random_dvb,
    validate_dvb,
    validate_multi,
)
from .drinfeld import (
    BialgebroidData,
    bialgebroid_check,
    bialgebroid_verdicts,
    double_algebroid_check,
    double_report,
    drinfeld_double,
    frame_bundle,
    pi2_cotangent_identification,
)
from .dsl import (
    AlgebroidDecl,
    BialgebroidDecl,
    BracketDecl,
    CheckDecl,
    Comment,
    Decl,
    DoubleAlgDecl,
    DVBDecl,
    Document,
    FieldDecl,
    MorphismDecl,
    PolyDecl,
    TransitionDecl,
    chart_decls,
    document,
    serialize,
)
from .errors import GQKError
from .geometry import VectorField, VolumeForm, commutator, divergence, lie_derivative_volume
from .report import Report
from .superpoly import EVEN, ODD, Chart, reinterpret, to_text


@dataclass
class Options:
    explain: bool = False
    strict_weights: bool = False
    seed: Optional[int] = None
    plus_sign: bool = False
    timing: bool = False


def _verdict_text(verdicts):
    return {k: ("pass" if v else "fail") for k, v in verdicts.items()}


def _table(B: BracketStructure):
    idx = B.chart.index
    pairs = sorted(B.table(), key=lambda k: (idx(k[0]), idx(k[1])))
    return {f"{{{a},{b}}}": to_text(B.structure[(a, b)]) for a, b in pairs}


def _subject(doc: Document, name: str):
    return doc.declaration(name)


def _expect(decl: Decl, kinds, check: str):
    if not isinstance(decl, kinds):
        raise GQKError(f"check {check} does not apply to {type(decl).__name__[:-4].lower()} {decl.name!r}")
    return decl


def check_algebroid(A, opts: Options) -> Report:
    report = alg.validate_algebroid(A)
    verdicts = alg.four_fold_verdicts(A)
    report.details["verdicts"] = _verdict_text(verdicts)
    if len(set(verdicts.values())) != 1:
        report.fail("four-fold-agreement", tuple(k for k, v in verdicts.items() if not v), "presentations disagree")
    if opts.explain:
        _, Q = alg.to_antialgebroid(A)
        report.details["explain"] = {
            "Q": Q.to_text(),
            "poisson": _table(alg.to_poisson_dual(A)[1]),
            "schouten": _table(alg.to_schouten_antidual(A)[1]),
            "sign_table": alg.sign_table(),
        }
    return report


def check_modular(decl, opts: Options) -> Report:
    if isinstance(decl, AlgebroidDecl):
        report = alg.modular_check(decl.value)
        _, Q = alg.to_antialgebroid(decl.value)
    else:
        Q = decl.value
        report = Report("modular", decl.name)
        div = divergence(Q)
        report.details["representative"] = to_text(div)
        report.details["vanishes"] = div.is_zero()
        closed = Q(div)
        if closed:
            report.fail("Q(div Q)=0", ("div",), closed)
    twice = lie_derivative_volume(Q, lie_derivative_volume(Q, VolumeForm(Q.chart)))
    if twice.density:
        report.fail("L_Q.L_Q=0", ("volume",), twice.density)
    return report


def check_dvb(D: DoubleVectorBundle, opts: Options) -> Report:
    report = validate_dvb(D)
    if not report.passed:
        return report
    report.merge(dual_cycle_check(D))
    for dirs in ((0,), (1,), (0, 1)):
        r = validate_multi(parity_reverse(D, dirs))
        report.merge(r, prefix=f"Pi{''.join(str(j + 1) for j in dirs)}:")
    if opts.explain:
        report.details["explain"] = {
            "transition": {n: to_text(p) for n, p in D.transition().forward.items()},
            "dual_A": {n: to_text(p) for n, p in dualize(D, "A").transition().forward.items()},
            "dual_B": {n: to_text(p) for n, p in dualize(D, "B").transition().forward.items()},
        }
    return report


def check_drinfeld(D: BialgebroidData, opts: Options) -> Report:
    report = double_report(D)
    dd = drinfeld_double(D)
    report.details["{H_E,H_E*}"] = to_text(bracket_eval(dd.bracket, dd.H_E, dd.H_Estar))
    if all(p == EVEN for _, p in D.E.frame):
        report.merge(pi2_cotangent_identification(frame_bundle(D.E)))
    if opts.explain:
        report.details["explain"] = {"chart": dd.chart.names, "H_E": to_text(dd.H_E), "H_E*": to_text(dd.H_Estar)}
    return report


def check_double(decl, doc: Document, opts: Options) -> Report:
    if isinstance(decl, DoubleAlgDecl):
        report = double_algebroid_check(doc.charts[decl.chart], doc[decl.first], doc[decl.second], decl.name)
        return report
    dd = drinfeld_double(decl.value)
    report = double_algebroid_check(dd.chart, dd.X_E, dd.X_Estar, decl.name)
    QQ = commutator(dd.Q, dd.Q)
    for c, p in QQ.coeffs.items():
        if p:
            report.fail("[Q,Q]=0", (c,), p)
    return report


def fuzz_report(seed: int, count: int = 5) -> Report:
    """Seeded random double vector bundles through every bundle check."""
    report = Report("fuzz", f"seed={seed}")
    for s in range(seed, seed + count):
        D = random_dvb(s)
        report.merge(check_dvb(D, Options()), prefix=f"D{s}:")
        report.merge(pairing_check(dualize(D, "A"), dualize(D, "B")), prefix=f"D{s}:")
    report.details["instances"] = count
    return report


def run_check(doc: Document, check: CheckDecl, opts: Options | None = None) -> Report:
    opts = opts or Options()
    start = time.perf_counter()
    try:
        report = _dispatch(doc, check, opts)
    except GQKError as exc:
        report = Report(check.kind, check.subject, error=str(exc))
    report.kind = check.kind
    report.subject = check.subject
    report.elapsed_ms = (time.perf_counter() - start) * 1000
    return report


def _dispatch(doc: Document, check: CheckDecl, opts: Options) -> Report:
    kind = check.kind
    decl = _subject(doc, check.subject)
    if kind == "algebroid":
        return check_algebroid(_expect(decl, AlgebroidDecl, kind).value, opts)
    if kind == "jacobi":
        _expect(decl, (BracketDecl, AlgebroidDecl), kind)
        if isinstance(decl, BracketDecl):
            return jacobi_check(decl.value)
        report = Report("jacobi", decl.name)
        report.merge(jacobi_check(alg.to_poisson_dual(decl.value)[1]), prefix="poisson:")
        report.merge(jacobi_check(alg.to_schouten_antidual(decl.value)[1]), prefix="schouten:")
        return report
    if kind == "bialgebroid":
        D = _expect(decl, BialgebroidDecl, kind).value
        report = bialgebroid_check(D)
        if "verdicts" in report.details:
            report.details["verdicts"] = _verdict_text(report.details["verdicts"])
        return report
    if kind == "dvb":
        return check_dvb(_expect(decl, DVBDecl, kind).value, opts)
    if kind == "pairing":
        D = _expect(decl, DVBDecl, kind).value
        return pairing_check(dualize(D, "A"), dualize(D, "B"), sign=1 if opts.plus_sign else -1)
    if kind == "double":
        return check_double(_expect(decl, (DoubleAlgDecl, BialgebroidDecl), kind), doc, opts)
    if kind == "drinfeld":
        return check_drinfeld(_expect(decl, BialgebroidDecl, kind).value, opts)
    if kind == "modular":
        return check_modular(_expect(decl, (AlgebroidDecl, FieldDecl), kind), opts)
    if kind == "morphism":
        m = _expect(decl, MorphismDecl, kind)
        return alg.morphism_check(m.value, doc[m.source], doc[m.target])
    if kind == "transition":
        t = _expect(decl, TransitionDecl, kind).value
        report = Report("transition", decl.name)
        for ident, coord, res in t.check(strict=opts.strict_weights):
            report.fail(ident, (coord,), res)
        return report
    if kind == "homological":
        X = _expect(decl, FieldDecl, kind).value
        report = Report("homological", decl.name)
        if X.parity != ODD:
            report.fail("odd parity", (decl.name,), "even field")
        for c, p in commutator(X, X).coeffs.items():
            if p:
                report.fail("[Q,Q]=0", (c,), p)
        return report
    raise GQKError(f"unknown check kind {kind!r}")


def run(doc: Document, only: Optional[str] = None, opts: Options | None = None) -> List[Report]:
    """All check directives in document order (optionally one subject)."""
    opts = opts or Options()
    reports = [run_check(doc, c, opts) for c in doc.checks() if only is None or c.subject == only]
    if opts.seed is not None:
        reports.append(fuzz_report(opts.seed))
    return reports


# conversions ------------------------------------------------------------------------

def _ident_chart(chart: Chart, name: str) -> Chart:
    return chart.renamed(name=name)


def _move_field(X: VectorField, chart: Chart) -> VectorField:
    return VectorField(chart, {k: reinterpret(v, chart) for k, v in X.coeffs.items()}, X.parity)


def _move_bracket(B: BracketStructure, chart: Chart, name: str) -> BracketStructure:
    table = {k: reinterpret(v, chart) for k, v in B.table().items()}
    return BracketStructure(chart, table, B.sigma, B.weight, name)


def _prefix(chart: Chart, candidates) -> str:
    fibre = [c.name for c in chart.coords if any(c.weight)]
    for p in candidates:
        if fibre and all(n.startswith(p) for n in fibre):
            return p
    return ""


def convert(doc: Document, subject: str, to: str) -> str:
    """Converted structure as a standalone document."""
    decl = doc.declaration(subject)
    decls: List[Decl] = []
    if to in ("pi-anti", "poisson-dual", "schouten-antidual"):
        A = _expect(decl, AlgebroidDecl, to).value
        if to == "pi-anti":
            chart, Q = alg.to_antialgebroid(A)
            chart = _ident_chart(chart, f"Pi{A.name}")
            decls = chart_decls(chart) + [FieldDecl(f"Q_{A.name}", _move_field(Q, chart))]
        else:
            fn = alg.to_poisson_dual if to == "poisson-dual" else alg.to_schouten_antidual
            chart, B = fn(A)
            cname = f"{A.name}_dual" if to == "poisson-dual" else f"Pi{A.name}_dual"
            chart = _ident_chart(chart, cname)
            label = "P" if to == "poisson-dual" else "S"
            decls = chart_decls(chart) + [BracketDecl(f"{label}_{A.name}", _move_bracket(B, chart, f"{label}_{A.name}"))]
    elif to == "classical":
        _expect(decl, (FieldDecl, BracketDecl), to)
        value = decl.value
        if isinstance(decl, FieldDecl):
            A = alg.from_antialgebroid(value.chart, value, _prefix(value.chart, (alg.XI,)), decl.name + "_E")
        else:
            cands = (alg.U,) if value.sigma == EVEN else (alg.ETA,)
            A = alg.from_linear_bracket(value, _prefix(value.chart, cands), decl.name + "_E")
        decls = chart_decls(A.base) + [AlgebroidDecl(A.name, A)]
    else:
        raise GQKError(f"unknown conversion target {to!r}")
    return serialize(document(decls))


def double_text(doc: Document, subject: str) -> str:
    """Drinfeld-double chart, Hamiltonians, Hamiltonian fields and verdicts."""
    D = _expect(doc.declaration(subject), BialgebroidDecl, "double").value
    dd = drinfeld_double(D)
    cname = f"TstarPi{D.E.name}"
    chart = _ident_chart(dd.chart, cname)
    decls: List[Decl] = chart_decls(chart)
    decls.append(PolyDecl("H_E", cname, reinterpret(dd.H_E, chart)))
    decls.append(PolyDecl("H_Estar", cname, reinterpret(dd.H_Estar, chart)))
    decls.append(FieldDecl("X_E", _move_field(dd.X_E, chart)))
    decls.append(FieldDecl("X_Estar", _move_field(dd.X_Estar, chart)))
    decls.append(DoubleAlgDecl(f"{subject}_double", cname, "X_E", "X_Estar"))
    for k, v in bialgebroid_verdicts(D).items():
        decls.append(Comment(f"# verdict {k}: {'pass' if v else 'fail'}"))
    decls.append(Comment(f"# residue {{H_E,H_E*}} = {to_text(bracket_eval(dd.bracket, dd.H_E, dd.H_Estar))}"))
    return serialize(document(decls))


def reports_text(reports: Iterable[Report], timing: bool = False) -> str:
    return "".join(r.to_json(timing) + "\n" for r in reports)
