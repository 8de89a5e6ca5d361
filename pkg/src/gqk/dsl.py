"""Line-oriented text format for charts, structures and check directives.

Statements start at the beginning of a line; brace blocks may span lines
and separate their entries by newlines or ``;``.  ``#`` starts a comment.
A document serializes back to a canonical text which parses to an equal
document; standalone comment lines and blank lines are kept.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from .algebroid import AlgebroidData, BundleMap
from .brackets import BracketStructure
from .doubles import DoubleVectorBundle, as_matrix, identity_base_map, identity_matrix, primed, primed_chart
from .drinfeld import BialgebroidData
from .errors import GQKError, ParseError
from .geometry import Transition, VectorField
from .superpoly import EVEN, ODD, Chart, Coordinate, SuperPolynomial, _fmt_coeff, to_text

CHECK_KINDS = (
    "algebroid",
    "jacobi",
    "bialgebroid",
    "dvb",
    "pairing",
    "double",
    "drinfeld",
    "modular",
    "morphism",
    "transition",
    "homological",
)

PARITY = {"even": EVEN, "odd": ODD}
PARITY_NAME = {EVEN: "even", ODD: "odd"}


# tokens ----------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<deriv>(?:d/d|∂/∂)[A-Za-z_][A-Za-z0-9_']*)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<arrow>->|→)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[(){}\[\],:;=+\-*^|])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> List[Token]:
    out: List[Token] = []
    line, line_start, pos = 1, 0, 0
    at_line_start = True
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            out.append(Token("newline", text, line, col))
            line += 1
            line_start = m.end()
            at_line_start = True
        elif kind == "comment":
            # keep comment-only lines, drop trailing comments
            if at_line_start:
                out.append(Token("comment", text, line, col))
        elif kind != "ws":
            if kind == "deriv":
                text = text[3:]  # both spellings have a three-character prefix
            out.append(Token(kind, text, line, col))
            at_line_start = False
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# declarations -------------------------------------------------------------------

@dataclass
class Decl:
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass
class Comment(Decl):
    text: str


@dataclass
class Blank(Decl):
    pass


@dataclass
class ChartDecl(Decl):
    name: str
    multiplicity: int


@dataclass
class CoordDecl(Decl):
    name: str
    parity: int
    weight: Tuple[int, ...]
    chart: str


@dataclass
class PolyDecl(Decl):
    name: str
    chart: str
    value: SuperPolynomial


@dataclass
class TransitionDecl(Decl):
    name: str
    value: Transition


@dataclass
class AlgebroidDecl(Decl):
    name: str
    value: AlgebroidData


@dataclass
class BialgebroidDecl(Decl):
    name: str
    first: str
    second: str
    value: BialgebroidData


@dataclass
class DVBDecl(Decl):
    name: str
    value: DoubleVectorBundle


@dataclass
class FieldDecl(Decl):
    name: str
    value: VectorField


@dataclass
class BracketDecl(Decl):
    name: str
    value: BracketStructure


@dataclass
class MorphismDecl(Decl):
    name: str
    source: str
    target: str
    value: BundleMap


@dataclass
class DoubleAlgDecl(Decl):
    name: str
    chart: str
    first: str
    second: str


@dataclass
class CheckDecl(Decl):
    kind: str
    subject: str


@dataclass
class Document:
    decls: List[Decl] = field(default_factory=list)
    charts: Dict[str, Chart] = field(default_factory=dict, compare=False)
    objects: Dict[str, Decl] = field(default_factory=dict, compare=False)

    def __getitem__(self, name: str):
        decl = self.objects[name]
        return getattr(decl, "value", decl)

    def checks(self) -> List[CheckDecl]:
        return [d for d in self.decls if isinstance(d, CheckDecl)]

    def declaration(self, name: str) -> Decl:
        return self.objects[name]


# linear combinations used while evaluating expressions -------------------------------

class _Lin:
    """Polynomial coefficients of formal generators (``None`` is the scalar part)."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = {k: v for k, v in parts.items() if v}

    def is_scalar(self):
        return all(k is None for k in self.parts)

    def __add__(self, other):
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out[k] + v if k in out else v
        return _Lin(out)

    def __neg__(self):
        return _Lin({k: -v for k, v in self.parts.items()})


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0
        self.doc = Document()
        self.pending: Dict[str, List[Coordinate]] = {}
        self.multiplicity: Dict[str, int] = {}
        self.chart_order: List[str] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            got = self.tok.text or self.tok.kind
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.next()

    def keyword(self, word: str) -> Token:
        return self.expect("ident", word)

    def punct(self, p: str) -> Token:
        if p == "->":
            return self.expect("arrow")
        return self.expect("punct", p)

    def at_punct(self, p: str) -> bool:
        return self.at("punct", p)

    def ident(self) -> Token:
        return self.expect("ident")

    def skip_separators(self):
        while self.at("newline") or self.at("comment") or self.at_punct(";"):
            self.next()

    def end_statement(self):
        if self.at("eof"):
            return
        self.expect("newline")

    # names
    def define(self, decl, tok: Token):
        name = decl.name
        if name in self.doc.objects or name in self.pending:
            raise self.error(f"{name!r} is already defined", tok)
        self.doc.objects[name] = decl

    def lookup(self, tok: Token, cls, what: str):
        decl = self.doc.objects.get(tok.text)
        if decl is None or not isinstance(decl, cls):
            raise self.error(f"undeclared {what} {tok.text!r}", tok)
        return decl

    def chart(self, tok: Token) -> Chart:
        name = tok.text
        if name in self.doc.charts:
            return self.doc.charts[name]
        if name not in self.pending:
            raise self.error(f"undeclared chart {name!r}", tok)
        chart = Chart(name, tuple(self.pending.pop(name)), self.multiplicity[name])
        self.doc.charts[name] = chart
        return chart

    # statements
    def parse(self) -> Document:
        while not self.at("eof"):
            t = self.tok
            if t.kind == "newline":
                self.next()
                self.doc.decls.append(Blank(line=t.line))
                continue
            if t.kind == "comment":
                self.next()
                self.doc.decls.append(Comment(t.text.rstrip(), line=t.line))
                self.end_statement()
                continue
            if t.kind != "ident":
                raise self.error(f"expected a statement, found {t.text!r}")
            handler = getattr(self, "stmt_" + t.text, None)
            if handler is None:
                raise self.error(f"unknown statement {t.text!r}")
            self.next()
            decl = handler(t)
            decl.line = t.line
            self.doc.decls.append(decl)
            self.end_statement()
        return self.doc

    def stmt_chart(self, kw):
        name = self.ident()
        self.keyword("multiplicity")
        k = int(self.expect("number").text)
        decl = ChartDecl(name.text, k)
        if name.text in self.doc.objects or name.text in self.pending or name.text in self.doc.charts:
            raise self.error(f"{name.text!r} is already defined", name)
        self.pending[name.text] = []
        self.multiplicity[name.text] = k
        self.chart_order.append(name.text)
        self.doc.objects[name.text] = decl
        return decl

    def stmt_coord(self, kw):
        name = self.ident()
        self.keyword("parity")
        par = self.parity()
        self.keyword("weight")
        wtok = self.tok
        weight = self.int_tuple()
        self.keyword("in")
        ctok = self.ident()
        if ctok.text in self.doc.charts:
            raise self.error(f"chart {ctok.text!r} is already in use; declare coordinates first", ctok)
        if ctok.text not in self.pending:
            raise self.error(f"undeclared chart {ctok.text!r}", ctok)
        if len(weight) != self.multiplicity[ctok.text]:
            raise self.error(f"weight {weight} does not match multiplicity {self.multiplicity[ctok.text]}", wtok)
        if any(c.name == name.text for c in self.pending[ctok.text]):
            raise self.error(f"coordinate {name.text!r} already declared in {ctok.text!r}", name)
        self.pending[ctok.text].append(Coordinate(name.text, par, weight))
        return CoordDecl(name.text, par, weight, ctok.text)

    def stmt_poly(self, kw):
        name = self.ident()
        if self.at("ident", "in"):
            self.next()
            chart = self.chart(self.ident())
        else:
            chart = self.infer_chart()
        self.punct("=")
        value = self.poly_expr(chart)
        decl = PolyDecl(name.text, chart.name, value)
        self.define(decl, name)
        return decl

    def stmt_transition(self, kw):
        name = self.ident()
        self.punct(":")
        src = self.chart(self.ident())
        self.punct("->")
        tgt = self.chart(self.ident())
        fwd = self.assignments(tgt, src)
        self.keyword("inverse")
        bwd = self.assignments(src, tgt)
        decl = TransitionDecl(name.text, Transition(src, tgt, fwd, bwd, name.text))
        self.define(decl, name)
        return decl

    def stmt_algebroid(self, kw):
        name = self.ident()
        self.keyword("over")
        base = self.chart(self.ident())
        self.keyword("frame")
        self.punct("(")
        frame = []
        while True:
            e = self.ident()
            self.punct(":")
            frame.append((e.text, self.parity()))
            if self.at_punct(","):
                self.next()
                continue
            break
        self.punct(")")
        frame_names = [e for e, _ in frame]
        anchor, brackets = {}, {}
        if self.at("ident", "anchor"):
            self.next()
            self.block_open()
            while not self.block_close():
                etok = self.ident()
                if etok.text not in frame_names:
                    raise self.error(f"{etok.text!r} is not a frame element", etok)
                self.punct("->")
                gens = {("d", c.name): c.name for c in base.coords}
                lin = self.linear(base, gens)
                for gen, p in lin.parts.items():
                    if gen is None:
                        raise self.error("anchor must be a combination of d/dx terms", etok)
                    anchor[(etok.text, gens[gen])] = p
                self.separator()
        if self.at("ident", "bracket"):
            self.next()
            self.block_open()
            while not self.block_close():
                self.punct("[")
                a = self.ident()
                self.punct(",")
                b = self.ident()
                self.punct("]")
                for t in (a, b):
                    if t.text not in frame_names:
                        raise self.error(f"{t.text!r} is not a frame element", t)
                self.punct("=")
                gens = {("e", e): e for e in frame_names}
                lin = self.linear(base, gens)
                comps = {}
                for gen, p in lin.parts.items():
                    if gen is None:
                        raise self.error("bracket must be a combination of frame elements", a)
                    comps[gens[gen]] = p
                brackets[(a.text, b.text)] = comps
                self.separator()
        try:
            value = AlgebroidData(base, tuple(frame), anchor, brackets, name.text)
        except (GQKError, ValueError) as exc:
            raise self.error(str(exc), name)
        decl = AlgebroidDecl(name.text, value)
        self.define(decl, name)
        return decl

    def stmt_bialgebroid(self, kw):
        name = self.ident()
        self.punct("=")
        self.punct("(")
        a = self.ident()
        self.punct(",")
        b = self.ident()
        self.punct(")")
        A = self.lookup(a, AlgebroidDecl, "algebroid").value
        B = self.lookup(b, AlgebroidDecl, "algebroid").value
        try:
            value = BialgebroidData(A, B, name.text)
        except GQKError as exc:
            raise self.error(str(exc), name)
        decl = BialgebroidDecl(name.text, a.text, b.text, value)
        self.define(decl, name)
        return decl

    def stmt_dvb(self, kw):
        name = self.ident()
        self.keyword("over")
        base = self.chart(self.ident())
        P = primed_chart(base)
        roles: Dict[str, Tuple[str, ...]] = {}
        blocks: Dict[str, Any] = {}
        base_fwd, base_bwd = {}, {}
        mix_entries = []
        self.block_open()
        while not self.block_close():
            t = self.ident()
            key = t.text
            if key in ("u", "w", "z"):
                roles[key] = self.name_list()
            elif key == "base":
                x = self.ident()
                if x.text not in base:
                    raise self.error(f"{x.text!r} is not a base coordinate", x)
                self.punct("=")
                base_fwd[x.text] = self.poly_expr(P)
            elif key == "inverse":
                x = self.ident()
                if x.text not in P:
                    raise self.error(f"{x.text!r} is not a primed base coordinate", x)
                self.punct("=")
                base_bwd[x.text] = self.poly_expr(base)
            elif key in ("Tu", "Tu_inv", "Tw", "Tw_inv", "Tz", "Tz_inv"):
                self.punct("=")
                blocks[key] = (t, self.matrix(P))
            elif key == "mix":
                self.punct("(")
                i = self.ident()
                self.punct(",")
                a = self.ident()
                self.punct(",")
                m = self.ident()
                self.punct(")")
                self.punct("=")
                mix_entries.append(((i, a, m), self.poly_expr(P)))
            else:
                raise self.error(f"unknown dvb entry {key!r}", t)
            self.separator()
        for r in ("u", "w", "z"):
            if r not in roles:
                raise self.error(f"dvb {name.text!r} needs a '{r}' list", name)
        u, w, z = roles["u"], roles["w"], roles["z"]
        sizes = {"Tu": len(u), "Tw": len(w), "Tz": len(z)}
        mats = {}
        for key, n in sizes.items():
            for k in (key, key + "_inv"):
                if k in blocks:
                    t, M = blocks[k]
                    if len(M) != n or any(len(row) != n for row in M):
                        raise self.error(f"{k} must be {n}x{n}", t)
                    mats[k] = M
                else:
                    mats[k] = identity_matrix(P, n)
        mix = [[[P.zero() for _ in z] for _ in w] for _ in u]
        for (i, a, m), p in mix_entries:
            for t, names in ((i, u), (a, w), (m, z)):
                if t.text not in names:
                    raise self.error(f"{t.text!r} is not in the right coordinate list", t)
            mix[u.index(i.text)][w.index(a.text)][z.index(m.text)] = p
        mix = tuple(tuple(tuple(r) for r in plane) for plane in mix)
        if base_fwd or base_bwd:
            idf, idb = identity_base_map(base)
            fwd = {x: base_fwd.get(x, idf[x]) for x in base.names}
            bwd = {x: base_bwd.get(x, idb[x]) for x in P.names}
        else:
            fwd = bwd = None
        value = DoubleVectorBundle(
            base, u, w, z, mats["Tu"], mats["Tu_inv"], mats["Tw"], mats["Tw_inv"], mats["Tz"], mats["Tz_inv"],
            mix, fwd, bwd, name.text,
        )
        decl = DVBDecl(name.text, value)
        self.define(decl, name)
        return decl

    def stmt_field(self, kw):
        name = self.ident()
        self.keyword("on")
        chart = self.chart(self.ident())
        self.keyword("parity")
        par = self.parity()
        where = {}
        coeffs = self.assignments(chart, chart, where)
        for c, p in coeffs.items():
            # report a coefficient of the wrong parity at its own line
            try:
                VectorField(chart, {c: p}, par)
            except GQKError as exc:
                raise self.error(str(exc), where[c])
        try:
            value = VectorField(chart, coeffs, par)
        except GQKError as exc:
            raise self.error(str(exc), name)
        decl = FieldDecl(name.text, value)
        self.define(decl, name)
        return decl

    def stmt_bracket(self, kw):
        name = self.ident()
        self.keyword("on")
        chart = self.chart(self.ident())
        self.keyword("parity")
        par = self.parity()
        weight = None
        if self.at("ident", "weight"):
            self.next()
            weight = self.int_tuple()
        structure = {}
        self.block_open()
        while not self.block_close():
            self.punct("[")
            a = self.coord_name(chart)
            self.punct(",")
            b = self.coord_name(chart)
            self.punct("]")
            self.punct("=")
            structure[(a, b)] = self.poly_expr(chart)
            self.separator()
        try:
            value = BracketStructure(chart, structure, par, weight, name.text)
        except GQKError as exc:
            raise self.error(str(exc), name)
        decl = BracketDecl(name.text, value)
        self.define(decl, name)
        return decl

    def stmt_morphism(self, kw):
        name = self.ident()
        self.punct(":")
        a = self.ident()
        self.punct("->")
        b = self.ident()
        A = self.lookup(a, AlgebroidDecl, "algebroid").value
        B = self.lookup(b, AlgebroidDecl, "algebroid").value
        base_map, matrix = {}, {}
        self.block_open()
        while not self.block_close():
            if self.at("ident", "base"):
                self.next()
                x = self.ident()
                if x.text not in B.base:
                    raise self.error(f"{x.text!r} is not a coordinate of the target base", x)
                self.punct("=")
                base_map[x.text] = self.poly_expr(A.base)
            else:
                e = self.ident()
                self.punct("->")
                f = self.ident()
                if e.text not in A.frame_names:
                    raise self.error(f"{e.text!r} is not a frame element of {a.text!r}", e)
                if f.text not in B.frame_names:
                    raise self.error(f"{f.text!r} is not a frame element of {b.text!r}", f)
                self.punct("=")
                matrix[(e.text, f.text)] = self.poly_expr(A.base)
            self.separator()
        decl = MorphismDecl(name.text, a.text, b.text, BundleMap(base_map, matrix))
        self.define(decl, name)
        return decl

    def stmt_doublealg(self, kw):
        name = self.ident()
        self.keyword("on")
        ctok = self.ident()
        chart = self.chart(ctok)
        self.punct("(")
        a = self.ident()
        self.punct(",")
        b = self.ident()
        self.punct(")")
        for t in (a, b):
            f = self.lookup(t, FieldDecl, "field")
            if f.value.chart != chart:
                raise self.error(f"field {t.text!r} is not on chart {chart.name!r}", t)
        decl = DoubleAlgDecl(name.text, chart.name, a.text, b.text)
        self.define(decl, name)
        return decl

    def stmt_check(self, kw):
        k = self.ident()
        if k.text not in CHECK_KINDS:
            raise self.error(f"unknown check kind {k.text!r}", k)
        subject = self.ident()
        if subject.text not in self.doc.objects:
            raise self.error(f"undeclared name {subject.text!r}", subject)
        return CheckDecl(k.text, subject.text)

    # pieces
    def parity(self) -> int:
        t = self.ident()
        if t.text not in PARITY:
            raise self.error("parity must be 'even' or 'odd'", t)
        return PARITY[t.text]

    def int_tuple(self) -> Tuple[int, ...]:
        self.punct("(")
        vals = []
        while True:
            neg = False
            if self.at_punct("-"):
                self.next()
                neg = True
            n = int(self.expect("number").text)
            vals.append(-n if neg else n)
            if self.at_punct(","):
                self.next()
                continue
            break
        self.punct(")")
        return tuple(vals)

    def name_list(self) -> Tuple[str, ...]:
        self.punct("(")
        names = []
        if not self.at_punct(")"):
            while True:
                names.append(self.ident().text)
                if self.at_punct(","):
                    self.next()
                    continue
                break
        self.punct(")")
        return tuple(names)

    def block_open(self):
        self.punct("{")
        self.skip_separators()

    def block_close(self) -> bool:
        self.skip_separators()
        if self.at_punct("}"):
            self.next()
            return True
        if self.at("eof"):
            raise self.error("unterminated block")
        return False

    def separator(self):
        if self.at_punct("}"):
            return
        if self.at("newline") or self.at_punct(";"):
            return
        raise self.error(f"expected end of entry, found {self.tok.text!r}")

    def coord_name(self, chart: Chart) -> str:
        t = self.ident()
        if t.text not in chart:
            raise self.error(f"undeclared coordinate {t.text!r} in chart {chart.name!r}", t)
        return t.text

    def assignments(self, lhs_chart: Chart, rhs_chart: Chart, where=None) -> Dict[str, SuperPolynomial]:
        out = {}
        self.block_open()
        while not self.block_close():
            t = self.ident()
            if t.text not in lhs_chart:
                raise self.error(f"undeclared coordinate {t.text!r} in chart {lhs_chart.name!r}", t)
            if t.text in out:
                raise self.error(f"{t.text!r} assigned twice", t)
            self.punct("=")
            out[t.text] = self.poly_expr(rhs_chart)
            if where is not None:
                where[t.text] = t
            self.separator()
        return out

    def matrix(self, chart: Chart):
        self.punct("[")
        rows = []
        while True:
            self.punct("[")
            row = []
            while True:
                row.append(self.poly_expr(chart))
                if self.at_punct(","):
                    self.next()
                    continue
                break
            self.punct("]")
            rows.append(row)
            if self.at_punct(","):
                self.next()
                continue
            break
        self.punct("]")
        return as_matrix(rows, chart)

    def infer_chart(self) -> Chart:
        """Latest declared chart holding every identifier of the expression."""
        j = self.i
        names: List[Token] = []
        while self.tokens[j].kind not in ("newline", "eof"):
            t = self.tokens[j]
            if t.kind == "ident" and not isinstance(self.doc.objects.get(t.text), PolyDecl):
                names.append(t)
            j += 1
        if not names:
            raise self.error("cannot infer the chart of a constant; write 'poly NAME in CHART = ...'")
        for cname in reversed(self.chart_order):
            if all(self._chart_has(cname, t.text) for t in names):
                return self.chart(Token("ident", cname, names[0].line, names[0].col))
        for cname in reversed(self.chart_order):
            if self._chart_has(cname, names[0].text):
                return self.chart(Token("ident", cname, names[0].line, names[0].col))
        raise self.error(f"undeclared coordinate {names[0].text!r}", names[0])

    def _chart_has(self, cname: str, coord: str) -> bool:
        if cname in self.doc.charts:
            return coord in self.doc.charts[cname]
        return any(c.name == coord for c in self.pending.get(cname, ()))

    # expressions
    def poly_expr(self, chart: Chart) -> SuperPolynomial:
        start = self.tok
        lin = self.linear(chart, {})
        if not lin.is_scalar():
            raise self.error("expected a polynomial", start)
        return lin.parts.get(None, chart.zero())

    def linear(self, chart: Chart, gens) -> _Lin:
        """``expr := term (('+'|'-') term)*`` evaluated in ``chart``."""
        val = self.term(chart, gens)
        while self.at_punct("+") or self.at_punct("-"):
            op = self.next().text
            rhs = self.term(chart, gens)
            val = val + (rhs if op == "+" else -rhs)
        return val

    def term(self, chart, gens) -> _Lin:
        val = self.unary(chart, gens)
        while self.at_punct("*"):
            t = self.next()
            rhs = self.unary(chart, gens)
            val = self.mul(val, rhs, t)
        return val

    def mul(self, a: _Lin, b: _Lin, tok: Token) -> _Lin:
        if a.is_scalar():
            s, other = a.parts.get(None), b
        elif b.is_scalar():
            s, other = b.parts.get(None), a
        else:
            raise self.error("product of two generators is not linear", tok)
        if s is None:
            return _Lin({})
        if a.is_scalar():
            return _Lin({k: s * v for k, v in other.parts.items()})
        return _Lin({k: v * s for k, v in other.parts.items()})

    def unary(self, chart, gens) -> _Lin:
        if self.at_punct("-"):
            self.next()
            return -self.unary(chart, gens)
        if self.at_punct("+"):
            self.next()
            return self.unary(chart, gens)
        return self.power(chart, gens)

    def power(self, chart, gens) -> _Lin:
        base_tok = self.tok
        val = self.atom(chart, gens)
        if self.at_punct("^"):
            self.next()
            n = self.expect("number")
            if "/" in n.text:
                raise self.error("exponents must be nonnegative integers", n)
            if not val.is_scalar():
                raise self.error("cannot raise a generator to a power", base_tok)
            p = val.parts.get(None, chart.zero())
            val = _Lin({None: p ** int(n.text)})
        return val

    def atom(self, chart, gens) -> _Lin:
        t = self.tok
        if t.kind == "number":
            self.next()
            return _Lin({None: chart.const(Fraction(t.text))})
        if t.kind == "deriv":
            self.next()
            key = ("d", t.text)
            if key not in gens:
                raise self.error(f"d/d{t.text} is not allowed here", t)
            return _Lin({key: chart.one()})
        if t.kind == "ident":
            self.next()
            if ("e", t.text) in gens:
                return _Lin({("e", t.text): chart.one()})
            if t.text in chart:
                return _Lin({None: chart.var(t.text)})
            decl = self.doc.objects.get(t.text)
            if isinstance(decl, PolyDecl) and decl.value.chart == chart:
                return _Lin({None: decl.value})
            raise self.error(f"undeclared coordinate {t.text!r} in chart {chart.name!r}", t)
        if self.at_punct("("):
            self.next()
            val = self.linear(chart, gens)
            self.punct(")")
            return val
        raise self.error(f"unexpected {t.text or t.kind!r} in expression")


def parse(source: str) -> Document:
    """Parse a document; errors carry line and column."""
    return _Parser(source).parse()


def parse_polynomial(text: str, chart: Chart) -> SuperPolynomial:
    """Read a canonical residue back as a polynomial on ``chart``."""
    p = _Parser(text)
    value = p.poly_expr(chart)
    p.skip_separators()
    if not p.at("eof"):
        raise p.error(f"unexpected {p.tok.text!r}")
    return value


# serialization -------------------------------------------------------------------

def lin_text(items) -> str:
    """``c1*g1 + c2*g2``; non-constant coefficients are parenthesized."""
    parts = []
    for gen, p in items:
        if not p:
            continue
        if set(p.terms) == {(p.chart.unit_key, 0)}:
            c = p.constant_term()
            if c == 1:
                s = gen
            elif c == -1:
                s = "-" + gen
            else:
                s = f"{'-' if c < 0 else ''}{_fmt_coeff(abs(c))}*{gen}"
        else:
            s = f"({to_text(p)})*{gen}"
        parts.append(s)
    if not parts:
        return "0"
    out = parts[0]
    for s in parts[1:]:
        out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
    return out


def _matrix_text(M) -> str:
    return "[" + ", ".join("[" + ", ".join(to_text(v) for v in row) + "]" for row in M) + "]"


def _block(header: str, lines, tail: str = "") -> List[str]:
    return [header + " {"] + ["  " + ln for ln in lines] + ["}" + tail]


class _Serializer:
    def __init__(self, doc: Document):
        self.doc = doc
        self.chart_order: List[str] = []
        self.coords: Dict[str, List[str]] = {}

    def run(self) -> str:
        out: List[str] = []
        for d in self.doc.decls:
            out.extend(self.decl(d))
        return "".join(line + "\n" for line in out)

    def decl(self, d) -> List[str]:
        if isinstance(d, Blank):
            return [""]
        if isinstance(d, Comment):
            return [d.text]
        if isinstance(d, ChartDecl):
            self.chart_order.append(d.name)
            self.coords[d.name] = []
            return [f"chart {d.name} multiplicity {d.multiplicity}"]
        if isinstance(d, CoordDecl):
            self.coords[d.chart].append(d.name)
            w = ",".join(str(x) for x in d.weight)
            return [f"coord {d.name} parity {PARITY_NAME[d.parity]} weight ({w}) in {d.chart}"]
        if isinstance(d, PolyDecl):
            text = to_text(d.value)
            names = [c.name for c in d.value.chart.coords if c.name in d.value.variables()] if d.value else []
            inferred = None
            if names:
                for c in reversed(self.chart_order):
                    if all(n in self.coords[c] for n in names):
                        inferred = c
                        break
            if inferred == d.chart:
                return [f"poly {d.name} = {text}"]
            return [f"poly {d.name} in {d.chart} = {text}"]
        if isinstance(d, TransitionDecl):
            t = d.value
            fwd = [f"{c.name} = {to_text(t.forward[c.name])}" for c in t.target.coords if c.name in t.forward]
            bwd = [f"{c.name} = {to_text(t.backward[c.name])}" for c in t.source.coords if c.name in t.backward]
            head = _block(f"transition {d.name}: {t.source.name} -> {t.target.name}", fwd)
            inv = _block("} inverse", bwd)
            return head[:-1] + inv
        if isinstance(d, AlgebroidDecl):
            A = d.value
            frame = ", ".join(f"{e}:{PARITY_NAME[p]}" for e, p in A.frame)
            anchor = []
            for e in A.frame_names:
                items = [(f"d/d{x}", A.anchor_of(e, x)) for x in A.base.names]
                if any(p for _, p in items):
                    anchor.append(f"{e} -> {lin_text(items)}")
            brackets = []
            names = A.frame_names
            for i, e in enumerate(names):
                for f in names[i:]:
                    items = [(g, A.bracket_of(e, f, g)) for g in names]
                    if any(p for _, p in items):
                        brackets.append(f"[{e},{f}] = {lin_text(items)}")
            head = _block(f"algebroid {d.name} over {A.base.name} frame ({frame}) anchor", anchor)
            return head[:-1] + _block("} bracket", brackets)
        if isinstance(d, BialgebroidDecl):
            return [f"bialgebroid {d.name} = ({d.first}, {d.second})"]
        if isinstance(d, DVBDecl):
            D = d.value
            lines = [f"{r} ({', '.join(names)})" for r, names in (("u", D.u), ("w", D.w), ("z", D.z))]
            idf, idb = identity_base_map(D.base)
            if dict(D.base_forward) != idf or dict(D.base_backward) != idb:
                lines += [f"base {x} = {to_text(D.base_forward[x])}" for x in D.base.names]
                lines += [f"inverse {x}' = {to_text(D.base_backward[primed(x)])}" for x in D.base.names]
            for key in ("Tu", "Tu_inv", "Tw", "Tw_inv", "Tz", "Tz_inv"):
                lines.append(f"{key} = {_matrix_text(getattr(D, key))}")
            for i, un in enumerate(D.u):
                for a, wn in enumerate(D.w):
                    for m, zn in enumerate(D.z):
                        t = D.Tmix[i][a][m]
                        if t:
                            lines.append(f"mix ({un}, {wn}, {zn}) = {to_text(t)}")
            return _block(f"dvb {d.name} over {D.base.name}", lines)
        if isinstance(d, FieldDecl):
            X = d.value
            lines = [f"{c.name} = {to_text(X.coeffs[c.name])}" for c in X.chart.coords if c.name in X.coeffs]
            return _block(f"field {d.name} on {X.chart.name} parity {PARITY_NAME[X.parity]}", lines)
        if isinstance(d, BracketDecl):
            B = d.value
            head = f"bracket {d.name} on {B.chart.name} parity {PARITY_NAME[B.sigma]}"
            if B.weight is not None:
                head += " weight (" + ",".join(str(x) for x in B.weight) + ")"
            idx = B.chart.index
            pairs = sorted(B.table(), key=lambda k: (idx(k[0]), idx(k[1])))
            lines = [f"[{a},{b}] = {to_text(B.structure[(a, b)])}" for a, b in pairs]
            return _block(head, lines)
        if isinstance(d, MorphismDecl):
            Phi = d.value
            A = self.doc[d.source]
            B = self.doc[d.target]
            lines = [f"base {x} = {to_text(Phi.base_map[x])}" for x in B.base.names if x in Phi.base_map]
            for e in A.frame_names:
                for f in B.frame_names:
                    p = Phi.matrix.get((e, f))
                    if p:
                        lines.append(f"{e} -> {f} = {to_text(p)}")
            return _block(f"morphism {d.name}: {d.source} -> {d.target}", lines)
        if isinstance(d, DoubleAlgDecl):
            return [f"doublealg {d.name} on {d.chart} ({d.first}, {d.second})"]
        if isinstance(d, CheckDecl):
            return [f"check {d.kind} {d.subject}"]
        raise TypeError(f"cannot serialize {type(d).__name__}")


def serialize(doc: Document) -> str:
    return _Serializer(doc).run()


# building documents from objects ------------------------------------------------------

def chart_decls(chart: Chart) -> List[Decl]:
    out: List[Decl] = [ChartDecl(chart.name, chart.multiplicity)]
    out += [CoordDecl(c.name, c.parity, c.weight, chart.name) for c in chart.coords]
    return out


def document(decls) -> Document:
    """Assemble a document from declarations, registering names and charts."""
    doc = Document()
    pending: Dict[str, List[Coordinate]] = {}
    mult: Dict[str, int] = {}
    for d in decls:
        doc.decls.append(d)
        if isinstance(d, ChartDecl):
            pending[d.name] = []
            mult[d.name] = d.multiplicity
            doc.objects[d.name] = d
        elif isinstance(d, CoordDecl):
            pending[d.chart].append(Coordinate(d.name, d.parity, d.weight))
            doc.charts[d.chart] = Chart(d.chart, tuple(pending[d.chart]), mult[d.chart])
        elif hasattr(d, "name"):
            doc.objects[d.name] = d
    for name, coords in pending.items():
        doc.charts.setdefault(name, Chart(name, tuple(coords), mult[name]))
    return doc
