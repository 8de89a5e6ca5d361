"""Lie algebroids in a global frame and their three graded neighbours.

For a frame ``e_i`` of ``E -> M`` with anchor ``a(e_i) = Q_i^a d/dx^a`` and
brackets ``[e_i, e_j] = c_ij^k e_k``:

* ``Pi E`` (coordinates ``xi^i``, parity ``|e_i|+1``, weight 1) carries
  ``Q = xi^i Q_i^a d/dx^a + 1/2 xi^i xi^j Q_ji^k d/dxi^k`` with
  ``Q_ij^k = (-1)^{|e_j|} c_ij^k``;
* ``E*`` (coordinates ``u_i``) carries the even bracket
  ``{u_i, u_j} = c_ij^k u_k``, ``{u_i, x^a} = Q_i^a``;
* ``Pi E*`` (coordinates ``eta_i``) carries the odd bracket
  ``{eta_i, eta_j} = c_ij^k eta_k``, ``{eta_i, x^a} = Q_i^a``.

The signs are the ones for which the derived brackets of ``Q`` give back
``a`` and ``[,]`` exactly and all four presentations accept and reject the
same data; see :func:`sign_table`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Tuple

from .brackets import BracketStructure, jacobi_check
from .errors import ChartMismatch, ParityViolation, WeightViolation
from .geometry import (
    VectorField,
    apply,
    commutator,
    divergence,
    is_homological,
    related_residues,
)
from .report import Report
from .superpoly import (
    EVEN,
    ODD,
    Chart,
    Coordinate,
    SuperPolynomial,
    embed,
    partial_derivative,
    substitute,
    to_text,
)

XI = "xi_"
U = "u_"
ETA = "eta_"


def base_chart(names, name="M") -> Chart:
    return Chart(name, tuple(Coordinate(n, EVEN, (0,)) for n in names), 1)


@dataclass(frozen=True)
class AlgebroidData:
    """Anchor and brackets of a Lie algebroid in a global frame.

    ``anchor[(e, x)]`` is the ``x``-component of ``a(e)``; ``brackets[(e, f)]``
    maps frame names to the coefficients of ``[e, f]``.  Missing entries are
    zero, the opposite order of each bracket is filled in on construction.
    """

    base: Chart
    frame: Tuple[Tuple[str, int], ...]
    anchor: Mapping[Tuple[str, str], SuperPolynomial]
    brackets: Mapping[Tuple[str, str], Mapping[str, SuperPolynomial]]
    name: str = ""

    def __post_init__(self):
        frame = tuple((n, p % 2) for n, p in self.frame)
        object.__setattr__(self, "frame", frame)
        par = dict(frame)
        if len(par) != len(frame):
            raise ValueError("duplicate frame element")
        for c in self.base.coords:
            if c.parity != EVEN or any(c.weight):
                raise WeightViolation(f"base coordinate {c.name!r} must be even of weight 0")
        anchor = {}
        for (e, x), p in self.anchor.items():
            self._check_poly(p)
            self.base.index(x)
            if p:
                if par[e] != EVEN:
                    raise ParityViolation(f"odd frame element {e!r} must have zero anchor")
                anchor[(e, x)] = p
        brackets: Dict[Tuple[str, str], Dict[str, SuperPolynomial]] = {}
        for (e, f), coeffs in self.brackets.items():
            clean = {}
            for g, p in coeffs.items():
                self._check_poly(p)
                if not p:
                    continue
                if (par[e] + par[f] + par[g]) % 2:
                    raise ParityViolation(f"[{e},{f}] cannot have a component along {g!r}")
                clean[g] = p
            sign = 1 if par[e] * par[f] else -1
            for key, val in (((e, f), clean), ((f, e), {g: p * sign for g, p in clean.items()})):
                if key in brackets and brackets[key] != val:
                    raise ParityViolation(f"bracket [{key[0]},{key[1]}] violates graded antisymmetry")
                if val:
                    brackets[key] = val
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "brackets", brackets)

    def _check_poly(self, p):
        if p.chart != self.base:
            raise ChartMismatch(f"algebroid data must live on the base chart {self.base.name!r}")

    @property
    def frame_names(self):
        return [n for n, _ in self.frame]

    def parity(self, e: str) -> int:
        return dict(self.frame)[e]

    def anchor_of(self, e: str, x: str) -> SuperPolynomial:
        return self.anchor.get((e, x), self.base.zero())

    def bracket_of(self, e: str, f: str, g: str) -> SuperPolynomial:
        return self.brackets.get((e, f), {}).get(g, self.base.zero())

    def structure_function(self, e: str, f: str, g: str) -> SuperPolynomial:
        """``Q_ef^g = (-1)^{|f|} c_ef^g``."""
        c = self.bracket_of(e, f, g)
        return -c if self.parity(f) else c

    def __eq__(self, other):
        if not isinstance(other, AlgebroidData):
            return NotImplemented
        return (
            self.base == other.base
            and self.frame == other.frame
            and dict(self.anchor) == dict(other.anchor)
            and {k: dict(v) for k, v in self.brackets.items()} == {k: dict(v) for k, v in other.brackets.items()}
        )

    def __hash__(self):
        return hash((self.base, self.frame))


def from_structure_constants(name, frame, constants: Mapping[Tuple[str, str], Mapping[str, object]], base: Chart | None = None, anchor=None):
    """Algebroid from numeric brackets (a Lie superalgebra when the base is a point)."""
    base = base or base_chart([], "pt")
    brackets = {k: {g: base.const(v) if not isinstance(v, SuperPolynomial) else v for g, v in d.items()} for k, d in constants.items()}
    return AlgebroidData(base, tuple(frame), anchor or {}, brackets, name)


# --- Pi E: the antialgebroid ---------------------------------------------

def pi_chart(A: AlgebroidData, prefix: str = XI, name: str | None = None) -> Chart:
    coords = [Coordinate(c.name, EVEN, (0,)) for c in A.base.coords]
    coords += [Coordinate(prefix + e, (p + 1) % 2, (1,)) for e, p in A.frame]
    return Chart(name or f"Pi{A.name or 'E'}", tuple(coords), 1)


def to_antialgebroid(A: AlgebroidData, prefix: str = XI):
    """The chart of ``Pi E`` and the weight-one field ``Q``."""
    chart = pi_chart(A, prefix)
    xi = {e: chart.var(prefix + e) for e in A.frame_names}
    coeffs: Dict[str, SuperPolynomial] = {}
    for (e, x), p in A.anchor.items():
        coeffs[x] = coeffs.get(x, chart.zero()) + xi[e] * embed(p, chart)
    half = Fraction(1, 2)
    for (e, f), comps in A.brackets.items():
        # the 1/2 xi^e xi^f Q_fe^g term
        for g in comps:
            q = A.structure_function(f, e, g)
            if q:
                term = xi[e] * xi[f] * embed(q, chart) * half
                key = prefix + g
                coeffs[key] = coeffs.get(key, chart.zero()) + term
    return chart, VectorField(chart, coeffs, ODD)


def insertion(chart: Chart, e: str, parity: int, coeffs=None, prefix: str = XI) -> VectorField:
    """``i(u) = (-1)^{|u|} u^i(x) d/dxi^i`` for ``u = sum u^i e_i`` of parity ``parity``."""
    coeffs = coeffs if coeffs is not None else {e: chart.one()}
    sign = -1 if parity else 1
    return VectorField(chart, {prefix + f: embed(p, chart) * sign for f, p in coeffs.items()}, parity + 1)


def from_antialgebroid(chart: Chart, Q: VectorField, prefix: str = XI, name: str = "") -> AlgebroidData:
    """Recover anchor and brackets through the derived brackets of ``Q``.

    ``a(e)f = [[Q, i(e)], f]`` and ``i([e, f]) = (-1)^{|e|} [[Q, i(e)], i(f)]``.
    """
    if Q.chart != chart:
        raise ChartMismatch("field does not live on the given chart")
    w = Q.weight
    if w is not None and w != (1,):
        raise WeightViolation(f"an antialgebroid field has weight (1), got {w}")
    base_names = [c.name for c in chart.coords if c.weight == (0,)]
    fibre = [c for c in chart.coords if c.weight == (1,)]
    if len(base_names) + len(fibre) != len(chart):
        raise WeightViolation("chart weights must be 0 (base) or 1 (fibre)")
    base = base_chart(base_names, "M" if base_names else "pt")
    frame = []
    for c in fibre:
        e = c.name[len(prefix):] if c.name.startswith(prefix) else c.name
        frame.append((e, (c.parity + 1) % 2, c.name))

    def to_base(p: SuperPolynomial, what: str) -> SuperPolynomial:
        for v in p.variables():
            if v not in base:
                raise WeightViolation(f"{what} depends on fibre coordinate {v!r}")
        return embed(p, base) if base_names else base.const(p.constant_term())

    anchor, brackets = {}, {}
    ins = {e: VectorField(chart, {cname: chart.const(-1 if par else 1)}, par + 1) for e, par, cname in frame}
    for e, par, _ in frame:
        D = commutator(Q, ins[e])
        for x in base_names:
            val = apply(D, chart.var(x))
            if val:
                anchor[(e, x)] = to_base(val, f"a({e})")
        for f, pf, _ in frame:
            V = commutator(D, ins[f])
            if par:
                V = -V
            comps = {}
            for g, pg, gname in frame:
                coeff = V[gname]
                if coeff:
                    # i(u) carries (-1)^{|u|}, |u| = |e| + |f|
                    sign = -1 if (par + pf) % 2 else 1
                    comps[g] = to_base(coeff, f"[{e},{f}]") * sign
            for x in base_names:
                if V[x]:
                    raise WeightViolation(f"derived bracket [{e},{f}] is not vertical")
            if comps:
                brackets[(e, f)] = comps
    return AlgebroidData(base, tuple((e, p) for e, p, _ in frame), anchor, brackets, name)


# --- E* and Pi E*: Poisson and Schouten ------------------------------------

def _dual_chart(A: AlgebroidData, prefix: str, shift: int, name: str) -> Chart:
    coords = [Coordinate(c.name, EVEN, (0,)) for c in A.base.coords]
    coords += [Coordinate(prefix + e, (p + shift) % 2, (1,)) for e, p in A.frame]
    return Chart(name, tuple(coords), 1)


def _linear_bracket(A: AlgebroidData, chart: Chart, prefix: str, sigma: int, name: str):
    structure = {}
    for (e, f), comps in A.brackets.items():
        val = chart.zero()
        for g, p in comps.items():
            val = val + embed(p, chart) * chart.var(prefix + g)
        structure[(prefix + e, prefix + f)] = val
    for (e, x), p in A.anchor.items():
        structure[(prefix + e, x)] = embed(p, chart)
    return BracketStructure(chart, structure, sigma, (-1,), name=name)


def to_poisson_dual(A: AlgebroidData, prefix: str = U):
    chart = _dual_chart(A, prefix, 0, f"{A.name or 'E'}*")
    return chart, _linear_bracket(A, chart, prefix, EVEN, f"poisson({A.name})")


def to_schouten_antidual(A: AlgebroidData, prefix: str = ETA):
    chart = _dual_chart(A, prefix, 1, f"Pi{A.name or 'E'}*")
    return chart, _linear_bracket(A, chart, prefix, ODD, f"schouten({A.name})")


def from_linear_bracket(B: BracketStructure, prefix: str, name: str = "") -> AlgebroidData:
    """Inverse of :func:`to_poisson_dual` / :func:`to_schouten_antidual`."""
    chart = B.chart
    base_names = [c.name for c in chart.coords if c.weight == (0,)]
    base = base_chart(base_names, "M" if base_names else "pt")
    shift = B.sigma
    frame = []
    for c in chart.coords:
        if c.weight == (1,):
            e = c.name[len(prefix):] if c.name.startswith(prefix) else c.name
            frame.append((e, (c.parity + shift) % 2, c.name))

    def to_base(p):
        return embed(p, base) if base_names else base.const(p.constant_term())

    anchor, brackets = {}, {}
    for e, _, en in frame:
        for x in base_names:
            p = B[en, x]
            if p:
                anchor[(e, x)] = to_base(p)
        for f, _, fn in frame:
            p = B[en, fn]
            comps = {}
            for g, _, gn in frame:

                coeff = partial_derivative(p, gn)
                if coeff:
                    comps[g] = to_base(coeff)
            if comps:
                brackets[(e, f)] = comps
    return AlgebroidData(base, tuple((e, p) for e, p, _ in frame), anchor, brackets, name)


# --- classical axioms --------------------------------------------------------

def _anchor_apply(A: AlgebroidData, e: str, f: SuperPolynomial) -> SuperPolynomial:

    out = A.base.zero()
    for x in A.base.names:
        q = A.anchor_of(e, x)
        if q:
            out = out + q * partial_derivative(f, x)
    return out


def section_bracket(A: AlgebroidData, s: Mapping[str, SuperPolynomial], t: Mapping[str, SuperPolynomial]):
    """``[s, t]`` for homogeneous sections given as frame-coefficient maps."""
    out: Dict[str, SuperPolynomial] = {}

    def add(g, p):
        if p:
            out[g] = out.get(g, A.base.zero()) + p

    for e, f_ in s.items():
        for h, g_ in t.items():
            # [f e, g h] = f a(e)(g) h + f g [e, h] - (-1)^{|e||h|} g a(h)(f) e
            add(h, f_ * _anchor_apply(A, e, g_))
            for k, c in A.brackets.get((e, h), {}).items():
                add(k, f_ * g_ * c)
            sign = -1 if A.parity(e) * A.parity(h) else 1
            add(e, -(g_ * _anchor_apply(A, h, f_)) * sign)
    return {g: p for g, p in out.items() if p}


def axiom_check(A: AlgebroidData) -> Report:
    """Jacobi identity on frame triples and the anchor morphism property."""
    report = Report("axioms", A.name)
    one = A.base.one()
    names = A.frame_names
    unit = {e: {e: one} for e in names}

    def sub(a, b, sign=1):
        out = dict(a)
        for g, p in b.items():
            out[g] = out.get(g, A.base.zero()) - p * sign
        return {g: p for g, p in out.items() if p}

    for i in names:
        for j in names:
            for k in names:
                lhs = section_bracket(A, unit[i], section_bracket(A, unit[j], unit[k]))
                r1 = section_bracket(A, section_bracket(A, unit[i], unit[j]), unit[k])
                r2 = section_bracket(A, unit[j], section_bracket(A, unit[i], unit[k]))
                sign = -1 if A.parity(i) * A.parity(j) else 1
                res = sub(sub(lhs, r1), r2, sign)
                for g, p in res.items():
                    report.fail("jacobi", (i, j, k, g), p)
    for i in names:
        for j in names:
            br = section_bracket(A, unit[i], unit[j])
            for x in A.base.names:
                lhs = A.base.zero()
                for g, p in br.items():
                    lhs = lhs + p * A.anchor_of(g, x)
                sign = -1 if A.parity(i) * A.parity(j) else 1
                rhs = _anchor_apply(A, i, A.anchor_of(j, x)) - _anchor_apply(A, j, A.anchor_of(i, x)) * sign
                if lhs != rhs:
                    report.fail("anchor", (i, j, x), lhs - rhs)
    return report


def validate_algebroid(A: AlgebroidData) -> Report:
    """Algebroid axioms via ``[Q, Q] = 0`` on ``Pi E``; witnesses are ``[Q,Q]`` coefficients."""
    report = Report("algebroid", A.name)
    chart, Q = to_antialgebroid(A)
    QQ = commutator(Q, Q)
    for c in chart.coords:
        if QQ[c.name]:
            report.fail("[Q,Q]=0", (c.name,), QQ[c.name])
    return report


def four_fold_verdicts(A: AlgebroidData) -> Dict[str, bool]:
    """Validity of ``A`` judged by each of its four presentations."""
    return {
        "homological": is_homological(to_antialgebroid(A)[1]),
        "poisson": jacobi_check(to_poisson_dual(A)[1]).passed,
        "schouten": jacobi_check(to_schouten_antidual(A)[1]).passed,
        "axioms": axiom_check(A).passed,
    }


# --- morphisms and modular class ---------------------------------------------

@dataclass(frozen=True)
class BundleMap:
    """``Phi: E1 -> E2`` over ``phi: M1 -> M2``.

    ``base_map[x2]`` is a polynomial on ``M1``; ``matrix[(e1, e2)]`` is the
    coefficient of ``e2`` in ``Phi(e1)``.
    """

    base_map: Mapping[str, SuperPolynomial]
    matrix: Mapping[Tuple[str, str], SuperPolynomial]

    def then(self, other: "BundleMap", A1: AlgebroidData, A2: AlgebroidData, A3: AlgebroidData) -> "BundleMap":

        base = {x: substitute(p, self.base_map, target=A1.base) for x, p in other.base_map.items()}
        mat = {}
        for e1 in A1.frame_names:
            for e3 in A3.frame_names:
                tot = A1.base.zero()
                for e2 in A2.frame_names:
                    a = self.matrix.get((e1, e2))
                    b = other.matrix.get((e2, e3))
                    if a and b:
                        tot = tot + a * substitute(b, self.base_map, target=A1.base)
                if tot:
                    mat[(e1, e3)] = tot
        return BundleMap(base, mat)


def pi_pullback(Phi: BundleMap, A1: AlgebroidData, A2: AlgebroidData, prefix: str = XI):
    """Pullback of ``Phi^Pi`` on the coordinates of ``Pi E2``."""
    c1 = pi_chart(A1, prefix)
    c2 = pi_chart(A2, prefix)
    pull = {}
    for x in A2.base.names:
        pull[x] = embed(Phi.base_map[x], c1) if x in Phi.base_map else c1.zero()
    for e2, p2 in A2.frame:
        img = c1.zero()
        for e1, p1 in A1.frame:
            m = Phi.matrix.get((e1, e2))
            if m:
                if p1 != p2:
                    raise ParityViolation(f"Phi({e1}) has a component along {e2} of different parity")
                img = img + c1.var(prefix + e1) * embed(m, c1)
        pull[prefix + e2] = img
    return c1, c2, pull


def morphism_check(Phi: BundleMap, A1: AlgebroidData, A2: AlgebroidData) -> Report:
    report = Report("morphism", f"{A1.name}->{A2.name}")
    _, Q1 = to_antialgebroid(A1)
    _, Q2 = to_antialgebroid(A2)
    _, _, pull = pi_pullback(Phi, A1, A2)
    for name, res in related_residues(pull, Q1, Q2):
        report.fail("Q1.phi* = phi*.Q2", (name,), res)
    return report


def modular_representative(A: AlgebroidData) -> SuperPolynomial:
    """Divergence of ``Q`` against the coordinate Berezin volume of ``Pi E``."""
    _, Q = to_antialgebroid(A)
    return divergence(Q)


def modular_check(A: AlgebroidData) -> Report:
    report = Report("modular", A.name)
    _, Q = to_antialgebroid(A)
    div = divergence(Q)
    closed = apply(Q, div)
    report.details["representative"] = to_text(div)
    report.details["vanishes"] = div.is_zero()
    if closed:
        report.fail("Q(div Q)=0", ("div",), closed)
    if not is_homological(Q):
        report.fail("[Q,Q]=0", ("Q",), "not homological")
    return report


def sign_table() -> str:
    """The resolved sign conventions, one per line."""
    lines = [
        "derivatives: left, X(f) = sum_c X^c d_c f",
        "bracket extension: {f,g} = sum (f <-d_A) P^AB (d_B-> g)",
        "Q_ij^k = (-1)^{|e_j|} c_ij^k, where [e_i,e_j] = c_ij^k e_k",
        "Q on Pi E = xi^i Q_i^a d/dx^a + 1/2 xi^i xi^j Q_ji^k d/dxi^k",
        "i(u) = (-1)^{|u|} u^i d/dxi^i",
        "a(u) f = [[Q, i(u)], f];  i([u,v]) = (-1)^{|u|} [[Q, i(u)], i(v)]",
        "E*: {u_i, u_j} = +c_ij^k u_k;  {u_i, x^a} = +Q_i^a (so {x^a, u_i} = -Q_i^a)",
        "Pi E*: {eta_i, eta_j} = +c_ij^k eta_k;  {eta_i, x^a} = +Q_i^a",
        "T*M canonical: {p_c, c} = 1;  Hamiltonian lift H_X = X^c p_c, X_H = {H, .}",
        "div X = sum_c (-1)^{|c|(|X|+1)} d_c X^c (+ X(f)/f for density f)",
    ]
    return "\n".join(lines)
