"""Even (Poisson) and odd (Schouten) brackets given by structure functions.

A bracket of parity ``sigma`` is extended from coordinates by

    {f, g} = sum_{A,B} (f <-d_A) P^{AB} (d_B-> g)

with a right derivative in the first slot and a left derivative in the
second.  This makes graded antisymmetry and both Leibniz rules hold with no
further sign bookkeeping:

    {g, f} = -(-1)^{(|f|+s)(|g|+s)} {f, g}
    {f, gh} = {f, g} h + (-1)^{(|f|+s)|g|} g {f, h}
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Dict, Mapping, Tuple

from .errors import ChartMismatch, ParityViolation, WeightViolation
from .geometry import VectorField, apply, cotangent_chart
from .report import Report
from .superpoly import (
    EVEN,
    MIXED,
    Chart,
    SuperPolynomial,
    embed,
    parity_of,
    partial_derivative,
    right_derivative,
    to_text,
    weight_of,
)


def _pair_sign(chart: Chart, a: str, b: str, sigma: int) -> int:
    pa = (chart.coord(a).parity + sigma) % 2
    pb = (chart.coord(b).parity + sigma) % 2
    return 1 if pa * pb else -1  # P^{BA} = sign * P^{AB}


class BracketStructure:
    """Bracket of parity ``sigma`` defined by ``{A, B} = P^{AB}`` on coordinates.

    ``structure`` may list each unordered pair once; the opposite order is
    filled in by graded antisymmetry (and checked if both are given).
    """

    def __init__(self, chart: Chart, structure: Mapping[Tuple[str, str], SuperPolynomial], sigma: int = EVEN, weight=None, name: str = ""):
        self.chart = chart
        self.sigma = sigma % 2
        self.weight = tuple(weight) if weight is not None else None
        self.name = name
        full: Dict[Tuple[str, str], SuperPolynomial] = {}
        for (a, b), p in structure.items():
            if p.chart != chart:
                raise ChartMismatch(f"structure function {{{a},{b}}} is on chart {p.chart.name!r}")
            if not p:
                continue
            par = parity_of(p)
            expected = (chart.coord(a).parity + chart.coord(b).parity + self.sigma) % 2
            if par != expected:
                raise ParityViolation(f"{{{a},{b}}} = {to_text(p)} must have parity {expected}")
            if self.weight is not None:
                w = weight_of(p)
                want = tuple(x + y + z for x, y, z in zip(chart.coord(a).weight, chart.coord(b).weight, self.weight))
                if w != want:
                    raise WeightViolation(f"{{{a},{b}}} = {to_text(p)} must have weight {want}")
            opposite = p * _pair_sign(chart, a, b, self.sigma)
            for key, val in (((a, b), p), ((b, a), opposite)):
                if key in full and full[key] != val:
                    raise ParityViolation(f"structure {{{key[0]},{key[1]}}} violates graded antisymmetry")
                full[key] = val
        self.structure = full

    def __getitem__(self, pair) -> SuperPolynomial:
        return self.structure.get(tuple(pair), self.chart.zero())

    def __call__(self, f, g):
        return bracket_eval(self, f, g)

    def __eq__(self, other):
        if not isinstance(other, BracketStructure):
            return NotImplemented
        return self.chart == other.chart and self.sigma == other.sigma and self.structure == other.structure

    def table(self):
        """Nonzero structure functions on ordered pairs ``A <= B`` in chart order."""
        idx = self.chart.index
        return {k: v for k, v in self.structure.items() if idx(k[0]) <= idx(k[1])}


def bracket_eval(B: BracketStructure, f: SuperPolynomial, g: SuperPolynomial) -> SuperPolynomial:
    if f.chart != B.chart or g.chart != B.chart:
        raise ChartMismatch("bracket arguments must live on the bracket's chart")
    result = B.chart.zero()
    left: Dict[str, SuperPolynomial] = {}
    right: Dict[str, SuperPolynomial] = {}
    for (a, b), p in B.structure.items():
        if a not in left:
            left[a] = right_derivative(f, a)
        fa = left[a]
        if not fa:
            continue
        if b not in right:
            right[b] = partial_derivative(g, b)
        gb = right[b]
        if not gb:
            continue
        result = result + fa * p * gb
    return result


def _parity(chart, name):
    return chart.coord(name).parity


def jacobiator(B: BracketStructure, f, g, h):
    """``{f,{g,h}} - {{f,g},h} - (-1)^{(|f|+s)(|g|+s)} {g,{f,h}}`` for homogeneous f, g."""
    s = B.sigma
    pf = parity_of(f) or 0
    pg = parity_of(g) or 0
    sign = -1 if ((pf + s) % 2) * ((pg + s) % 2) else 1
    return B(f, B(g, h)) - B(B(f, g), h) - B(g, B(f, h)) * sign


def jacobi_check(B: BracketStructure) -> Report:
    """Graded Jacobi on all coordinate triples; sufficient by Leibniz."""
    report = Report("jacobi", B.name)
    v = B.chart.vars()
    names = B.chart.names
    for a, b, c in combinations_with_replacement(names, 3):
        res = jacobiator(B, v[a], v[b], v[c])
        if res:
            report.fail("jacobi", (a, b, c), res)
    return report


def hamiltonian_field(B: BracketStructure, H: SuperPolynomial) -> VectorField:
    """``X_H = {H, .}``, of parity ``|H| + sigma``."""
    if H.chart != B.chart:
        raise ChartMismatch("Hamiltonian must live on the bracket's chart")
    par = parity_of(H)
    if par is MIXED:
        raise ParityViolation("Hamiltonian must be parity-homogeneous")
    par = par or 0
    coeffs = {c.name: bracket_eval(B, H, B.chart.var(c.name)) for c in B.chart.coords}
    return VectorField(B.chart, coeffs, par + B.sigma)


def derivation_check(B: BracketStructure, X: VectorField, label: str = "") -> Report:
    """``X{A,B} = {XA, B} + (-1)^{|X|(|A|+s)} {A, XB}`` on coordinate pairs."""
    if X.chart != B.chart:
        raise ChartMismatch("field and bracket live on different charts")
    report = Report("derivation", label or B.name)
    v = B.chart.vars()
    names = B.chart.names
    Xv = {n: apply(X, v[n]) for n in names}
    for i, a in enumerate(names):
        pa = (_parity(B.chart, a) + B.sigma) % 2
        sign = -1 if (X.parity * pa) % 2 else 1
        for b in names[i:]:
            lhs = apply(X, B[a, b])
            rhs = bracket_eval(B, Xv[a], v[b]) + bracket_eval(B, v[a], Xv[b]) * sign
            res = lhs - rhs
            if res:
                report.fail("derivation", (a, b), res)
    return report


def canonical_cotangent(chart: Chart, shift=None, prefix: str = "p_"):
    """``T*M`` chart with its canonical even bracket ``{p_c, c} = 1``.

    The momentum is written first so that the lift ``H = X^c p_c`` of a
    vector field satisfies ``{H, f} = X(f)`` on base functions.
    """
    T = cotangent_chart(chart, shift, prefix)
    structure = {(prefix + c.name, c.name): T.one() for c in chart.coords}
    k = T.multiplicity
    weight = tuple(-(s) for s in (tuple(shift) if shift is not None else (1,) * chart.multiplicity)) + (-1,)
    assert len(weight) == k
    return T, BracketStructure(T, structure, EVEN, weight, name="canonical")


def hamiltonian_lift(X: VectorField, T: Chart, prefix: str = "p_") -> SuperPolynomial:
    """Fiberwise-linear function ``sum X^c p_c`` on a cotangent chart."""
    H = T.zero()
    for name, coeff in X.coeffs.items():
        H = H + embed(coeff, T) * T.var(prefix + name)
    return H


def is_poisson_map(tr, B_source: BracketStructure, B_target: BracketStructure):
    """Residues of ``{phi* a, phi* b} - phi*{a, b}`` over target coordinate pairs.

    ``tr.forward`` expresses target coordinates through source coordinates.
    """
    out = []
    names = B_target.chart.names
    v = B_target.chart.vars()
    for i, a in enumerate(names):
        for b in names[i:]:
            lhs = bracket_eval(B_source, tr.pullback(v[a]), tr.pullback(v[b]))
            rhs = tr.pullback(B_target[a, b])
            if lhs != rhs:
                out.append(((a, b), lhs - rhs))
    return out
