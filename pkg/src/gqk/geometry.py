"""Charts transitions, graded vector fields and Berezin divergence.

Vector fields act by left derivatives: ``X(f) = sum_c X^c * d_c f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from .errors import ChartMismatch, NonInvertibleDensity, ParityViolation
from .superpoly import (
    EVEN,
    MIXED,
    ODD,
    Chart,
    Coordinate,
    SuperPolynomial,
    embed,
    inverse,
    parity_name,
    parity_of,
    partial_derivative,
    substitute,
    to_text,
    weight_of,
)


def _same_chart(a: Chart, b: Chart):
    if a is not b and a != b:
        raise ChartMismatch(f"charts {a.name!r} and {b.name!r} differ")


@dataclass(frozen=True)
class Transition:
    """Change of coordinates with an explicit inverse.

    ``forward`` expresses every target coordinate through source coordinates,
    ``backward`` every source coordinate through target coordinates.
    """

    source: Chart
    target: Chart
    forward: Mapping[str, SuperPolynomial]
    backward: Mapping[str, SuperPolynomial]
    name: str = ""

    def pullback(self, p: SuperPolynomial) -> SuperPolynomial:
        """Rewrite a function of target coordinates in source coordinates."""
        _same_chart(p.chart, self.target)
        return substitute(p, self.forward, target=self.source)

    def pushforward(self, p: SuperPolynomial) -> SuperPolynomial:
        """Rewrite a function of source coordinates in target coordinates."""
        _same_chart(p.chart, self.source)
        return substitute(p, self.backward, target=self.target)

    def inverse(self) -> "Transition":
        return Transition(self.target, self.source, self.backward, self.forward, self.name + "^-1")

    def then(self, other: "Transition") -> "Transition":
        """Compose: ``self`` goes source->target, ``other`` target->other.target."""
        _same_chart(self.target, other.source)
        fwd = {n: self.pullback(p) for n, p in other.forward.items()}
        bwd = {n: other.pushforward(p) for n, p in self.backward.items()}
        return Transition(self.source, other.target, fwd, bwd, f"{self.name};{other.name}")

    def check(self, strict: bool = True) -> List[Tuple[str, str, SuperPolynomial]]:
        """Violations as ``(identity, coordinate, residue)``; empty means valid."""
        out = []
        for chart, maps, label in ((self.target, self.forward, "forward"), (self.source, self.backward, "backward")):
            other = self.source if chart is self.target else self.target
            for c in chart.coords:
                img = maps.get(c.name)
                if img is None:
                    out.append((f"{label}-defined", c.name, other.zero()))
                    continue
                par = parity_of(img)
                if par is not None and par != c.parity:
                    out.append((f"{label}-parity", c.name, img))
                if strict:
                    w = weight_of(img)
                    if w is not None and w != c.weight:
                        out.append((f"{label}-weight", c.name, img))
        if out:
            return out
        for c in self.source.coords:
            back = self.pullback(self.backward[c.name])
            res = back - self.source.var(c.name)
            if res:
                out.append(("backward-after-forward", c.name, res))
        for c in self.target.coords:
            there = self.pushforward(self.forward[c.name])
            res = there - self.target.var(c.name)
            if res:
                out.append(("forward-after-backward", c.name, res))
        return out

    def is_valid(self, strict: bool = True) -> bool:
        return not self.check(strict)

    def relabel(self, source: Chart, target: Chart, smap: Mapping[str, str], tmap: Mapping[str, str]):
        """Same transition on renamed charts (name maps old->new)."""
        sv = {old: source.var(new) for old, new in smap.items()}
        tv = {old: target.var(new) for old, new in tmap.items()}
        fwd = {tmap[n]: substitute(p, sv, target=source) for n, p in self.forward.items()}
        bwd = {smap[n]: substitute(p, tv, target=target) for n, p in self.backward.items()}
        return Transition(source, target, fwd, bwd, self.name)

    def same_as(self, other: "Transition") -> bool:
        return (
            self.source == other.source
            and self.target == other.target
            and dict(self.forward) == dict(other.forward)
            and dict(self.backward) == dict(other.backward)
        )


def identity_transition(chart: Chart, primed: Chart | None = None) -> Transition:
    primed = primed or chart
    fwd = {c.name: primed.var(pc.name) for c, pc in zip(chart.coords, primed.coords)}
    bwd = {pc.name: chart.var(c.name) for c, pc in zip(chart.coords, primed.coords)}
    return Transition(primed, chart, fwd, bwd, "id")


class VectorField:
    """Graded derivation ``sum_c X^c d/dc`` with sparse coefficients."""

    __slots__ = ("chart", "coeffs", "parity")

    def __init__(self, chart: Chart, coeffs: Mapping[str, SuperPolynomial], parity: int):
        self.chart = chart
        self.parity = parity % 2
        clean = {}
        for name, p in coeffs.items():
            c = chart.coord(name)
            if isinstance(p, (int, Fraction)):
                p = chart.const(p)
            _same_chart(p.chart, chart)
            if not p:
                continue
            par = parity_of(p)
            expected = (self.parity + c.parity) % 2
            if par != expected:
                raise ParityViolation(
                    f"coefficient of d/d{name} of a field of parity {parity_name(self.parity)} must be "
                    f"{parity_name(expected)}, got {to_text(p)}"
                )
            clean[name] = p
        self.coeffs = clean

    def __getitem__(self, name) -> SuperPolynomial:
        self.chart.index(name)
        return self.coeffs.get(name, self.chart.zero())

    def __call__(self, f: SuperPolynomial) -> SuperPolynomial:
        return apply(self, f)

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.chart, other.chart)
        if self.parity != other.parity and self and other:
            raise ParityViolation("cannot add fields of different parity")
        coeffs = dict(self.coeffs)
        for n, p in other.coeffs.items():
            coeffs[n] = coeffs.get(n, self.chart.zero()) + p
        parity = self.parity if self else other.parity
        return VectorField(self.chart, coeffs, parity)

    def __neg__(self):
        return VectorField(self.chart, {n: -p for n, p in self.coeffs.items()}, self.parity)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "VectorField":
        """Left multiplication by an even function or a scalar."""
        if isinstance(f, SuperPolynomial):
            if parity_of(f) not in (None, EVEN):
                raise ParityViolation("can only rescale a field by an even function")
            return VectorField(self.chart, {n: f * p for n, p in self.coeffs.items()}, self.parity)
        return VectorField(self.chart, {n: p * f for n, p in self.coeffs.items()}, self.parity)

    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        if self.chart != other.chart:
            return False
        if not self.coeffs and not other.coeffs:
            return True
        return self.parity == other.parity and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.chart.name, frozenset(self.coeffs.items())))

    @property
    def weight(self):
        """Common weight of the field, MIXED, or None for the zero field."""
        found = set()
        for name, p in self.coeffs.items():
            w = weight_of(p)
            if w is MIXED:
                return MIXED
            cw = self.chart.coord(name).weight
            found.add(tuple(a - b for a, b in zip(w, cw)))
        if not found:
            return None
        if len(found) > 1:
            return MIXED
        return found.pop()

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for c in self.chart.coords:
            if c.name in self.coeffs:
                parts.append(f"({to_text(self.coeffs[c.name])})*d/d{c.name}")
        return " + ".join(parts)

    def __repr__(self):
        return f"VectorField({self.chart.name}, {parity_name(self.parity)}: {self.to_text()})"


def zero_field(chart: Chart, parity: int = ODD) -> VectorField:
    return VectorField(chart, {}, parity)


def coordinate_field(chart: Chart, name: str) -> VectorField:
    """The field d/d(name)."""
    return VectorField(chart, {name: chart.one()}, chart.coord(name).parity)


def apply(X: VectorField, f: SuperPolynomial) -> SuperPolynomial:
    _same_chart(X.chart, f.chart)
    result = f.chart.zero()
    for name, coeff in X.coeffs.items():
        d = partial_derivative(f, name)
        if d:
            result = result + coeff * d
    return result


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """Graded commutator ``XY - (-1)^{|X||Y|} YX``."""
    _same_chart(X.chart, Y.chart)
    sign = -1 if (X.parity and Y.parity) else 1
    names = set(X.coeffs) | set(Y.coeffs)
    coeffs = {}
    for n in X.chart.names:
        if n not in names:
            continue
        c = apply(X, Y[n]) - apply(Y, X[n]) * sign
        if c:
            coeffs[n] = c
    return VectorField(X.chart, coeffs, X.parity + Y.parity)


def is_homological(X: VectorField) -> bool:
    if X.parity != ODD:
        return False
    return commutator(X, X).is_zero()


def transport(X: VectorField, tr: Transition) -> VectorField:
    """Express a field given on ``tr.target`` in the coordinates of ``tr.source``."""
    _same_chart(X.chart, tr.target)
    coeffs = {}
    for c in tr.source.coords:
        coeffs[c.name] = tr.pullback(apply(X, tr.backward[c.name]))
    return VectorField(tr.source, coeffs, X.parity)


def _pullback_map(phi, X1: VectorField, X2: VectorField) -> Dict[str, SuperPolynomial]:
    if isinstance(phi, Transition):
        _same_chart(phi.source, X1.chart)
        _same_chart(phi.target, X2.chart)
        return dict(phi.forward)
    return dict(phi)


def related(phi, X1: VectorField, X2: VectorField) -> bool:
    """Whether ``X1 . phi* = phi* . X2`` on every coordinate of ``X2.chart``."""
    return not related_residues(phi, X1, X2)


def related_residues(phi, X1: VectorField, X2: VectorField):
    pull = _pullback_map(phi, X1, X2)
    for name, img in pull.items():
        c = X2.chart.coord(name)
        par = parity_of(img)
        if par is not None and par != c.parity:
            raise ParityViolation(f"pullback of {name!r} has the wrong parity")
    out = []
    for c in X2.chart.coords:
        img = pull.get(c.name)
        if img is None:
            raise ParityViolation(f"pullback does not define {c.name!r}")
        lhs = apply(X1, img)
        rhs = substitute(X2[c.name], pull, target=X1.chart)
        if lhs != rhs:
            out.append((c.name, lhs - rhs))
    return out


@dataclass(frozen=True)
class VolumeForm:
    """``density * rho`` with ``rho`` the coordinate Berezin volume."""

    chart: Chart
    density: SuperPolynomial = field(default=None)

    def __post_init__(self):
        if self.density is None:
            object.__setattr__(self, "density", self.chart.one())
        _same_chart(self.chart, self.density.chart)


def divergence(X: VectorField, rho: VolumeForm | None = None) -> SuperPolynomial:
    """Berezin divergence; for ``rho = f * coordinate volume`` adds ``X(f)/f``.

    With left derivatives the coordinate part is
    ``sum_c (-1)^{|c|(|X|+1)} d_c X^c``, which makes the divergence of an
    even linear field the supertrace of its matrix.
    """
    div = X.chart.zero()
    for name, coeff in X.coeffs.items():
        c = X.chart.coord(name)
        d = partial_derivative(coeff, name)
        if c.parity and not X.parity:
            d = -d
        div = div + d
    if rho is None:
        return div
    _same_chart(X.chart, rho.chart)
    f = rho.density
    if parity_of(f) not in (None, EVEN):
        raise NonInvertibleDensity("volume densities must be even")
    finv = inverse(f)
    if finv is None:
        raise NonInvertibleDensity(f"density {to_text(f)} is not invertible")
    return div + apply(X, f) * finv


def lie_derivative_volume(X: VectorField, omega: VolumeForm) -> VolumeForm:
    """``L_X (f rho) = (X(f) + (-1)^{|X||f|} f div X) rho``."""
    _same_chart(X.chart, omega.chart)
    div = divergence(X)
    f = omega.density
    out = apply(X, f)
    for par, part in f.homogeneous_parts().items():
        term = part * div
        out = out - term if (par and X.parity) else out + term
    return VolumeForm(X.chart, out)


# lifts of charts and transitions ----------------------------------------

def tangent_chart(chart: Chart, odd: bool = False, prefix: str = "d", name: str | None = None) -> Chart:
    """Chart of ``TM`` (or ``Pi TM`` when odd) with one extra weight direction.

    A coordinate of weight ``w`` stays at ``(w, 0)``; its differential gets
    ``(w, 1)`` and parity flipped when ``odd``.
    """
    coords = [Coordinate(c.name, c.parity, c.weight + (0,)) for c in chart.coords]
    for c in chart.coords:
        par = (c.parity + 1) % 2 if odd else c.parity
        coords.append(Coordinate(prefix + c.name, par, c.weight + (1,)))
    default = ("PiT" if odd else "T") + chart.name
    return Chart(name or default, tuple(coords), chart.multiplicity + 1)


def cotangent_chart(chart: Chart, shift=None, prefix: str = "p_", name: str | None = None) -> Chart:
    """Chart of ``T*M``: conjugate of weight ``w`` gets ``(shift - w, 1)``.

    Momenta have the parity of their coordinate.  ``shift`` defaults to the
    all-ones vector, which turns ``T*(vector bundle)`` into a double vector
    bundle.
    """
    k = chart.multiplicity
    shift = tuple(shift) if shift is not None else (1,) * k
    coords = [Coordinate(c.name, c.parity, c.weight + (0,)) for c in chart.coords]
    for c in chart.coords:
        w = tuple(s - a for s, a in zip(shift, c.weight)) + (1,)
        coords.append(Coordinate(prefix + c.name, c.parity, w))
    return Chart(name or "T*" + chart.name, tuple(coords), k + 1)


def _lifted_source(tr_source: Chart, lifted: Chart):
    return {n: lifted.var(n) for n in tr_source.names}


def tangent_lift(tr: Transition, odd: bool = False, prefix: str = "d") -> Transition:
    """Transition of ``TM`` / ``Pi TM``: ``dy = sum dx' * d_{x'} y(x')``."""
    src = tangent_chart(tr.source, odd, prefix)
    tgt = tangent_chart(tr.target, odd, prefix)

    def lift(maps, frm: Chart, lifted_frm: Chart):
        out = {}
        for name, img in maps.items():
            out[name] = embed(img, lifted_frm)
            diff = lifted_frm.zero()
            for c in frm.coords:
                d = partial_derivative(img, c.name)
                if d:
                    diff = diff + lifted_frm.var(prefix + c.name) * embed(d, lifted_frm)
            out[prefix + name] = diff
        return out

    fwd = lift(tr.forward, tr.source, src)
    bwd = lift(tr.backward, tr.target, tgt)
    return Transition(src, tgt, fwd, bwd, ("PiT" if odd else "T") + tr.name)


def cotangent_lift(tr: Transition, shift=None, prefix: str = "p_") -> Transition:
    """Transition of ``T*M``: ``p_A = sum_{A'} (d_A x^{A'}) p_{A'}``."""
    src = cotangent_chart(tr.source, shift, prefix)
    tgt = cotangent_chart(tr.target, shift, prefix)

    def lift(maps, frm: Chart, lifted_frm: Chart, other_maps, other: Chart):
        # maps: frm-side coordinates are the images; other_maps: inverse direction
        out = {name: embed(img, lifted_frm) for name, img in maps.items()}
        for c in other.coords:
            mom = lifted_frm.zero()
            for cp in frm.coords:
                d = partial_derivative(other_maps[cp.name], c.name)
                if not d:
                    continue
                d = substitute(d, maps, target=frm)
                mom = mom + embed(d, lifted_frm) * lifted_frm.var(prefix + cp.name)
            out[prefix + c.name] = mom
        return out

    fwd = lift(tr.forward, tr.source, src, tr.backward, tr.target)
    bwd = lift(tr.backward, tr.target, tgt, tr.forward, tr.source)
    return Transition(src, tgt, fwd, bwd, "T*" + tr.name)


def de_rham_field(chart: Chart, prefix: str = "d") -> VectorField:
    """``d = sum dx^A d/dx^A`` on a chart produced by ``tangent_chart(odd=True)``."""
    coeffs = {}
    for c in chart.coords:
        if c.name.startswith(prefix) and c.name[len(prefix):] in chart:
            base = c.name[len(prefix):]
            coeffs[base] = chart.var(c.name)
    return VectorField(chart, coeffs, ODD)
