"""Vector bundles, double and multiple vector bundles in local trivializations.

A double vector bundle chart has base coordinates ``x`` (weight (0,0)),
side coordinates ``u`` (1,0) and ``w`` (0,1), and core coordinates ``z``
(1,1).  Transitions, written from a primed chart to an unprimed one, are

    u^i  = u'^i' Tu[i'][i](x')
    w^a  = w'^a' Tw[a'][a](x')
    z^m  = z'^m' Tz[m'][m](x') + w'^a' u'^i' Tmix[i'][a'][m](x')

with ``x = base_map(x')``.  Every matrix comes with its inverse.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from itertools import combinations
from fractions import Fraction
from typing import Dict, Mapping, Sequence, Tuple

from .algebroid import base_chart
from .brackets import canonical_cotangent, is_poisson_map
from .errors import ProvenanceMismatch
from .geometry import Transition, cotangent_lift, tangent_lift
from .report import Report
from .superpoly import (
    EVEN,
    Chart,
    Coordinate,
    SuperPolynomial,
    embed,
    partial_derivative,
    reinterpret,
    substitute,
    weight_of,
)

Matrix = Tuple[Tuple[SuperPolynomial, ...], ...]

PRIME = "'"
DUAL = "_d"


def primed(name: str) -> str:
    return name + PRIME


def dual_name(name: str) -> str:
    return name[: -len(DUAL)] if name.endswith(DUAL) else name + DUAL


# matrices over a base chart --------------------------------------------------

def identity_matrix(chart: Chart, n: int) -> Matrix:
    return tuple(tuple(chart.one() if i == j else chart.zero() for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix, chart: Chart) -> Matrix:
    n, m = len(a), len(b[0]) if b else 0
    inner = len(b)
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(inner)), chart.zero()) for j in range(m)) for i in range(n)
    )


def transpose(a: Matrix) -> Matrix:
    if not a:
        return a
    return tuple(tuple(a[i][j] for i in range(len(a))) for j in range(len(a[0])))


def is_identity(a: Matrix) -> bool:
    for i, row in enumerate(a):
        for j, v in enumerate(row):
            if v != (1 if i == j else 0):
                return False
    return True


def as_matrix(rows, chart: Chart) -> Matrix:
    return tuple(tuple(v if isinstance(v, SuperPolynomial) else chart.const(v) for v in row) for row in rows)


# base charts and base transitions -------------------------------------------

def _base_pair(base: Chart, multiplicity: int):
    """Weight-zero unprimed/primed base coordinates for a chart of given multiplicity."""
    zero = (0,) * multiplicity
    plain = [Coordinate(c.name, EVEN, zero) for c in base.coords]
    prime = [Coordinate(primed(c.name), EVEN, zero) for c in base.coords]
    return plain, prime


def primed_chart(base: Chart) -> Chart:
    return Chart(base.name + PRIME, tuple(Coordinate(primed(c.name), c.parity, c.weight) for c in base.coords), base.multiplicity)


def identity_base_map(base: Chart):
    P = primed_chart(base)
    forward = {c.name: P.var(primed(c.name)) for c in base.coords}
    backward = {primed(c.name): base.var(c.name) for c in base.coords}
    return forward, backward


def _on(p: SuperPolynomial, chart: Chart) -> SuperPolynomial:
    return embed(p, chart)


# ordinary vector bundles ------------------------------------------------------

@dataclass(frozen=True)
class VectorBundle:
    """Rank-``n`` bundle over ``base``: ``v^i = v'^i' T[i'][i](x')``."""

    base: Chart
    fibre: Tuple[str, ...]
    T: Matrix
    T_inv: Matrix
    base_forward: Mapping[str, SuperPolynomial] = None
    base_backward: Mapping[str, SuperPolynomial] = None
    name: str = "E"
    parity: int = EVEN

    def __post_init__(self):
        if self.base_forward is None:
            fwd, bwd = identity_base_map(self.base)
            object.__setattr__(self, "base_forward", fwd)
            object.__setattr__(self, "base_backward", bwd)

    @property
    def base_primed(self) -> Chart:
        return primed_chart(self.base)

    def charts(self):
        P = self.base_primed
        src = Chart(self.name + PRIME, tuple(P.coords) + tuple(Coordinate(primed(v), self.parity, (1,)) for v in self.fibre), 1)
        tgt = Chart(self.name, tuple(self.base.coords) + tuple(Coordinate(v, self.parity, (1,)) for v in self.fibre), 1)
        return src, tgt

    def transition(self) -> Transition:
        src, tgt = self.charts()
        n = len(self.fibre)
        fwd = {x: _on(p, src) for x, p in self.base_forward.items()}
        bwd = {x: _on(p, tgt) for x, p in self.base_backward.items()}
        for i, v in enumerate(self.fibre):
            fwd[v] = sum((src.var(primed(self.fibre[k])) * _on(self.T[k][i], src) for k in range(n)), src.zero())
        for k, v in enumerate(self.fibre):
            # T_inv is a function of x'; rewrite it through x' = base_backward(x)
            bwd[primed(v)] = sum(
                (tgt.var(self.fibre[i]) * self._at_unprimed(self.T_inv[i][k], tgt) for i in range(n)), tgt.zero()
            )
        return Transition(src, tgt, fwd, bwd, self.name)

    def _at_unprimed(self, p: SuperPolynomial, chart: Chart) -> SuperPolynomial:
        sigma = {x: _on(q, chart) for x, q in self.base_backward.items()}
        return substitute(p, sigma, target=chart)

    def dual(self, fibre=None) -> "VectorBundle":
        fibre = tuple(fibre) if fibre else tuple(dual_name(v) for v in self.fibre)
        return replace(self, fibre=fibre, T=transpose(self.T_inv), T_inv=transpose(self.T), name=dual_name(self.name))

    def check(self) -> Report:
        report = Report("bundle", self.name)
        P = self.base_primed
        if not is_identity(mat_mul(self.T, self.T_inv, P)):
            report.fail("T*T_inv=1", ("T",), "not the identity")
        for ident, coord, res in self.transition().check(strict=True):
            report.fail(ident, (coord,), res)
        return report

    def pi(self, prefix: str = "xi_") -> "VectorBundle":
        """Parity-reversed bundle with fibre coordinates renamed ``prefix + v``."""
        return replace(self, fibre=tuple(prefix + v for v in self.fibre), parity=(self.parity + 1) % 2, name="Pi" + self.name)

    def same_as(self, other: "VectorBundle") -> bool:
        return (
            self.base == other.base
            and self.fibre == other.fibre
            and self.T == other.T
            and self.T_inv == other.T_inv
            and dict(self.base_forward) == dict(other.base_forward)
            and self.parity == other.parity
        )


def trivial_bundle(base: Chart, fibre: Sequence[str], name: str = "E") -> VectorBundle:
    P = primed_chart(base)
    n = len(fibre)
    return VectorBundle(base, tuple(fibre), identity_matrix(P, n), identity_matrix(P, n), name=name)


# double vector bundles ---------------------------------------------------------

def _zeros3(P: Chart, a: int, b: int, c: int):
    return tuple(tuple(tuple(P.zero() for _ in range(c)) for _ in range(b)) for _ in range(a))


@dataclass(frozen=True)
class DoubleVectorBundle:
    base: Chart
    u: Tuple[str, ...]
    w: Tuple[str, ...]
    z: Tuple[str, ...]
    Tu: Matrix
    Tu_inv: Matrix
    Tw: Matrix
    Tw_inv: Matrix
    Tz: Matrix
    Tz_inv: Matrix
    Tmix: Tuple  # Tmix[i'][a'][m]
    base_forward: Mapping[str, SuperPolynomial] = None
    base_backward: Mapping[str, SuperPolynomial] = None
    name: str = "D"

    def __post_init__(self):
        if self.base_forward is None:
            fwd, bwd = identity_base_map(self.base)
            object.__setattr__(self, "base_forward", fwd)
            object.__setattr__(self, "base_backward", bwd)

    @property
    def base_primed(self) -> Chart:
        return primed_chart(self.base)

    def charts(self):
        plain, prime = _base_pair(self.base, 2)
        groups = ((self.u, (1, 0)), (self.w, (0, 1)), (self.z, (1, 1)))
        src = list(prime)
        tgt = list(plain)
        for names, wt in groups:
            src += [Coordinate(primed(n), EVEN, wt) for n in names]
            tgt += [Coordinate(n, EVEN, wt) for n in names]
        return Chart(self.name + PRIME, tuple(src), 2), Chart(self.name, tuple(tgt), 2)

    def _at_unprimed(self, p: SuperPolynomial, chart: Chart) -> SuperPolynomial:
        sigma = {x: _on(q, chart) for x, q in self.base_backward.items()}
        return substitute(p, sigma, target=chart)

    def transition(self) -> Transition:
        src, tgt = self.charts()
        nu, nw, nz = len(self.u), len(self.w), len(self.z)
        S = src.var
        fwd = {x: _on(p, src) for x, p in self.base_forward.items()}
        for i, n in enumerate(self.u):
            fwd[n] = sum((S(primed(self.u[k])) * _on(self.Tu[k][i], src) for k in range(nu)), src.zero())
        for a, n in enumerate(self.w):
            fwd[n] = sum((S(primed(self.w[k])) * _on(self.Tw[k][a], src) for k in range(nw)), src.zero())
        for m, n in enumerate(self.z):
            val = sum((S(primed(self.z[k])) * _on(self.Tz[k][m], src) for k in range(nz)), src.zero())
            for i in range(nu):
                for a in range(nw):
                    t = self.Tmix[i][a][m]
                    if t:
                        val = val + S(primed(self.w[a])) * S(primed(self.u[i])) * _on(t, src)
            fwd[n] = val
        bwd = {x: _on(p, tgt) for x, p in self.base_backward.items()}
        V = tgt.var
        memo = {}

        def at(p):
            if p not in memo:
                memo[p] = self._at_unprimed(p, tgt)
            return memo[p]

        for k, n in enumerate(self.u):
            bwd[primed(n)] = sum((V(self.u[i]) * at(self.Tu_inv[i][k]) for i in range(nu)), tgt.zero())
        for k, n in enumerate(self.w):
            bwd[primed(n)] = sum((V(self.w[a]) * at(self.Tw_inv[a][k]) for a in range(nw)), tgt.zero())
        shifted_z = []
        for m in range(nz):
            shifted = V(self.z[m])
            for i in range(nu):
                for a in range(nw):
                    t = self.Tmix[i][a][m]
                    if t:
                        shifted = shifted - bwd[primed(self.w[a])] * bwd[primed(self.u[i])] * at(t)
            shifted_z.append(shifted)
        for k, n in enumerate(self.z):
            val = tgt.zero()
            for m in range(nz):
                val = val + shifted_z[m] * at(self.Tz_inv[m][k])
            bwd[primed(n)] = val
        return Transition(src, tgt, fwd, bwd, self.name)

    def to_multi(self) -> "MultiVectorBundle":
        return MultiVectorBundle(self.transition(), self.name)

    def swap(self) -> "DoubleVectorBundle":
        """Exchange the two sides ``A`` and ``B``."""
        nu, nw, nz = len(self.u), len(self.w), len(self.z)
        mix = tuple(tuple(tuple(self.Tmix[i][a][m] for m in range(nz)) for i in range(nu)) for a in range(nw))
        return replace(self, u=self.w, w=self.u, Tu=self.Tw, Tu_inv=self.Tw_inv, Tw=self.Tu, Tw_inv=self.Tu_inv, Tmix=mix)

    def side_a(self) -> VectorBundle:
        return VectorBundle(self.base, self.u, self.Tu, self.Tu_inv, self.base_forward, self.base_backward, "A")

    def side_b(self) -> VectorBundle:
        return VectorBundle(self.base, self.w, self.Tw, self.Tw_inv, self.base_forward, self.base_backward, "B")

    def has_mixing(self) -> bool:
        return any(t for plane in self.Tmix for row in plane for t in row)

    def same_as(self, other: "DoubleVectorBundle") -> bool:
        fields = ("base", "u", "w", "z", "Tu", "Tu_inv", "Tw", "Tw_inv", "Tz", "Tz_inv", "Tmix")
        return all(getattr(self, f) == getattr(other, f) for f in fields) and dict(self.base_forward) == dict(
            other.base_forward
        )


def trivial_dvb(base: Chart, u, w, z, name="D") -> DoubleVectorBundle:
    P = primed_chart(base)
    I = lambda n: identity_matrix(P, n)  # noqa: E731
    return DoubleVectorBundle(
        base, tuple(u), tuple(w), tuple(z), I(len(u)), I(len(u)), I(len(w)), I(len(w)), I(len(z)), I(len(z)),
        _zeros3(P, len(u), len(w), len(z)), name=name,
    )


# multiple vector bundles --------------------------------------------------------

@dataclass(frozen=True)
class MultiVectorBundle:
    """A k-fold vector bundle given by one chart transition with 0/1 weights."""

    transition: Transition
    name: str = ""

    @property
    def chart(self) -> Chart:
        return self.transition.target

    @property
    def multiplicity(self) -> int:
        return self.chart.multiplicity

    def face(self, directions) -> "MultiVectorBundle":
        """Restriction to coordinates whose weight is supported in ``directions``."""
        dirs = set(directions)
        tr = self.transition

        def keep(c):
            return all(w == 0 or j in dirs for j, w in enumerate(c.weight))

        src = Chart(tr.source.name, tuple(c for c in tr.source.coords if keep(c)), tr.source.multiplicity)
        tgt = Chart(tr.target.name, tuple(c for c in tr.target.coords if keep(c)), tr.target.multiplicity)
        kill_src = {c.name: (src.var(c.name) if keep(c) else src.zero()) for c in tr.source.coords}
        kill_tgt = {c.name: (tgt.var(c.name) if keep(c) else tgt.zero()) for c in tr.target.coords}
        fwd = {c.name: substitute(tr.forward[c.name], kill_src, target=src) for c in tgt.coords}
        bwd = {c.name: substitute(tr.backward[c.name], kill_tgt, target=tgt) for c in src.coords}
        return MultiVectorBundle(Transition(src, tgt, fwd, bwd, tr.name), f"{self.name}|{sorted(dirs)}")

    def same_as(self, other: "MultiVectorBundle") -> bool:
        return self.transition.same_as(other.transition)


def validate_multi(M: MultiVectorBundle) -> Report:
    report = Report("multi", M.name)
    for c in M.chart.coords:
        if any(w not in (0, 1) for w in c.weight):
            report.fail("weights-0/1", (c.name,), str(c.weight))
    for ident, coord, res in M.transition.check(strict=True):
        report.fail(ident, (coord,), res)
    if report.violations:
        return report
    k = M.multiplicity
    for r in range(1, k):
        for dirs in combinations(range(k), r):
            sub = M.face(dirs)
            for ident, coord, res in sub.transition.check(strict=True):
                report.fail(f"face{list(dirs)}:{ident}", (coord,), res)
    return report


def validate_dvb(D, others: Sequence = ()) -> Report:
    """Block inverses, parity/weight preservation, invertibility and faces.

    ``others`` may hold two more bundles ``D23, D13`` on the same charts for
    the cocycle condition ``D13 = D12 ; D23`` on triple overlaps.
    """
    if isinstance(D, MultiVectorBundle):
        report = validate_multi(D)
        report.kind = "dvb"
        return report
    report = Report("dvb", D.name)
    P = D.base_primed
    for label, T, Ti in (("Tu", D.Tu, D.Tu_inv), ("Tw", D.Tw, D.Tw_inv), ("Tz", D.Tz, D.Tz_inv)):
        if not (is_identity(mat_mul(T, Ti, P)) and is_identity(mat_mul(Ti, T, P))):
            report.fail(f"{label}*{label}_inv=1", (label,), "not the identity")
    if report.violations:
        return report
    report.merge(validate_multi(D.to_multi()))
    if others:
        d23, d13 = others
        comp = _renamed_compose(D.transition(), d23.transition())
        t13 = d13.transition()
        for c, p in t13.forward.items():
            res = comp.forward[c] - p
            if res:
                report.fail("cocycle", (c,), res)
    return report


def _renamed_compose(t12: Transition, t23: Transition) -> Transition:
    """``t12`` then ``t23`` where both are written primed -> unprimed.

    The unprimed chart of ``t23``'s source is identified with ``t12``'s
    target by dropping primes; the result is again primed -> unprimed.
    """
    unprime = lambda n: n[: -len(PRIME)]  # noqa: E731
    sigma = {c.name: t12.forward[unprime(c.name)] for c in t23.source.coords}
    fwd = {n: substitute(p, sigma, target=t12.source) for n, p in t23.forward.items()}
    back = {unprime(n): p for n, p in t23.backward.items()}
    bwd = {n: substitute(p, back, target=t23.target) for n, p in t12.backward.items()}
    return Transition(t12.source, t23.target, fwd, bwd, f"{t12.name};{t23.name}")


def core_of(D: DoubleVectorBundle) -> VectorBundle:
    """Core bundle: the z-law with side coordinates set to zero."""
    return VectorBundle(D.base, D.z, D.Tz, D.Tz_inv, D.base_forward, D.base_backward, "core")


def dualize(D: DoubleVectorBundle, side: str = "A") -> DoubleVectorBundle:
    """``D*_A`` (sides ``A``, ``K*``; core ``B*``) or ``D*_B`` (sides ``K*``, ``B``; core ``A*``).

    Dual coordinates are named by toggling the ``_d`` suffix, with the pairing
    ``w^a w_a + z^m z_m`` (over ``A``) held invariant.
    """
    if side.upper() == "B":
        return dualize(D.swap(), "A").swap()
    if side.upper() != "A":
        raise ValueError("side must be 'A' or 'B'")
    P = D.base_primed
    nu, nw, nz = len(D.u), len(D.w), len(D.z)
    mix = []
    for i in range(nu):
        plane = []
        for m2 in range(nz):  # new w index (dual of z)
            row = []
            for a in range(nw):  # new core index (dual of w)
                tot = P.zero()
                for a2 in range(nw):
                    for m in range(nz):
                        t = D.Tmix[i][a2][m]
                        if t:
                            tot = tot - D.Tw_inv[a][a2] * t * D.Tz_inv[m][m2]
                row.append(tot)
            plane.append(tuple(row))
        mix.append(tuple(plane))
    return DoubleVectorBundle(
        D.base,
        D.u,
        tuple(dual_name(n) for n in D.z),
        tuple(dual_name(n) for n in D.w),
        D.Tu,
        D.Tu_inv,
        transpose(D.Tz_inv),
        transpose(D.Tz),
        transpose(D.Tw_inv),
        transpose(D.Tw),
        tuple(mix),
        D.base_forward,
        D.base_backward,
        name=f"{D.name}*A",
    )


def dual_law(D: DoubleVectorBundle, side: str = "A") -> Dict[str, SuperPolynomial]:
    """Primed dual coordinates through unprimed ones, read off the invariance of the pairing.

    Over ``A``: ``w_a' = Tw[a'][a] w_a + u^i' Tmix[i'][a'][m] z_m`` and
    ``z_m' = Tz[m'][m] z_m``; over ``B`` the roles of ``u`` and ``w`` swap.
    Returned on the unprimed chart of the corresponding dual.
    """
    tgt = dualize(D, side).charts()[1]
    if side.upper() == "B":
        D = D.swap()
    tr = D.transition()
    at = lambda p: D._at_unprimed(p, tgt)  # noqa: E731
    u_primed = {primed(n): substitute(tr.backward[primed(n)], {c.name: tgt.var(c.name) for c in tr.target.coords if c.name in tgt}, target=tgt) for n in D.u}
    out = {}
    for a2, wn in enumerate(D.w):
        val = tgt.zero()
        for a, wn2 in enumerate(D.w):
            val = val + at(D.Tw[a2][a]) * tgt.var(dual_name(wn2))
        for i, un in enumerate(D.u):
            for m, zn in enumerate(D.z):
                t = D.Tmix[i][a2][m]
                if t:
                    val = val + u_primed[primed(un)] * at(t) * tgt.var(dual_name(zn))
        out[primed(dual_name(wn))] = val
    for m2, zn in enumerate(D.z):
        val = tgt.zero()
        for m, zn2 in enumerate(D.z):
            val = val + at(D.Tz[m2][m]) * tgt.var(dual_name(zn2))
        out[primed(dual_name(zn))] = val
    return out


def _union_transition(t1: Transition, t2: Transition, name: str) -> Transition:
    """Transition on the union of two charts that agree on shared coordinates."""
    def merge(c1: Chart, c2: Chart):
        coords = list(c1.coords)
        for c in c2.coords:
            if c.name in c1:
                if c1.coord(c.name).parity != c.parity:
                    raise ProvenanceMismatch(f"coordinate {c.name!r} has different parities")
            else:
                coords.append(Coordinate(c.name, c.parity, c.weight))
        return Chart(name, tuple(coords), c1.multiplicity)

    src = merge(t1.source, t2.source)
    tgt = merge(t1.target, t2.target)
    fwd, bwd = {}, {}
    for t in (t1, t2):
        for n, p in t.forward.items():
            q = embed(p, src)
            if n in fwd and fwd[n] != q:
                raise ProvenanceMismatch(f"the two bundles transform {n!r} differently")
            fwd[n] = q
        for n, p in t.backward.items():
            q = embed(p, tgt)
            if n in bwd and bwd[n] != q:
                raise ProvenanceMismatch(f"the two bundles transform {n!r} differently")
            bwd[n] = q
    return Transition(src, tgt, fwd, bwd, name)


def pairing_form(DA: DoubleVectorBundle, DB: DoubleVectorBundle, chart: Chart, sign: int = -1, prime: bool = False):
    """``u^i u_i + sign * w^a w_a`` on ``chart``."""
    f = (lambda n: primed(n)) if prime else (lambda n: n)
    form = chart.zero()
    for un, cn in zip(DA.u, DB.z):
        form = form + chart.var(f(un)) * chart.var(f(cn))
    for wn, cn in zip(DB.w, DA.z):
        form = form + chart.var(f(wn)) * chart.var(f(cn)) * sign
    return form


def pairing_check(DA: DoubleVectorBundle, DB: DoubleVectorBundle, sign: int = -1) -> Report:
    """Invariance of ``u^i u_i - w^a w_a`` between ``D*_A`` and ``D*_B`` over ``K*``.

    With ``sign=+1`` the plus variant is tested instead.
    """
    report = Report("pairing", f"{DA.name},{DB.name}")
    if DA.base != DB.base or tuple(DA.w) != tuple(DB.u) or DA.Tw != DB.Tu:
        raise ProvenanceMismatch("the two duals do not share the base and the dual core")
    if tuple(dual_name(n) for n in DA.u) != tuple(DB.z) or tuple(dual_name(n) for n in DB.w) != tuple(DA.z):
        raise ProvenanceMismatch("the two duals do not come from one double vector bundle")
    tr = _union_transition(DA.transition(), DB.transition(), "pairing")
    form = pairing_form(DA, DB, tr.target, sign)
    form_primed = pairing_form(DA, DB, tr.source, sign, prime=True)
    residue = tr.pullback(form) - form_primed
    report.details["sign"] = "-" if sign < 0 else "+"
    if residue:
        report.fail("pairing-invariance", ("u.u_d" + (" - " if sign < 0 else " + ") + "w.w_d",), residue)
    return report


# parity reversion ------------------------------------------------------------------

def parity_reverse(M, directions) -> MultiVectorBundle:
    """``Pi_S``: shift the parity of each coordinate by its total weight along ``S``.

    Monomials of the transition keep their chart-ordered form; only the
    parity bookkeeping changes.
    """
    if isinstance(M, DoubleVectorBundle):
        M = M.to_multi()
    dirs = sorted(set(directions))
    tr = M.transition

    def flip(chart: Chart) -> Chart:
        coords = []
        for c in chart.coords:
            shift = sum(c.weight[j] for j in dirs)
            coords.append(Coordinate(c.name, (c.parity + shift) % 2, c.weight))
        return Chart(chart.name, tuple(coords), chart.multiplicity)

    src, tgt = flip(tr.source), flip(tr.target)
    fwd = {n: reinterpret(p, src) for n, p in tr.forward.items()}
    bwd = {n: reinterpret(p, tgt) for n, p in tr.backward.items()}
    label = "".join(str(j + 1) for j in dirs)
    return MultiVectorBundle(Transition(src, tgt, fwd, bwd, tr.name), f"Pi{label}{M.name}")


# prolongations -------------------------------------------------------------------

def _block(tr: Transition, coord: str, var: str, chart_to: Chart, base_sigma):
    d = partial_derivative(tr.forward[coord], var)
    return substitute(d, base_sigma, target=chart_to)


def dvb_from_transition(tr: Transition, base: Chart, name: str) -> DoubleVectorBundle:
    """Read the blocks of a bigraded transition back into normal form.

    Raises ``ValueError`` if the transition is not of double vector bundle
    shape (the rebuilt transition must agree exactly).
    """
    tgt, src = tr.target, tr.source
    by_w = {(0, 1): [], (1, 0): [], (1, 1): []}
    for c in tgt.coords:
        if c.weight != (0, 0):
            by_w[c.weight].append(c.name)
    u, w, z = by_w[(1, 0)], by_w[(0, 1)], by_w[(1, 1)]
    base_names = base.names
    P = primed_chart(base)
    to_P = {c.name: (P.var(c.name) if c.name in P else src.zero()) for c in src.coords if c.weight == (0, 0)}
    to_base = {c.name: base.var(c.name) for c in tgt.coords if c.weight == (0, 0)}

    def fwd_block(rows, cols):
        return tuple(
            tuple(substitute(partial_derivative(tr.forward[cn], primed(rn)), to_P, target=P) for cn in cols)
            for rn in rows
        )

    def inv_block(rows, cols):
        # backward coefficients are functions of x; rewrite through x = base_forward(x')
        fmap = {x: substitute(tr.forward[x], to_P, target=P) for x in base_names}
        out = []
        for rn in rows:
            row = []
            for cn in cols:
                c = partial_derivative(tr.backward[primed(cn)], rn)
                c = substitute(c, to_base, target=base)
                row.append(substitute(c, fmap, target=P))
            out.append(tuple(row))
        return tuple(out)

    Tu, Tw, Tz = fwd_block(u, u), fwd_block(w, w), fwd_block(z, z)
    Tu_inv, Tw_inv, Tz_inv = inv_block(u, u), inv_block(w, w), inv_block(z, z)
    mix = tuple(
        tuple(
            tuple(
                substitute(partial_derivative(partial_derivative(tr.forward[zn], primed(un)), primed(wn)), to_P, target=P)
                for zn in z
            )
            for wn in w
        )
        for un in u
    )
    base_fwd = {x: substitute(tr.forward[x], to_P, target=P) for x in base_names}
    base_bwd = {primed(x): substitute(tr.backward[primed(x)], to_base, target=base) for x in base_names}
    D = DoubleVectorBundle(base, tuple(u), tuple(w), tuple(z), Tu, Tu_inv, Tw, Tw_inv, Tz, Tz_inv, mix, base_fwd, base_bwd, name)
    if not _same_laws(D.transition(), tr):
        raise ValueError("transition is not of double vector bundle shape")
    return D


def _same_laws(a: Transition, b: Transition) -> bool:
    if set(a.target.names) != set(b.target.names) or set(a.source.names) != set(b.source.names):
        return False
    rs = {n: a.source.var(n) for n in b.source.names}
    for n, p in b.forward.items():
        if substitute(p, rs, target=a.source) != a.forward[n]:
            return False
    return True


def tangent_prolongation(E: VectorBundle) -> DoubleVectorBundle:
    """``TE``: sides ``E`` (fibre ``v``) and ``TM`` (``dx``), core ``dv`` (a copy of ``E``)."""
    tr = tangent_lift(E.transition(), odd=False, prefix="d")
    return dvb_from_transition(tr, E.base, "T" + E.name)


def cotangent_double(E: VectorBundle) -> DoubleVectorBundle:
    """``T*E``: sides ``E`` (``v``) and ``E*`` (``p_v``), core ``T*M`` (``p_x``)."""
    tr = cotangent_lift(E.transition())
    return dvb_from_transition(tr, E.base, "T*" + E.name)


def cotangent_flip(E: VectorBundle):
    """The symplectic identification ``T*E -> T*E*`` as pullbacks both ways.

    ``v_d -> p_v``, ``p_v_d -> -v``, ``p_x -> p_x``.  Returns the pullback of
    ``T*E*`` coordinates to ``T*E`` and its inverse.
    """
    Ed = E.dual()
    tE = cotangent_lift(E.transition()).target
    tD = cotangent_lift(Ed.transition()).target
    fwd, bwd = {}, {}
    for x in E.base.names:
        for n in (x, "p_" + x):
            fwd[n] = tE.var(n)
            bwd[n] = tD.var(n)
    for v, vd in zip(E.fibre, Ed.fibre):
        fwd[vd] = tE.var("p_" + v)
        fwd["p_" + vd] = -tE.var(v)
        bwd["p_" + v] = tD.var(vd)
        bwd[v] = -tD.var("p_" + vd)
    return fwd, bwd


def flip_as_dvb_iso(E: VectorBundle) -> Report:
    """The flip exchanges the sides, respects both transition laws and the canonical brackets."""
    report = Report("flip", E.name)
    t1 = cotangent_lift(E.transition())
    t2 = cotangent_lift(E.dual().transition())
    fwd, bwd = cotangent_flip(E)
    src1 = t1.source
    fwd_primed = {primed(k): embed_rename(v, src1) for k, v in fwd.items()}
    for c in t2.target.coords:
        img = fwd[c.name]
        if c.weight != tuple(reversed(weight_or_zero(img))):
            report.fail("flip-exchanges-sides", (c.name,), img)
        # flip then tau_E  ==  tau_E* then flip'
        lhs = t1.pullback(img)
        rhs = substitute(t2.forward[c.name], fwd_primed, target=src1)
        if lhs != rhs:
            report.fail("flip-commutes-with-transitions", (c.name,), lhs - rhs)
    for c in t1.target.coords:
        back = substitute(bwd[c.name], fwd, target=t1.target)
        if back != t1.target.var(c.name):
            report.fail("flip^-1.flip=id", (c.name,), back - t1.target.var(c.name))
    _, B1 = canonical_cotangent(E.transition().target)
    _, B2 = canonical_cotangent(E.dual().transition().target)
    flip_tr = Transition(t1.target, t2.target, fwd, bwd, "flip")
    for pair, res in is_poisson_map(flip_tr, B1, B2):
        report.fail("flip-symplectic", pair, res)
    return report


def weight_or_zero(p: SuperPolynomial):
    w = weight_of(p)
    return w if w is not None else (0,) * p.chart.multiplicity


def embed_rename(p: SuperPolynomial, primed_chart_: Chart) -> SuperPolynomial:
    """Move a polynomial on an unprimed chart to the primed chart with the same layout."""
    return substitute(p, {c.name: primed_chart_.var(primed(c.name)) for c in p.chart.coords}, target=primed_chart_)


# canonical identifications ------------------------------------------------------

def negate_core(D: DoubleVectorBundle) -> DoubleVectorBundle:
    """Image of ``D`` under ``z -> -z``: only the mixing term changes sign."""
    mix = tuple(tuple(tuple(-t for t in row) for row in plane) for plane in D.Tmix)
    return replace(D, Tmix=mix)


def dual_cycle_check(D: DoubleVectorBundle) -> Report:
    """Twice over one side is the identity; ``A, B, A`` lands on ``swap(D)`` up to ``z -> -z``."""
    report = Report("dual-cycle", D.name)
    for side in ("A", "B"):
        if not dualize(dualize(D, side), side).same_as(D):
            report.fail(f"dual-{side}{side}=id", (side,), "double dual differs")
    cyc = dualize(dualize(dualize(D, "A"), "B"), "A")
    if not negate_core(cyc).swap().same_as(D):
        report.fail("dual-ABA=swap", ("A", "B", "A"), "cycle does not close")
    tri = dualize(dualize(D, "A"), "B")
    if not negate_core(tri).swap().same_as(dualize(D, "B")):
        report.fail("dual-AB=swap(B)", ("A", "B"), "corner does not close")
    core, bstar = core_of(dualize(D, "A")), D.side_b().dual()
    if core.fibre != bstar.fibre or core.T != bstar.T or core.T_inv != bstar.T_inv:
        report.fail("core(D*A)=B*", ("core",), "core of the dual is not B*")
    return report


# random instances -----------------------------------------------------------------

def _unitriangular_inverse(N: Matrix, chart: Chart) -> Matrix:
    n = len(N)
    nil = tuple(tuple(N[i][j] - (1 if i == j else 0) for j in range(n)) for i in range(n))
    out = identity_matrix(chart, n)
    power = identity_matrix(chart, n)
    for _ in range(n):
        power = mat_mul(power, nil, chart)
        power = tuple(tuple(-v for v in row) for row in power)
        out = tuple(tuple(out[i][j] + power[i][j] for j in range(n)) for i in range(n))
    return out


def _random_linear(rng, chart: Chart, lo=-2, hi=2) -> SuperPolynomial:
    p = chart.const(rng.randint(lo, hi))
    for c in chart.coords:
        p = p + chart.var(c.name) * rng.randint(lo, hi)
    return p


def random_matrix_pair(rng, chart: Chart, n: int):
    """``T = N D`` with ``N`` unitriangular (lower or upper) linear and ``D`` rational diagonal.

    Entries of ``T`` are affine and those of ``T^-1`` have degree at most ``n - 1``.
    """
    lower = rng.random() < 0.5
    N = [
        [chart.one() if i == j else (_random_linear(rng, chart) if (i > j) == lower else chart.zero()) for j in range(n)]
        for i in range(n)
    ]
    diag = [Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2, 3])) for _ in range(n)]
    Dm = tuple(tuple(chart.const(diag[i]) if i == j else chart.zero() for j in range(n)) for i in range(n))
    Dinv = tuple(tuple(chart.const(1 / diag[i]) if i == j else chart.zero() for j in range(n)) for i in range(n))
    N = as_matrix(N, chart)
    T = mat_mul(N, Dm, chart)
    T_inv = mat_mul(Dinv, _unitriangular_inverse(N, chart), chart)
    return T, T_inv


def _random_base(rng, base: Chart):
    """Identity or a triangular polynomial automorphism ``x_k = x_k' + c_k + a_k x_1'^2``.

    Only ``x_1`` enters the quadratic terms, so the inverse stays quadratic.
    """
    P = primed_chart(base)
    names = base.names
    if rng.random() < 0.4:
        return identity_base_map(base)
    fwd, bwd = {}, {}
    c1 = rng.randint(-2, 2)
    for k, x in enumerate(names):
        c = c1 if k == 0 else rng.randint(-2, 2)
        a = rng.randint(-1, 1) if k else 0
        fwd[x] = P.var(primed(x)) + c + (P.var(primed(names[0])) ** 2 * a if a else 0)
        # x_1' = x_1 - c_1 is known first
        bwd[primed(x)] = base.var(x) - c - ((base.var(names[0]) - c1) ** 2 * a if a else 0)
    return fwd, bwd


def random_bundle(seed: int, max_rank: int = 2, max_base: int = 2) -> VectorBundle:
    rng = random.Random(seed)
    nb = rng.randint(1, max_base)
    n = rng.randint(1, max_rank)
    base = base_chart([f"x{i + 1}" for i in range(nb)])
    P = primed_chart(base)
    T, T_inv = random_matrix_pair(rng, P, n)
    fwd, bwd = _random_base(rng, base)
    return VectorBundle(base, tuple(f"v{i + 1}" for i in range(n)), T, T_inv, fwd, bwd, f"E{seed}")


def random_dvb(seed: int, max_rank: int = 2, max_base: int = 2) -> DoubleVectorBundle:
    """Seeded random double vector bundle, valid by construction."""
    rng = random.Random(seed)
    nb = rng.randint(1, max_base)
    nu, nw, nz = (rng.randint(1, max_rank) for _ in range(3))
    base = base_chart([f"x{i + 1}" for i in range(nb)])
    P = primed_chart(base)
    Tu, Tu_inv = random_matrix_pair(rng, P, nu)
    Tw, Tw_inv = random_matrix_pair(rng, P, nw)
    Tz, Tz_inv = random_matrix_pair(rng, P, nz)
    mix = tuple(
        tuple(tuple(_random_linear(rng, P, -1, 1) for _ in range(nz)) for _ in range(nw)) for _ in range(nu)
    )
    fwd, bwd = _random_base(rng, base)
    return DoubleVectorBundle(
        base,
        tuple(f"u{i + 1}" for i in range(nu)),
        tuple(f"w{i + 1}" for i in range(nw)),
        tuple(f"z{i + 1}" for i in range(nz)),
        Tu, Tu_inv, Tw, Tw_inv, Tz, Tz_inv, mix, fwd, bwd, f"D{seed}",
    )
