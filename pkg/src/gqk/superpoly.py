"""Exact arithmetic in free supercommutative polynomial algebras over Q.

A :class:`Chart` is an ordered list of coordinates, each carrying a parity
and a weight vector.  A :class:`SuperPolynomial` is a finite sum of terms
``c * x1^a1 ... xn^an`` where odd coordinates appear with exponent 0 or 1
and every term is written in chart order.  Reordering odd factors into
chart order produces the Koszul sign.

Terms are stored as ``{(exponents, oddmask): Fraction}``: ``exponents`` is a
tuple aligned with the chart (odd entries are 0/1) and ``oddmask`` is the
bitmask of odd coordinates present.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .errors import ChartMismatch, ParityViolation, UnknownCoordinate, WeightViolation

EVEN = 0
ODD = 1


class _Mixed:
    """Marker for inhomogeneous values (parity or weight)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MIXED"

    def __reduce__(self):
        return (_Mixed, ())


MIXED = _Mixed()

Key = Tuple[Tuple[int, ...], int]


def parity_name(p: int) -> str:
    return "odd" if p % 2 else "even"


@dataclass(frozen=True)
class Coordinate:
    name: str
    parity: int
    weight: Tuple[int, ...]

    def __post_init__(self):
        if self.parity not in (EVEN, ODD):
            raise ParityViolation(f"parity of {self.name!r} must be 0 or 1")
        object.__setattr__(self, "weight", tuple(int(w) for w in self.weight))


@dataclass(frozen=True)
class Chart:
    """A named, ordered coordinate system with multi-Z weights."""

    name: str
    coords: Tuple[Coordinate, ...]
    multiplicity: int = 1
    _index: Dict[str, int] = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        index = {}
        for i, c in enumerate(coords):
            if c.name in index:
                raise ValueError(f"duplicate coordinate {c.name!r} in chart {self.name!r}")
            if len(c.weight) != self.multiplicity:
                raise WeightViolation(
                    f"coordinate {c.name!r} has weight of length {len(c.weight)}, "
                    f"chart {self.name!r} has multiplicity {self.multiplicity}"
                )
            index[c.name] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def build(cls, name, specs, multiplicity=None):
        """Chart from ``(name, parity, weight)`` triples; weight may be an int."""
        coords = []
        for cname, parity, weight in specs:
            if isinstance(weight, int):
                weight = (weight,)
            coords.append(Coordinate(cname, parity, tuple(weight)))
        if multiplicity is None:
            multiplicity = len(coords[0].weight) if coords else 1
        return cls(name, tuple(coords), multiplicity)

    def __len__(self):
        return len(self.coords)

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self.coords)

    @property
    def names(self):
        return [c.name for c in self.coords]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownCoordinate(f"{name!r} is not a coordinate of chart {self.name!r}") from None

    def coord(self, name: str) -> Coordinate:
        return self.coords[self.index(name)]

    def var(self, name: str) -> "SuperPolynomial":
        i = self.index(name)
        exps = [0] * len(self.coords)
        exps[i] = 1
        mask = (1 << i) if self.coords[i].parity else 0
        return SuperPolynomial(self, {(tuple(exps), mask): Fraction(1)})

    def const(self, value) -> "SuperPolynomial":
        value = Fraction(value)
        if not value:
            return SuperPolynomial(self, {})
        return SuperPolynomial(self, {(self.unit_key, 0): value})

    def zero(self) -> "SuperPolynomial":
        return SuperPolynomial(self, {})

    def one(self) -> "SuperPolynomial":
        return self.const(1)

    def vars(self):
        """All coordinates as polynomials, keyed by name."""
        return {c.name: self.var(c.name) for c in self.coords}

    @property
    def unit_key(self):
        return (0,) * len(self.coords)

    def renamed(self, name=None, mapping=None, parities=None, weights=None):
        """Copy with coordinates renamed / re-graded (same order)."""
        mapping = mapping or {}
        parities = parities or {}
        weights = weights or {}
        coords = []
        for c in self.coords:
            coords.append(
                Coordinate(
                    mapping.get(c.name, c.name),
                    parities.get(c.name, c.parity),
                    weights.get(c.name, c.weight),
                )
            )
        mult = len(coords[0].weight) if coords else self.multiplicity
        return Chart(name or self.name, tuple(coords), mult)


def _mul_sign(mask1: int, mask2: int) -> int:
    """Sign of reordering (odd part of m1)(odd part of m2) into chart order."""
    count = 0
    m = mask2
    while m:
        low = m & -m
        j = low.bit_length() - 1
        count += (mask1 >> (j + 1)).bit_count()
        m ^= low
    return -1 if count & 1 else 1


def _mul_keys(k1: Key, k2: Key):
    e1, m1 = k1
    e2, m2 = k2
    if m1 & m2:
        return None, 0
    return (tuple(a + b for a, b in zip(e1, e2)), m1 | m2), _mul_sign(m1, m2)


class SuperPolynomial:
    """Immutable element of the free supercommutative algebra on a chart."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Key, Fraction] | None = None):
        self.chart = chart
        # integral coefficients are kept as ints: int arithmetic is much cheaper
        clean = {}
        for k, v in (terms or {}).items():
            if v:
                if type(v) is not int and v.denominator == 1:
                    v = int(v.numerator)
                clean[k] = v
        self.terms = clean
        self._hash = None

    # construction helpers ------------------------------------------------
    def _coerce(self, other) -> "SuperPolynomial":
        if isinstance(other, SuperPolynomial):
            if other.chart is not self.chart and other.chart != self.chart:
                raise ChartMismatch(
                    f"operands live on charts {self.chart.name!r} and {other.chart.name!r}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return self.chart.const(other)
        return NotImplemented

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for k, v in other.terms.items():
            s = terms.get(k, 0) + v
            if s:
                terms[k] = s
            else:
                terms.pop(k, None)
        return SuperPolynomial(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return SuperPolynomial(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.chart.zero()
            return SuperPolynomial(self.chart, {k: v * other for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = self.chart.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.const(other)
        if not isinstance(other, SuperPolynomial):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart.name, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"SuperPolynomial({self.chart.name}: {to_text(self)})"

    def __str__(self):
        return to_text(self)

    # structure -----------------------------------------------------------
    def constant_term(self) -> Fraction:
        return self.terms.get((self.chart.unit_key, 0), Fraction(0))

    def homogeneous_parts(self, by="parity"):
        """Split into components keyed by parity (or weight vector)."""
        parts: Dict[object, Dict[Key, Fraction]] = {}
        for k, v in self.terms.items():
            tag = _key_parity(k) if by == "parity" else _key_weight(self.chart, k)
            parts.setdefault(tag, {})[k] = v
        return {t: SuperPolynomial(self.chart, d) for t, d in parts.items()}

    def degree(self) -> int:
        return max((sum(k[0]) for k in self.terms), default=0)

    def variables(self):
        """Names of coordinates that occur in some term."""
        used = set()
        for exps, _ in self.terms:
            for i, e in enumerate(exps):
                if e:
                    used.add(i)
        return [self.chart.coords[i].name for i in sorted(used)]


def _key_parity(k: Key) -> int:
    return k[1].bit_count() & 1


def _key_weight(chart: Chart, k: Key):
    w = [0] * chart.multiplicity
    for e, c in zip(k[0], chart.coords):
        if e:
            for j, cw in enumerate(c.weight):
                w[j] += e * cw
    return tuple(w)


def multiply(p: SuperPolynomial, q: SuperPolynomial) -> SuperPolynomial:
    """Supercommutative product of two polynomials on the same chart."""
    if p.chart is not q.chart and p.chart != q.chart:
        raise ChartMismatch(f"operands live on charts {p.chart.name!r} and {q.chart.name!r}")
    terms: Dict[Key, Fraction] = {}
    for k1, v1 in p.terms.items():
        for k2, v2 in q.terms.items():
            k, sign = _mul_keys(k1, k2)
            if not sign:
                continue
            s = terms.get(k, 0) + sign * v1 * v2
            if s:
                terms[k] = s
            else:
                del terms[k]
    return SuperPolynomial(p.chart, terms)


def _coord_index(p: SuperPolynomial, c) -> int:
    name = c.name if isinstance(c, Coordinate) else c
    return p.chart.index(name)


def partial_derivative(p: SuperPolynomial, c, side: str = "left") -> SuperPolynomial:
    """Derivative of ``p`` by coordinate ``c`` (a name or Coordinate).

    ``side="left"`` anticommutes an odd ``c`` to the front of each term
    before deleting it; ``side="right"`` moves it to the back.
    """
    i = _coord_index(p, c)
    odd = p.chart.coords[i].parity == ODD
    bit = 1 << i
    terms: Dict[Key, Fraction] = {}
    for (exps, mask), v in p.terms.items():
        e = exps[i]
        if not e:
            continue
        new = list(exps)
        new[i] = e - 1
        if odd:
            if side == "left":
                passed = (mask & (bit - 1)).bit_count()
            else:
                passed = (mask >> (i + 1)).bit_count()
            coeff = -v if passed & 1 else v
            key = (tuple(new), mask & ~bit)
        else:
            coeff = v * e
            key = (tuple(new), mask)
        terms[key] = terms.get(key, 0) + coeff
    return SuperPolynomial(p.chart, terms)


def right_derivative(p: SuperPolynomial, c) -> SuperPolynomial:
    return partial_derivative(p, c, side="right")


def weight_of(p: SuperPolynomial):
    """Weight vector of a homogeneous value, MIXED, or None for zero."""
    weights = {_key_weight(p.chart, k) for k in p.terms}
    if not weights:
        return None
    if len(weights) > 1:
        return MIXED
    return weights.pop()


def parity_of(p: SuperPolynomial):
    """0/1 for homogeneous values, MIXED, or None for zero."""
    parities = {_key_parity(k) for k in p.terms}
    if not parities:
        return None
    if len(parities) > 1:
        return MIXED
    return parities.pop()


def is_zero(p: SuperPolynomial) -> bool:
    return not p.terms


def substitute(
    p: SuperPolynomial,
    sigma: Mapping[str, SuperPolynomial],
    target: Chart | None = None,
    strict: bool = False,
) -> SuperPolynomial:
    """Apply the algebra homomorphism defined on coordinates by ``sigma``.

    ``sigma`` maps coordinate names of ``p.chart`` to polynomials over the
    target chart.  Coordinates that occur in ``p`` must all be mapped unless
    the target is ``p.chart`` itself, in which case missing ones are fixed.
    """
    if target is None:
        for v in sigma.values():
            target = v.chart
            break
        else:
            target = p.chart
    check_substitution(p.chart, sigma, strict=strict)
    same = target == p.chart

    images = []
    for c in p.chart.coords:
        img = sigma.get(c.name)
        if img is None and same:
            img = target.var(c.name)
        if img is not None and img.chart != target:
            raise ChartMismatch(f"image of {c.name!r} lives on {img.chart.name!r}, not {target.name!r}")
        images.append(img)

    powers: Dict[Tuple[int, int], SuperPolynomial] = {}

    def power(i, e):
        k = (i, e)
        if k not in powers:
            powers[k] = images[i] ** e
        return powers[k]

    result = target.zero()
    for (exps, _), v in p.terms.items():
        term = target.const(v)
        for i, e in enumerate(exps):
            if not e:
                continue
            if images[i] is None:
                raise UnknownCoordinate(
                    f"substitution does not define coordinate {p.chart.coords[i].name!r}"
                )
            term = term * power(i, e)
            if not term:
                break
        result = result + term
    return result


def check_substitution(chart: Chart, sigma: Mapping[str, SuperPolynomial], strict: bool = False):
    for name, img in sigma.items():
        c = chart.coord(name)
        par = parity_of(img)
        if par is not None and par != c.parity:
            raise ParityViolation(
                f"{name!r} is {parity_name(c.parity)} but its image {to_text(img)} is "
                f"{'inhomogeneous' if par is MIXED else parity_name(par)}"
            )
        if strict:
            w = weight_of(img)
            if w is not None and w != c.weight:
                raise WeightViolation(
                    f"{name!r} has weight {c.weight} but its image {to_text(img)} has weight "
                    f"{'MIXED' if w is MIXED else w}"
                )


def embed(p: SuperPolynomial, target: Chart) -> SuperPolynomial:
    """Reinterpret ``p`` on a chart containing all of its coordinates by name."""
    return substitute(p, {n: target.var(n) for n in p.chart.names if n in target}, target=target)


def reinterpret(p: SuperPolynomial, target: Chart) -> SuperPolynomial:
    """Move terms verbatim (same exponent keys, same coefficients) to ``target``.

    Used for parity reversion: the ordered monomial is kept and only the
    parity bookkeeping changes.  The charts must have the same length.
    """
    if len(target) != len(p.chart):
        raise ChartMismatch("reinterpretation needs charts of equal length")
    odd = [c.parity == ODD for c in target.coords]
    terms = {}
    for (exps, _), v in p.terms.items():
        if any(e > 1 for e, o in zip(exps, odd) if o):
            continue
        mask = 0
        for i, (e, o) in enumerate(zip(exps, odd)):
            if o and e:
                mask |= 1 << i
        terms[(exps, mask)] = v
    return SuperPolynomial(target, terms)


def inverse(p: SuperPolynomial) -> SuperPolynomial | None:
    """Multiplicative inverse, or None if ``p`` is not a unit.

    Units are exactly the polynomials whose purely even part is a nonzero
    constant; the remainder is nilpotent and the geometric series stops.
    """
    body = {}
    for k, v in p.terms.items():
        if k[1] == 0:
            body[k] = v
    c = body.get((p.chart.unit_key, 0))
    if not c or len(body) != 1:
        return None
    n = (p - c) * (Fraction(1) / c)
    result = p.chart.one()
    power = p.chart.one()
    while True:
        power = power * (-n)
        if not power:
            break
        result = result + power
    return result * (Fraction(1) / c)


# canonical text -----------------------------------------------------------

def _fmt_coeff(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _monomial_text(chart: Chart, exps) -> str:
    parts = []
    for e, c in zip(exps, chart.coords):
        if e == 1:
            parts.append(c.name)
        elif e > 1:
            parts.append(f"{c.name}^{e}")
    return "*".join(parts)


def sort_key(chart: Chart, key: Key):
    exps, mask = key
    odd_part = tuple(i for i in range(len(exps)) if (mask >> i) & 1)
    even_part = tuple(0 if (mask >> i) & 1 else e for i, e in enumerate(exps))
    return (odd_part, even_part)


def to_text(p: SuperPolynomial) -> str:
    """Canonical serialization; terms ordered by (odd part, even part)."""
    if not p.terms:
        return "0"
    out = []
    for key in sorted(p.terms, key=lambda k: sort_key(p.chart, k)):
        v = p.terms[key]
        mono = _monomial_text(p.chart, key[0])
        mag = abs(v)
        if not mono:
            body = _fmt_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_fmt_coeff(mag)}*{mono}"
        if not out:
            out.append(body if v > 0 else f"-{body}")
        else:
            out.append(f"+ {body}" if v > 0 else f"- {body}")
    return " ".join(out)


def polynomial(chart: Chart, terms: Iterable[Tuple[object, Mapping[str, int] | Iterable[str]]]):
    """Build a polynomial from ``(coeff, monomial)`` pairs.

    A monomial is either a mapping name→exponent (taken in chart order) or
    an ordered sequence of names multiplied left to right.
    """
    result = chart.zero()
    for coeff, mono in terms:
        term = chart.const(coeff)
        if isinstance(mono, Mapping):
            for name in sorted(mono, key=chart.index):
                term = term * chart.var(name) ** mono[name]
        else:
            for name in mono:
                term = term * chart.var(name)
        result = result + term
    return result
