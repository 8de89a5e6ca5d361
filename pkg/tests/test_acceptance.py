"""Acceptance criteria, one test per criterion.

Every check is exact.  Each test prints one ``criterion N: PASS|FAIL`` line,
past pytest's capture; ``python tests/test_acceptance.py`` prints the same lines.
"""

import pathlib
import random
import sys
from itertools import combinations

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from gqk.algebroid import (  # noqa: E402
    four_fold_verdicts,
    from_antialgebroid,
    modular_representative,
    morphism_check,
    to_antialgebroid,
)
from gqk.brackets import bracket_eval  # noqa: E402
from gqk.catalog import algebroid_suite, b2, b2_bialgebra, bialgebroid_suite, morphism_suite, sl2  # noqa: E402
from gqk.doubles import (  # noqa: E402
    dualize,
    pairing_check,
    parity_reverse,
    random_bundle,
    random_dvb,
    validate_dvb,
)
from gqk.drinfeld import bialgebroid_verdicts, drinfeld_double, frame_bundle, pi2_cotangent_identification  # noqa: E402
from gqk.dsl import parse, serialize  # noqa: E402
from gqk.geometry import VolumeForm, apply, commutator, is_homological, lie_derivative_volume  # noqa: E402
from gqk.superpoly import ODD, parity_of, partial_derivative, polynomial, to_text  # noqa: E402

from strategies import CHART, random_field, random_poly  # noqa: E402

GOLDEN = pathlib.Path(__file__).parent / "golden"
DVB_SEEDS = range(100)
DESK = dict(max_rank=3, max_base=3)


def _line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"


# criteria -----------------------------------------------------------------

def criterion_1():
    suite = algebroid_suite()
    bad = []
    for A, valid in suite:
        verdicts = four_fold_verdicts(A)
        if len(verdicts) != 4 or set(verdicts.values()) != {valid}:
            bad.append(A.name)
    broken = sum(1 for _, v in suite if not v)
    ok = not bad and len(suite) >= 8 and broken >= 3
    return ok, f"{len(suite)} algebroids ({broken} broken), four verdicts agree; disagreements: {bad or 'none'}"


def criterion_2():
    suite = algebroid_suite()
    bad = []
    for A, _ in suite:
        chart, Q = to_antialgebroid(A)
        back = from_antialgebroid(chart, Q, name=A.name)
        if back != A or back.anchor != A.anchor or back.brackets != A.brackets:
            bad.append(A.name)
    return not bad, f"round trip exact on {len(suite) - len(bad)}/{len(suite)} algebroids"


def criterion_3():
    cases = morphism_suite()
    wrong = [label for label, Phi, A1, A2, exp in cases if morphism_check(Phi, A1, A2).passed != exp]
    pos = sum(1 for c in cases if c[4])
    neg = len(cases) - pos
    ok = not wrong and pos >= 4 and neg >= 2
    return ok, f"{pos} positive, {neg} negative morphism cases; misclassified: {wrong or 'none'}"


def criterion_4():
    minus_bad, plus_bad, mixing = [], [], 0
    for s in DVB_SEEDS:
        D = random_dvb(s, **DESK)
        if not validate_dvb(D).passed:
            minus_bad.append(s)
            continue
        DA, DB = dualize(D, "A"), dualize(D, "B")
        if not pairing_check(DA, DB).passed:
            minus_bad.append(s)
        plus = pairing_check(DA, DB, sign=1)
        if D.has_mixing():
            mixing += 1
            if plus.passed or not plus.violations or plus.violations[0].residue.is_zero():
                plus_bad.append(s)
        elif not plus.passed:
            plus_bad.append(s)
    ok = not minus_bad and not plus_bad
    return ok, (
        f"{len(DVB_SEEDS)} seeded DVBs ({mixing} with mixing): minus-sign failures {minus_bad or 'none'}, "
        f"plus-sign misbehaviour {plus_bad or 'none'}"
    )


def criterion_5():
    bad = []
    for s in DVB_SEEDS:
        D = random_dvb(s, **DESK)
        M = D.to_multi()
        ok = dualize(dualize(D, "A"), "A").same_as(D) and dualize(dualize(D, "B"), "B").same_as(D)
        ok = ok and parity_reverse(parity_reverse(D, [0]), [1]).same_as(parity_reverse(parity_reverse(D, [1]), [0]))
        ok = ok and parity_reverse(parity_reverse(D, [0]), [1]).same_as(parity_reverse(M, [0, 1]))
        if not ok:
            bad.append(s)
    return not bad, f"double duals and parity reversions coherent on {len(DVB_SEEDS) - len(bad)}/{len(DVB_SEEDS)} DVBs"


def criterion_6():
    suite = bialgebroid_suite()
    bad = []
    for D, expected in suite:
        verdicts = bialgebroid_verdicts(D)
        if set(verdicts.values()) != {expected}:
            bad.append(D.name)
    broken = sum(1 for _, e in suite if not e)
    ok = not bad and broken >= 2
    return ok, f"{len(suite)} bialgebroids ({broken} broken), QS/PQ/commutator verdicts agree; disagreements: {bad or 'none'}"


def criterion_7():
    bundles = [frame_bundle(A) for A, _ in algebroid_suite()] + [random_bundle(s, **DESK) for s in range(20)]
    bad = [E.name for E in bundles if not pi2_cotangent_identification(E).passed]
    dd = drinfeld_double(b2_bialgebra())
    mixed = bracket_eval(dd.bracket, dd.H_E, dd.H_Estar)
    homological = dd.Q.parity == ODD and is_homological(dd.Q)
    ok = not bad and mixed.is_zero() and homological
    return ok, (
        f"Pi^2(T*E) = T*(Pi E) on {len(bundles) - len(bad)}/{len(bundles)} bundles; "
        f"b2 {{H_E,H_E*}} = {to_text(mixed)}, Q homological: {homological}"
    )


def _densities(chart):
    names = chart.names
    out = [chart.one(), chart.const(3)]
    for a, b in combinations(names, 2):
        out.append(polynomial(chart, [(1, [a, b]), (2, [names[0]]), (1, {})]))
    return out


def criterion_8():
    sl2_rep = modular_representative(sl2())
    b2_rep = modular_representative(b2())
    _, Qb = to_antialgebroid(b2())
    closed = apply(Qb, b2_rep).is_zero()
    fields = [to_antialgebroid(A)[1] for A, valid in algebroid_suite() if valid]
    fields += [drinfeld_double(D).Q for D, ok in bialgebroid_suite() if ok]
    bad = 0
    checked = 0
    for Q in fields:
        for f in _densities(Q.chart):
            twice = lie_derivative_volume(Q, lie_derivative_volume(Q, VolumeForm(Q.chart, f)))
            checked += 1
            if not twice.density.is_zero():
                bad += 1
    ok = sl2_rep.is_zero() and not b2_rep.is_zero() and closed and bad == 0
    return ok, (
        f"sl2 -> {to_text(sl2_rep)}, b2 -> {to_text(b2_rep)} (Q-closed: {closed}); "
        f"L_Q L_Q = 0 on {checked - bad}/{checked} (field, density) pairs"
    )


def _kernel_cases(rng):
    failures = 0
    # supercommutativity
    for _ in range(250):
        p = random_poly(rng, parity=rng.choice([0, 1]))
        q = random_poly(rng, parity=rng.choice([0, 1]))
        sign = -1 if parity_of(p) == ODD and parity_of(q) == ODD else 1
        failures += p * q != sign * (q * p)
    # associativity
    for _ in range(250):
        p, q, r = random_poly(rng), random_poly(rng), random_poly(rng)
        failures += (p * q) * r != p * (q * r)
    # graded Leibniz rule for left derivatives
    for _ in range(250):
        p = random_poly(rng, parity=rng.choice([0, 1]))
        q = random_poly(rng)
        c = rng.choice(CHART.names)
        s = -1 if (CHART.coord(c).parity * (parity_of(p) or 0)) % 2 else 1
        lhs = partial_derivative(p * q, c)
        failures += lhs != partial_derivative(p, c) * q + s * p * partial_derivative(q, c)
    # graded Jacobi identity for vector fields
    for _ in range(250):
        X, Y, Z = (random_field(rng, max_terms=1) for _ in range(3))
        s = -1 if X.parity * Y.parity else 1
        lhs = commutator(X, commutator(Y, Z))
        rhs = commutator(commutator(X, Y), Z) + commutator(Y, commutator(X, Z)).scale(s)
        failures += lhs != rhs
    return 1000, failures


def criterion_9():
    count, failures = _kernel_cases(random.Random(20261014))
    files = sorted(GOLDEN.glob("*.gqk"))
    bad = [p.name for p in files if serialize(parse(p.read_text())) != p.read_text()]
    ok = failures == 0 and not bad and len(files) > 0
    return ok, f"{count} kernel property cases, {failures} failures; {len(files) - len(bad)}/{len(files)} golden files round-trip"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, crit in enumerate(CRITERIA, 1):
        ok, detail = crit()
        results.append(ok)
        print(_line(n, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
