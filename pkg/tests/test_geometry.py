import itertools

import pytest
from hypothesis import given

from gqk import EVEN, ODD, Chart, to_text
from gqk.algebroid import to_antialgebroid
from gqk.catalog import algebroid_suite, b2, sl2
from gqk.errors import ChartMismatch, NonInvertibleDensity, ParityViolation
from gqk.geometry import (
    Transition,
    VectorField,
    VolumeForm,
    apply,
    commutator,
    cotangent_lift,
    de_rham_field,
    divergence,
    identity_transition,
    is_homological,
    lie_derivative_volume,
    related,
    tangent_chart,
    tangent_lift,
)
from gqk.superpoly import polynomial

from strategies import CHART, fields, polys

L = Chart.build("L", [("x", EVEN, 0), ("xi", ODD, 1)])
x, xi = L.var("x"), L.var("xi")
B2 = Chart.build("B", [("xi1", ODD, 1), ("xi2", ODD, 1)])
xi1, xi2 = B2.var("xi1"), B2.var("xi2")


def q_b2():
    return VectorField(B2, {"xi2": -xi1 * xi2}, ODD)


def test_apply_examples():
    X = VectorField(L, {"x": xi}, ODD)
    assert apply(X, x**2) == 2 * x * xi
    assert apply(q_b2(), xi2) == -xi1 * xi2
    assert apply(X, L.one()).is_zero()


def test_field_parity_is_checked():
    with pytest.raises(ParityViolation):
        VectorField(L, {"x": x}, ODD)


def test_commutator_examples():
    d_xi = VectorField(L, {"xi": L.one()}, ODD)
    X = VectorField(L, {"x": xi}, ODD)
    assert commutator(d_xi, X) == VectorField(L, {"x": L.one()}, EVEN)
    assert commutator(X, X).is_zero()
    assert commutator(q_b2(), q_b2()).is_zero()


def test_commutator_chart_mismatch():
    with pytest.raises(ChartMismatch):
        commutator(VectorField(L, {"x": xi}, ODD), q_b2())


def test_is_homological_examples():
    assert is_homological(VectorField(L, {"x": xi}, ODD))
    assert not is_homological(VectorField(L, {"x": x}, EVEN))
    assert is_homological(to_antialgebroid(sl2())[1])
    assert not is_homological(to_antialgebroid(sl2(perturbed=True))[1])


def test_related_examples():
    Q = q_b2()
    ident = {"xi1": xi1, "xi2": xi2}
    assert related(ident, Q, Q)
    # b2 -> abelian line killing e2: the line coordinate pulls back to xi1
    A1 = Chart.build("A", [("eta", ODD, 1)])
    zero_line = VectorField(A1, {}, ODD)
    assert related({"eta": xi1}, Q, zero_line)
    # rescaling e2 is an automorphism of [e1, e2] = e2; rescaling e1 is not
    assert related({"xi1": xi1, "xi2": 2 * xi2}, Q, Q)
    assert not related({"xi1": 2 * xi1, "xi2": xi2}, Q, Q)


def test_related_rejects_parity_change():
    with pytest.raises(ParityViolation):
        related({"xi1": xi1 * xi2, "xi2": xi2}, q_b2(), q_b2())


def test_divergence_examples():
    grading = VectorField(L, {"x": x, "xi": xi}, EVEN)
    assert divergence(grading).is_zero()
    assert to_text(divergence(q_b2())) == "xi1"
    dR = de_rham_field(tangent_chart(Chart.build("R2", [("x1", EVEN, 0), ("x2", EVEN, 0)]), odd=True))
    assert divergence(dR).is_zero()


def test_divergence_is_supertrace_of_linear_field():
    # matrix diag(3, 5) on (x | xi): supertrace 3 - 5
    X = VectorField(L, {"x": 3 * x, "xi": 5 * xi}, EVEN)
    assert divergence(X) == L.const(-2)
    # off-diagonal entries do not contribute
    C = Chart.build("C2", [("x", EVEN, 0), ("y", EVEN, 0)])
    Y = VectorField(C, {"x": 2 * C.var("y"), "y": 7 * C.var("y")}, EVEN)
    assert divergence(Y) == C.const(7)


def test_divergence_with_density():
    Q = q_b2()
    assert divergence(Q, VolumeForm(B2, B2.const(3))) == divergence(Q)
    X = VectorField(L, {"x": xi}, ODD)
    rho = VolumeForm(L, 1 + x * 0 + xi * xi)
    assert divergence(X, rho) == divergence(X)
    with pytest.raises(NonInvertibleDensity):
        divergence(X, VolumeForm(L, x))


def test_lie_derivative_examples():
    dR = VectorField(L, {"x": xi}, ODD)
    assert lie_derivative_volume(dR, VolumeForm(L)).density.is_zero()
    assert lie_derivative_volume(q_b2(), VolumeForm(B2)).density == xi1


def test_lie_derivative_squares_to_zero_on_suite():
    for A, valid in algebroid_suite():
        if not valid:
            continue
        chart, Q = to_antialgebroid(A)
        names = chart.names
        for combo in itertools.combinations(names, 2):
            f = polynomial(chart, [(1, list(combo)), (2, [names[0]])])
            once = lie_derivative_volume(Q, VolumeForm(chart, f))
            twice = lie_derivative_volume(Q, once)
            assert twice.density.is_zero(), (A.name, combo)


def test_modular_representative_is_closed():
    for A, valid in algebroid_suite():
        if valid:
            _, Q = to_antialgebroid(A)
            assert apply(Q, divergence(Q)).is_zero()


def test_homological_squares_to_zero_on_monomials():
    _, Q = to_antialgebroid(b2())
    chart = Q.chart
    for deg in range(1, 5):
        for mono in itertools.combinations_with_replacement(chart.names, deg):
            f = polynomial(chart, [(1, list(mono))])
            assert apply(Q, apply(Q, f)).is_zero()


def test_transition_round_trip_and_lifts():
    R = Chart.build("R", [("x", EVEN, 0)])
    Rp = Chart.build("R'", [("y", EVEN, 0)])
    t = Transition(R, Rp, {"y": R.var("x") + 1}, {"x": Rp.var("y") - 1}, "shift")
    assert t.is_valid()
    assert t.then(t.inverse()).is_valid()
    assert tangent_lift(t).is_valid()
    assert tangent_lift(t, odd=True).is_valid()
    assert cotangent_lift(t).is_valid()
    assert identity_transition(L).is_valid()
    broken = Transition(R, Rp, {"y": 2 * R.var("x")}, {"x": Rp.var("y")}, "bad")
    assert [v[0] for v in broken.check()] == ["backward-after-forward", "forward-after-backward"]


# properties ---------------------------------------------------------------

@given(fields(max_terms=1), fields(max_terms=1), fields(max_terms=1))
def test_graded_jacobi(X, Y, Z):
    s = -1 if X.parity * Y.parity else 1
    lhs = commutator(X, commutator(Y, Z))
    rhs = commutator(commutator(X, Y), Z) + commutator(Y, commutator(X, Z)).scale(s)
    assert lhs == rhs


@given(fields(max_terms=1), fields(max_terms=1), polys(max_terms=2))
def test_commutator_acts_as_commutator(X, Y, f):
    s = -1 if X.parity * Y.parity else 1
    assert apply(commutator(X, Y), f) == apply(X, apply(Y, f)) - s * apply(Y, apply(X, f))


@given(fields(CHART, max_terms=1), polys(), polys())
def test_apply_is_graded_derivation(X, f, g):
    for part_par, part in f.homogeneous_parts().items():
        s = -1 if X.parity * part_par else 1
        assert apply(X, part * g) == apply(X, part) * g + s * part * apply(X, g)
