from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from adelic.projmap import (
    INFINITY,
    DegenerateMapError,
    HomogeneousLift,
    ProjPointQ,
    RationalMapP1,
    apply,
    bezoutian,
    chordal_distance_exact,
    compose_lifts,
    conjugate,
    form_eval,
    form_mul,
    infinity_multiplicity,
    iterate_lift,
    iterate_map,
    preperiodicity_form,
    preperiodicity_polynomial,
    resultant,
    resultant_cofactors,
)
from adelic.qfield import ARCH, Place

coeff = st.integers(-9, 9)


def forms(d):
    return st.tuples(st.lists(coeff, min_size=d + 1, max_size=d + 1), st.lists(coeff, min_size=d + 1, max_size=d + 1))


@given(st.integers(1, 3).flatmap(forms))
@settings(max_examples=60, deadline=None)
def test_resultant_matches_sympy(cs):
    c0, c1 = cs
    assume(c0[0] != 0 and c1[0] != 0)
    F = HomogeneousLift.from_ints(c0, c1)
    x = sympy.Symbol("x")
    a = sympy.Poly(list(c0), x)
    b = sympy.Poly(list(c1), x)
    assert resultant(F) == sympy.resultant(a.as_expr(), b.as_expr(), x)


@given(st.integers(1, 3).flatmap(forms))
@settings(max_examples=60, deadline=None)
def test_cofactor_identity(cs):
    c0, c1 = cs
    F = HomogeneousLift.from_ints(c0, c1)
    res = resultant(F)
    assume(res != 0)
    d = F.degree
    cf = resultant_cofactors(F)
    lhs_x = [a + b for a, b in zip(form_mul(cf["A0"], c0), form_mul(cf["B0"], c1))]
    lhs_y = [a + b for a, b in zip(form_mul(cf["A1"], c0), form_mul(cf["B1"], c1))]
    assert lhs_x == [res] + [0] * (2 * d - 1)
    assert lhs_y == [0] * (2 * d - 1) + [res]
    assert all(Fraction(c).denominator == 1 for c in cf["A0"] + cf["B0"] + cf["A1"] + cf["B1"])


@given(st.integers(1, 3).flatmap(forms), coeff, st.integers(1, 9), coeff, st.integers(1, 9))
@settings(max_examples=60, deadline=None)
def test_bezoutian_identity(cs, x, xd, y, yd):
    c0, c1 = cs
    F = HomogeneousLift.from_ints(c0, c1)
    d = F.degree
    q = bezoutian(F)
    X, Y = Fraction(x, xd), Fraction(y, yd)
    a = lambda t: form_eval(c0, t, 1)
    b = lambda t: form_eval(c1, t, 1)
    lhs = a(X) * b(Y) - b(X) * a(Y)
    Q = sum(q[i][j] * X**i * Y**j for i in range(d) for j in range(d))
    assert lhs == (X - Y) * Q


def test_map_examples():
    f = RationalMapP1.polynomial([1, 0, -2])
    assert f.degree == 2 and f.resultant == 1 and f.bad_primes == ()
    assert apply(f, ProjPointQ.parse("1/2")) == ProjPointQ.parse("-7/4")
    assert apply(f, INFINITY) == INFINITY
    with pytest.raises(DegenerateMapError):
        RationalMapP1.from_json({"d": 2, "F0": ["1", "0", "0"], "F1": ["1", "0", "0"]})


def test_json_round_trip_negative():
    obj = {"d": 2, "F0": ["-3", "1", "-2"], "F1": ["5", "0", "-7"]}
    f = RationalMapP1.from_json(obj)
    assert RationalMapP1.from_json(f.to_json()) == f
    # the lift is normalised up to sign, so the stored form may flip both rows
    out = f.to_json()
    assert out["F0"] == obj["F0"] or out["F0"] == [str(-int(c)) for c in obj["F0"]]


def test_lift_normalisation():
    f = RationalMapP1.from_coeffs([Fraction(1, 2), 0, -1], [0, 0, Fraction(1, 2)])
    assert f.int_coeffs == ([1, 0, -2], [0, 0, 1])


def test_iterate_matches_composition():
    f = RationalMapP1.from_coeffs([2, -3, 5], [7, 1, -4])
    F2 = iterate_lift(f, 2)
    assert F2 == compose_lifts(f.lift, f.lift) or iterate_map(f, 2).lift == F2
    x = ProjPointQ.parse("3/5")
    assert apply(iterate_map(f, 3), x) == apply(f, apply(f, apply(f, x)))


def test_preperiodicity_form():
    f = RationalMapP1.polynomial([1, 0, 0])
    # z^2 = z, written homogeneously: X^2 Y - X Y^2
    assert preperiodicity_form(f, 0, 1) == [0, 1, -1, 0]
    assert infinity_multiplicity(preperiodicity_form(f, 0, 1)) == 1
    poly = preperiodicity_polynomial(f, 1, 2)   # z^4 - z^2
    assert [c for c in poly if c] == [-1, 1]


def test_conjugation():
    f = RationalMapP1.from_coeffs([2, -3, 5], [7, 1, -4])
    phi = [[1, 2], [3, -1]]
    g = conjugate(f, phi)
    # phi^-1 f phi: check on points
    def mob(m, x):
        (a, b), (c, d) = m
        return ProjPointQ.from_pair(a * x.a + b * x.b, c * x.a + d * x.b)
    inv = [[-1, -2], [-3, 1]]
    for s in ["0", "1", "-2/3", "inf", "5"]:
        x = ProjPointQ.parse(s)
        assert mob(phi, apply(g, x)) == apply(f, mob(phi, x))
    with pytest.raises(ValueError):
        conjugate(f, [[1, 2], [2, 4]])


@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50), st.fractions(max_denominator=50))
@settings(max_examples=100)
def test_chordal_distance_axioms(a, b, c):
    x, y, z = (ProjPointQ.from_rational(t) for t in (a, b, c))
    for v in (ARCH, Place(2), Place(3)):
        dxy = chordal_distance_exact(x, y, v)
        assert dxy == chordal_distance_exact(y, x, v)
        assert (dxy == 0) == (x == y)
    for v in (Place(2), Place(3)):
        # ultrametric on P^1(Q_p)
        assert chordal_distance_exact(x, z, v) <= max(chordal_distance_exact(x, y, v), chordal_distance_exact(y, z, v))
