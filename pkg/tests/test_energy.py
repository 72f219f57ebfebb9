import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from adelic.energy import (
    AdelicEpsilon,
    GaloisSetQ,
    MapFamily,
    arch_regularized_kernel,
    circle_arcsine_energy,
    equilibrium_sample,
    exceptional_pair_lookup,
    mutual_energy_arch,
    pairing_lower_arch,
    potential_energy,
    regularized_set_energy,
    split_bound,
    u_parameter_scan,
)
from adelic.projmap import RationalMapP1, conjugate
from adelic.qfield import ARCH, Place

SQUARE = RationalMapP1.polynomial([1, 0, 0])
CHEB = RationalMapP1.polynomial([1, 0, -2])


def test_oracle_value():
    assert abs(circle_arcsine_energy() - 0.646131894143338) < 1e-12


def test_kernel_estimator_near_oracle():
    est = mutual_energy_arch(SQUARE, CHEB, depth=9)
    assert abs(est.value - circle_arcsine_energy()) <= 0.05 * circle_arcsine_energy()
    assert est.error >= 0


def test_potential_estimator_near_oracle():
    est = potential_energy(SQUARE, CHEB, depth=8)
    assert abs(est.value - circle_arcsine_energy()) < 5e-3


def test_estimators_symmetric_and_zero_on_diagonal():
    a = mutual_energy_arch(SQUARE, CHEB, depth=7)
    b = mutual_energy_arch(CHEB, SQUARE, depth=7)
    assert a.value == b.value
    assert mutual_energy_arch(CHEB, CHEB, depth=7).value == 0
    assert potential_energy(CHEB, CHEB).value == 0


def test_pairing_lower_is_half():
    e = mutual_energy_arch(SQUARE, CHEB, depth=7)
    p = pairing_lower_arch(SQUARE, CHEB, depth=7)
    assert p.value == e.value / 2 and p.label == "HEURISTIC"


def test_sample_is_deterministic_and_sized():
    a = equilibrium_sample(CHEB, 5)
    b = equilibrium_sample(CHEB, 5)
    assert np.array_equal(a.x0, b.x0) and np.array_equal(a.x1, b.x1)
    assert a.size == len(a.weights)


@pytest.mark.parametrize("f,seeds", [(CHEB, (2, 0)), (RationalMapP1.polynomial([1, 0, -1]), (0, 1j))])
def test_estimates_are_seed_independent(f, seeds):
    gaps = []
    for depth in (6, 8, 10):
        a, b = (mutual_energy_arch(f, SQUARE, depth=depth, seed_f=s).value for s in seeds)
        gaps.append(abs(a - b))
    assert gaps[0] > gaps[1] > gaps[2]


def test_conjugation_invariance_of_potential():
    f = RationalMapP1.from_coeffs([1, 0, 1], [0, 0, 2])
    g = RationalMapP1.from_coeffs([1, 1, 0], [0, 0, 1])
    phi = [[1, 1], [0, 2]]
    a = potential_energy(f, g, depth=8)
    b = potential_energy(conjugate(f, phi), conjugate(g, phi), depth=8)
    assert abs(a.value - b.value) <= 2 * max(a.error, b.error)


def test_regularized_kernel_limits():
    with mp.workprec(128):
        assert arch_regularized_kernel(Fraction(0), Fraction(1, 2), 128) == mpmath.log(mpmath.mpf(1) / 2)
        assert arch_regularized_kernel(Fraction(3), Fraction(1), 128) == mpmath.log(3)
        # continuous at D = 2 eps
        a = arch_regularized_kernel(mpmath.mpf(2) - mpmath.mpf(10) ** -20, 1, 128)
        assert abs(a - mpmath.log(2)) < 1e-15


def test_set_energy_singleton_example():
    res = regularized_set_energy(GaloisSetQ.of(["0"]), AdelicEpsilon.parse({"arch": "1/2"}))
    with mp.workprec(256):
        assert abs(res.lhs - mpmath.log(0.5)) < 1e-60 or abs(res.lhs - mpmath.log(mpmath.mpf(1) / 2)) < 1e-60
        assert res.holds


@st.composite
def set_and_eps(draw):
    E = draw(st.sets(st.fractions(min_value=-20, max_value=20, max_denominator=12), min_size=1, max_size=5))
    places = draw(st.lists(st.sampled_from(["arch", "2", "3", "5", "7"]), unique=True, max_size=3))
    eps = {v: draw(st.fractions(min_value=Fraction(1, 50), max_value=1, max_denominator=50)) for v in places}
    return sorted(E), eps


@given(set_and_eps())
@settings(max_examples=40, deadline=None)
def test_set_energy_inequality(data):
    E, eps = data
    res = regularized_set_energy(GaloisSetQ.of(E), AdelicEpsilon.parse(eps), 128)
    with mp.workprec(128):
        assert res.lhs - res.rhs >= -mpmath.mpf(10) ** -10
        assert abs(res.residual) < mpmath.mpf(10) ** -30


def test_input_validation():
    with pytest.raises(ValueError):
        GaloisSetQ.of([])
    with pytest.raises(ValueError):
        GaloisSetQ.of(["inf"])
    with pytest.raises(ValueError):
        AdelicEpsilon.parse({"2": "3/2"})
    with pytest.raises(ValueError):
        split_bound(SQUARE, CHEB, GaloisSetQ.of(["0"]), Fraction(1))


def test_split_bound_examples():
    E = GaloisSetQ.of(["0", "1", "-1"])
    same = split_bound(SQUARE, SQUARE, E, Fraction(1, 2))
    assert same.total_upper_bound == 0
    rep = split_bound(SQUARE, CHEB, E, Fraction(1, 2))
    lower = pairing_lower_arch(SQUARE, CHEB)
    assert rep.total_upper_bound >= lower.value - lower.error
    assert abs(rep.height_term) < 1e-25
    for t in rep.per_place_terms:
        assert t.contribution >= 0


def test_split_bound_grows_as_delta_shrinks_past_optimum():
    E = GaloisSetQ.of(["0"])
    vals = [split_bound(SQUARE, CHEB, E, Fraction(1, k)).holder_term for k in (4, 16, 256)]
    assert vals[0] < vals[1] < vals[2]


def test_exceptional_lookup():
    assert exceptional_pair_lookup(SQUARE, RationalMapP1.polynomial([1, 0, 0, 0])).family == "monomial"
    cheb3 = RationalMapP1.polynomial([1, 0, -3, 0])
    assert exceptional_pair_lookup(CHEB, cheb3).family == "chebyshev"
    assert exceptional_pair_lookup(SQUARE, RationalMapP1.polynomial([1, 0, 1])).status == "NOT_DETECTED"
    assert exceptional_pair_lookup(SQUARE, RationalMapP1.polynomial([4, 0, 0])).status == "NOT_DETECTED"
    assert exceptional_pair_lookup(SQUARE, CHEB).lattes == "UNKNOWN"


def test_parameter_scan():
    fam = MapFamily.shifted_square()
    res = u_parameter_scan(fam, [0, -2, 1j], depth=7)
    by_t = {r.t: r for r in res.rows}
    assert by_t[0].u == 0
    assert abs(by_t[-2].u - circle_arcsine_energy()) < 1e-2
    again = u_parameter_scan(fam, [0, -2, 1j], depth=7)
    assert [r.u for r in again.rows] == [r.u for r in res.rows]
