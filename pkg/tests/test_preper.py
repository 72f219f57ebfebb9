from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from adelic.preper import (
    UniformBoundInputs,
    common_preperiodic_numeric,
    common_rational_preperiodic,
    complex_preperiodic,
    height_box,
    preperiodic_spectrum,
    rational_preperiodic_points,
    squarefree_decomposition,
    uniform_bound_calculator,
)
from adelic.projmap import INFINITY, ProjPointQ, RationalMapP1

SQUARE = RationalMapP1.polynomial([1, 0, 0])
CHEB = RationalMapP1.polynomial([1, 0, -2])


def pts(*ss):
    return {ProjPointQ.parse(s) for s in ss}


def test_height_box():
    assert height_box(0) == 1
    assert height_box(mpmath.log(10)) == 10
    with pytest.raises(ValueError):
        height_box(-1)


def test_rational_preperiodic_points_square():
    found = {o.point for o in rational_preperiodic_points(SQUARE, mpmath.log(10))}
    assert found == pts("0", "1", "-1", "inf")


def test_rational_preperiodic_points_chebyshev():
    found = {o.point: o for o in rational_preperiodic_points(CHEB, mpmath.log(10))}
    assert set(found) == pts("0", "1", "-1", "2", "-2", "inf")
    assert found[ProjPointQ.parse("-2")].witness == (1, 2)


def test_common_points_carry_both_witnesses():
    common = common_rational_preperiodic(SQUARE, CHEB, mpmath.log(10))
    assert set(common) == pts("0", "1", "-1", "inf")
    for x, (a, b) in common.items():
        assert a.point == b.point == x


def test_squarefree_decomposition():
    # (z - 1)^2 (z + 2)
    dec = squarefree_decomposition([Fraction(2), Fraction(-3), Fraction(0), Fraction(1)])
    mult = sorted(k for _, k in dec)
    assert mult == [1, 2]


def test_complex_preperiodic_square_period_two():
    roots = complex_preperiodic(SQUARE, 0, 2, 256)
    with mp.workprec(256):
        finite = [r for r in roots if not r.is_infinity]
        # z^4 = z: 0 and the cube roots of unity, infinity once
        assert len(finite) == 4 and sum(r.multiplicity for r in roots) == 5
        for r in finite:
            assert r.converged and r.residual < mpmath.mpf(10) ** -60
            assert abs(r.value**4 - r.value) < mpmath.mpf(10) ** -60


def test_multiplicities_are_reported():
    roots = complex_preperiodic(SQUARE, 1, 2, 128)   # z^4 = z^2
    zero = [r for r in roots if r.value is not None and abs(r.value) < 1e-30]
    assert zero and zero[0].multiplicity == 2


def test_spectrum_deduplicates():
    spectrum = preperiodic_spectrum(SQUARE, 1, 2, 128)
    values = [r.value for r in spectrum if r.value is not None]
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            assert abs(values[i] - values[j]) > 1e-20


def test_numeric_matches_are_heuristic():
    rep = common_preperiodic_numeric(SQUARE, CHEB, 2, 3, precision=128)
    assert rep.label == "HEURISTIC"
    assert len(rep.matches) >= 4    # 0, 1, -1, infinity at least


def test_uniform_bound_calculator_example():
    res = uniform_bound_calculator(UniformBoundInputs(C=1, C_prime=0, C1=1, C2=0, eps=1, deg=2), 128)
    with mp.workprec(128):
        assert res.N == 19
        assert abs(res.small_height_branch - 8 * mpmath.log(8)) < mpmath.mpf(10) ** -30
        assert abs(res.large_height_branch - 4 * mpmath.log(2)) < mpmath.mpf(10) ** -30
        assert res.dominant == "small_height"


def test_uniform_bound_caps_C_at_one():
    a = uniform_bound_calculator(UniformBoundInputs(C=5, C_prime=0, C1=1, C2=0, eps=1, deg=2), 128)
    assert a.N == 19 and a.C_used == 1


def test_uniform_bound_rejects_bad_inputs():
    for kw in [dict(C=0), dict(C1=0.5), dict(eps=0), dict(C_prime=-1)]:
        args = dict(C=1, C_prime=0, C1=2, C2=0, eps=1, deg=0)
        args.update(kw)
        with pytest.raises(ValueError):
            UniformBoundInputs(**args)
