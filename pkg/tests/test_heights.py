import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from adelic.heights import (
    Preperiodicity,
    average_height,
    canonical_height,
    height_gap_bound,
    hrat,
    is_preperiodic,
    naive_height,
)
from adelic.projmap import INFINITY, ProjPointQ, RationalMapP1, apply

from helpers import random_map, random_point

SQUARE = RationalMapP1.polynomial([1, 0, 0])
CHEB = RationalMapP1.polynomial([1, 0, -2])


def test_naive_height():
    with mp.workprec(128):
        assert naive_height(ProjPointQ.parse("-7/4"), 128) == mpmath.log(7)
        assert naive_height(INFINITY, 128) == 0


def test_square_map_height_is_naive():
    with mp.workprec(256):
        for s in ["3/5", "-12", "1/9"]:
            x = ProjPointQ.parse(s)
            h = canonical_height(SQUARE, x)
            assert abs(h.value - naive_height(x)) <= h.certified_error + mpmath.mpf(10) ** -70


@pytest.mark.parametrize("s", ["0", "2", "-1", "inf"])
def test_preperiodic_points_have_height_zero(s):
    with mp.workprec(256):
        h = canonical_height(CHEB, ProjPointQ.parse(s), tol=1e-40)
        assert abs(h.value) <= h.certified_error + mpmath.mpf(10) ** -70


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_height_scales_under_the_map(seed):
    rng = random.Random(seed)
    f = random_map(rng, 2, bound=5)
    x = random_point(rng, 20)
    with mp.workprec(256):
        a = canonical_height(f, x, 1e-25)
        b = canonical_height(f, apply(f, x), 1e-25)
        assert abs(b.value - 2 * a.value) <= 2 * a.certified_error + b.certified_error + mpmath.mpf(10) ** -60
        assert a.value >= -a.certified_error
        assert abs(a.value - naive_height(x)) <= height_gap_bound(f) + a.certified_error


def test_height_is_conjugation_invariant_under_scaling():
    # z -> z^2 - 2 conjugated by z -> 2z gives 2z^2 - 1; heights at matching points agree up to h(2)
    f = RationalMapP1.polynomial([2, 0, -1])
    with mp.workprec(256):
        a = canonical_height(f, ProjPointQ.parse("3"), 1e-30)
        b = canonical_height(CHEB, ProjPointQ.parse("6"), 1e-30)
        assert abs(a.value - b.value) <= 1e-29


def test_average_height_and_errors():
    with mp.workprec(256):
        pts = [ProjPointQ.parse(s) for s in ["0", "3"]]
        avg = average_height(SQUARE, CHEB, pts, 1e-30)
        h3 = canonical_height(CHEB, pts[1], 1e-30).value + mpmath.log(3)
        assert abs(avg.value - h3 / 2) <= 1e-29
    with pytest.raises(ValueError):
        average_height(SQUARE, CHEB, [])


def test_hrat_uses_normalised_lift():
    f = RationalMapP1.from_coeffs([Fraction(1, 2), 0, 3], [0, 0, 1])
    with mp.workprec(128):
        assert hrat(f, 128) == mpmath.log(6)


def test_preperiodicity_decisions():
    d = is_preperiodic(CHEB, ProjPointQ.parse("0"))
    assert d.decision is Preperiodicity.PREPERIODIC
    assert d.witness == (2, 3)
    d = is_preperiodic(CHEB, ProjPointQ.parse("1/2"))
    assert d.decision is Preperiodicity.NOT_PREPERIODIC and d.escape_index is not None
    d = is_preperiodic(SQUARE, ProjPointQ.parse("-1"))
    assert d.witness == (1, 2)
