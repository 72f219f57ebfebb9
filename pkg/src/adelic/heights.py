"""Naive and canonical heights of rational points, and exact preperiodicity.

The canonical height splits over places as
    h_f(x) = h_nv(x) + sum_v g_{F,v}(x),
where only the archimedean place and the primes dividing Res(F) contribute.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import mpmath
from mpmath import mp

from .green import green_value, sup_uF_bound
from .projmap import ProjPointQ, RationalMapP1, apply
from .qfield import ARCH, DEFAULT_PRECISION, Place, check_precision


@dataclass(frozen=True)
class HeightValue:
    value: mpmath.mpf
    certified_error: mpmath.mpf
    breakdown: dict = field(default_factory=dict)


def naive_height(x: ProjPointQ, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """log max(|a|, |b|) for the coprime lift (a : b)."""
    with mp.workprec(check_precision(precision)):
        return mpmath.log(max(abs(x.a), abs(x.b)))


def hrat(f: RationalMapP1, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Height of the coefficient vector; only the archimedean place survives normalisation."""
    with mp.workprec(check_precision(precision)):
        m = max(abs(c) for c in f.lift.coeffs0 + f.lift.coeffs1)
        return mpmath.log(m.numerator)


def height_places(f: RationalMapP1) -> list[Place]:
    return [ARCH] + [Place(p) for p in f.bad_primes]


def canonical_height(f: RationalMapP1, x: ProjPointQ, tol=1e-30,
                     precision: int = DEFAULT_PRECISION) -> HeightValue:
    """h_f(x) with certified error <= tol, split evenly over the contributing places."""
    check_precision(precision)
    places = height_places(f)
    with mp.workprec(precision):
        tol = mpmath.mpf(tol)
        share = tol / len(places)
        h0 = naive_height(x, precision)
        breakdown = {"naive": h0}
        total, err = h0, mpmath.mpf(0)
        for v in places:
            gv = green_value(f, x, v, share, precision)
            breakdown[str(v)] = gv.value
            total += gv.value
            err += gv.error
        return HeightValue(total, err, breakdown)


def average_height(f: RationalMapP1, g: RationalMapP1, E: Iterable[ProjPointQ], tol=1e-30,
                   precision: int = DEFAULT_PRECISION) -> HeightValue:
    """Mean over E of h_f + h_g; error <= 2 tol."""
    pts = list(E)
    if not pts:
        raise ValueError("empty point set")
    with mp.workprec(check_precision(precision)):
        total, err = mpmath.mpf(0), mpmath.mpf(0)
        per_point = {}
        for x in pts:
            a = canonical_height(f, x, tol, precision)
            b = canonical_height(g, x, tol, precision)
            per_point[str(x)] = (a.value, b.value)
            total += a.value + b.value
            err += a.certified_error + b.certified_error
        n = len(pts)
        return HeightValue(total / n, err / n, per_point)


def height_gap_bound(f: RationalMapP1, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """B_f = sum_v C1_v d/(d-1), a bound for |h_f - h_nv|."""
    d = f.degree
    with mp.workprec(check_precision(precision)):
        return sum((sup_uF_bound(f, v, precision) for v in height_places(f)), mpmath.mpf(0)) * d / (d - 1)


class Preperiodicity(str, Enum):
    PREPERIODIC = "PREPERIODIC"
    NOT_PREPERIODIC = "NOT_PREPERIODIC"


@dataclass(frozen=True)
class OrbitDecision:
    decision: Preperiodicity
    orbit: tuple[ProjPointQ, ...]
    tail: int | None = None      # m: first index on the cycle
    period: int | None = None    # n - m
    escape_index: int | None = None

    @property
    def is_preperiodic(self) -> bool:
        return self.decision is Preperiodicity.PREPERIODIC

    @property
    def witness(self) -> tuple[int, int] | None:
        """(m, n) with f^n(x) = f^m(x)."""
        if self.tail is None:
            return None
        return self.tail, self.tail + self.period


def is_preperiodic(f: RationalMapP1, x: ProjPointQ, precision: int = DEFAULT_PRECISION,
                   max_steps: int = 100_000) -> OrbitDecision:
    """Decide preperiodicity by exact iteration.

    Either a point repeats (PREPERIODIC, with the (m, n) witness) or some
    orbit point has naive height above B_f, which forces a positive
    canonical height.
    """
    bound = height_gap_bound(f, precision)
    seen: dict[ProjPointQ, int] = {}
    orbit: list[ProjPointQ] = []
    y = x
    with mp.workprec(precision):
        for k in range(max_steps):
            if y in seen:
                m = seen[y]
                return OrbitDecision(Preperiodicity.PREPERIODIC, tuple(orbit), m, k - m)
            seen[y] = k
            orbit.append(y)
            if naive_height(y, precision) > bound:
                return OrbitDecision(Preperiodicity.NOT_PREPERIODIC, tuple(orbit), escape_index=k)
            y = apply(f, y)
    raise RuntimeError("orbit neither closed nor escaped within max_steps")
