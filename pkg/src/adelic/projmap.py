"""Rational maps of P^1 over Q through homogeneous lifts.

A binary form of degree k is stored as its coefficient list in the
monomials X^k, X^(k-1) Y, ..., Y^k.  Resultants and cofactors are computed
exactly over Z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import gmpy2
import mpmath
from mpmath import mp

from .qfield import (
    DEFAULT_PRECISION,
    Place,
    as_rational,
    check_precision,
    factor_integer,
    format_rational,
    log_prime,
    valuation,
)

MAX_ITERATE_DEGREE = 4096


# --------------------------------------------------------------------------
# binary forms over Z (coefficient lists, X-degree descending)
# --------------------------------------------------------------------------

def _kronecker_unsigned(a: Sequence[int], b: Sequence[int]) -> list[int]:
    # pack both lists into integers, multiply once, unpack
    bound = min(len(a), len(b)) * max(a) * max(b)
    nbytes = max(1, (bound.bit_length() + 8) // 8)
    pa = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in a), "little")
    pb = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in b), "little")
    n = len(a) + len(b) - 1
    # GMP multiplies large operands far faster than CPython's Karatsuba
    raw = int(gmpy2.mpz(pa) * gmpy2.mpz(pb)).to_bytes(n * nbytes, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") for i in range(n)]


def form_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of two integer binary forms."""
    if len(a) * len(b) <= 256:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    out = [0] * (len(a) + len(b) - 1)
    parts_a = ([max(c, 0) for c in a], [max(-c, 0) for c in a])
    parts_b = ([max(c, 0) for c in b], [max(-c, 0) for c in b])
    for sa, ua in ((1, parts_a[0]), (-1, parts_a[1])):
        if not any(ua):
            continue
        for sb, ub in ((1, parts_b[0]), (-1, parts_b[1])):
            if not any(ub):
                continue
            prod = _kronecker_unsigned(ua, ub)
            s = sa * sb
            for i, c in enumerate(prod):
                out[i] += s * c
    return out


def form_add(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) != len(b):
        raise ValueError("forms of different degree")
    return [x + y for x, y in zip(a, b)]


def form_scale(a: Sequence[int], c: int) -> list[int]:
    return [c * x for x in a]


def form_compose(coeffs: Sequence[int], g0: Sequence[int], g1: Sequence[int]) -> list[int]:
    """P(G0, G1) for a binary form P (coeffs) and forms G0, G1 of equal degree."""
    d = len(coeffs) - 1
    k = len(g0) - 1
    pow0 = [[1]]
    pow1 = [[1]]
    for _ in range(d):
        pow0.append(form_mul(pow0[-1], g0))
        pow1.append(form_mul(pow1[-1], g1))
    out = [0] * (d * k + 1)
    for i, c in enumerate(coeffs):
        if c:
            term = form_mul(pow0[d - i], pow1[i])
            for j, t in enumerate(term):
                out[j] += c * t
    return out


def form_eval(coeffs: Sequence, x0, x1):
    """Evaluate a binary form at (x0, x1); works for ints, Fractions, mpf/mpc and numpy arrays."""
    d = len(coeffs) - 1
    # c_i x0^(d-i) x1^i with both power ladders built once
    p0 = [x0 ** 0]
    for _ in range(d):
        p0.append(p0[-1] * x0)
    out = 0 * p0[0]
    p1 = x1 ** 0
    for i in range(d + 1):
        c = coeffs[i]
        if c:
            out = out + c * p0[d - i] * p1
        if i < d:
            p1 = p1 * x1
    return out


def _content(values: Iterable[int]) -> int:
    return reduce(math.gcd, (abs(v) for v in values), 0)


# --------------------------------------------------------------------------
# lifts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousLift:
    """F = (F0, F1), two binary forms of degree d with rational coefficients."""

    degree: int
    coeffs0: tuple[Fraction, ...]
    coeffs1: tuple[Fraction, ...]

    def __post_init__(self):
        c0 = tuple(as_rational(c) for c in self.coeffs0)
        c1 = tuple(as_rational(c) for c in self.coeffs1)
        if len(c0) != self.degree + 1 or len(c1) != self.degree + 1:
            raise ValueError(f"degree {self.degree} needs {self.degree + 1} coefficients per form")
        object.__setattr__(self, "coeffs0", c0)
        object.__setattr__(self, "coeffs1", c1)

    @classmethod
    def from_ints(cls, c0: Sequence[int], c1: Sequence[int]) -> "HomogeneousLift":
        return cls(len(c0) - 1, tuple(Fraction(c) for c in c0), tuple(Fraction(c) for c in c1))

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs0) and not any(self.coeffs1)

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs0 + self.coeffs1)

    def int_coeffs(self) -> tuple[list[int], list[int]]:
        if not self.is_integral:
            raise ValueError("lift has non-integral coefficients; normalise first")
        return [int(c) for c in self.coeffs0], [int(c) for c in self.coeffs1]

    def scaled(self, alpha: Fraction) -> "HomogeneousLift":
        alpha = as_rational(alpha)
        return HomogeneousLift(self.degree, tuple(alpha * c for c in self.coeffs0),
                               tuple(alpha * c for c in self.coeffs1))

    def __call__(self, x0, x1):
        return form_eval(self.coeffs0, x0, x1), form_eval(self.coeffs1, x0, x1)


def normalize_lift(F: HomogeneousLift) -> HomogeneousLift:
    """Coprime integer lift of the same map, first nonzero coefficient of F0 (else F1) positive."""
    if F.is_zero:
        raise ValueError("zero lift")
    allc = F.coeffs0 + F.coeffs1
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in allc), 1)
    ints = [int(c * den) for c in allc]
    g = _content(ints)
    ints = [c // g for c in ints]
    lead = next(c for c in ints if c)
    if lead < 0:
        ints = [-c for c in ints]
    d = F.degree
    return HomogeneousLift.from_ints(ints[: d + 1], ints[d + 1:])


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                # division is exact (Sylvester identity)
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def sylvester_matrix(F: HomogeneousLift) -> list[list[Fraction]]:
    """Rows X^(d-1-j) Y^j F0 then X^(d-1-j) Y^j F1, columns X^(2d-1-k) Y^k."""
    d = F.degree
    n = 2 * d
    rows = []
    for coeffs in (F.coeffs0, F.coeffs1):
        for j in range(d):
            row = [Fraction(0)] * n
            for i, c in enumerate(coeffs):
                row[i + j] = c
            rows.append(row)
    return rows


def resultant(F: HomogeneousLift) -> Fraction:
    """Res(F0, F1) as the Sylvester determinant (exact)."""
    m = sylvester_matrix(F)
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for row in m for c in row), 1)
    ints = [[int(c * den) for c in row] for row in m]
    return Fraction(bareiss_determinant(ints), den ** len(m))


def _inverse_exact(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular Sylvester matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def resultant_cofactors(F: HomogeneousLift) -> dict[str, list[Fraction]]:
    """Cofactor forms with Res*X^(2d-1) = A0 F0 + B0 F1 and Res*Y^(2d-1) = A1 F0 + B1 F1.

    They are rows of adj(Sylvester); integral when F is.  Returned as
    {"A0", "B0", "A1", "B1"}, each a degree d-1 coefficient list.
    """
    d = F.degree
    m = sylvester_matrix(F)
    res = resultant(F)
    if res == 0:
        raise ValueError("degenerate lift (Res = 0)")
    inv = _inverse_exact(m)
    # c.M = Res e_k  =>  c = Res * (row k of M^-1)
    cx = [res * c for c in inv[0]]
    cy = [res * c for c in inv[2 * d - 1]]
    return {"A0": cx[:d], "B0": cx[d:], "A1": cy[:d], "B1": cy[d:]}


def bezoutian(F: HomogeneousLift) -> list[list[Fraction]]:
    """Q with F0(X)F1(Y) - F1(X)F0(Y) = (X0 Y1 - X1 Y0) Q(X, Y).

    Returned as q[i][j], the coefficient of x^i y^j in the dehomogenised
    quotient (a(x)b(y) - b(x)a(y)) / (x - y), 0 <= i, j <= d - 1.
    """
    d = F.degree
    a = list(reversed(F.coeffs0))  # ascending powers of x in F0(x, 1)
    b = list(reversed(F.coeffs1))
    # numerator as polynomial in x with coefficients polynomials in y (ascending)
    P = [[a[i] * b[j] - b[i] * a[j] for j in range(d + 1)] for i in range(d + 1)]
    Q = [[Fraction(0)] * (d + 1) for _ in range(d)]
    # synthetic division by (x - y), from the top power of x down
    carry = [Fraction(0)] * (d + 2)
    for i in range(d, 0, -1):
        cur = [P[i][j] + (carry[j - 1] if j >= 1 else 0) for j in range(d + 1)]
        Q[i - 1] = cur
        carry = cur + [Fraction(0)]
    rem = [P[0][j] + (carry[j - 1] if j >= 1 else 0) for j in range(d + 1)]
    if any(rem):
        raise ArithmeticError("Bezoutian division left a remainder")
    return [row[:d] for row in Q]


# --------------------------------------------------------------------------
# points
# --------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ProjPointQ:
    """Point of P^1(Q) as a coprime integer pair (a : b), b > 0 or (1 : 0)."""

    a: int
    b: int

    def __post_init__(self):
        a, b = int(self.a), int(self.b)
        if a == 0 and b == 0:
            raise ValueError("(0 : 0) is not a projective point")
        g = math.gcd(a, b)
        a, b = a // g, b // g
        if b < 0 or (b == 0 and a < 0):
            a, b = -a, -b
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_rational(cls, x) -> "ProjPointQ":
        x = as_rational(x)
        return cls(x.numerator, x.denominator)

    @classmethod
    def parse(cls, s: str) -> "ProjPointQ":
        s = s.strip()
        if s.lower() in ("inf", "infinity", "oo"):
            return INFINITY
        return cls.from_rational(as_rational(s))

    @classmethod
    def from_pair(cls, x0: Fraction, x1: Fraction) -> "ProjPointQ":
        x0, x1 = as_rational(x0), as_rational(x1)
        den = x0.denominator * x1.denominator // math.gcd(x0.denominator, x1.denominator)
        return cls(int(x0 * den), int(x1 * den))

    @property
    def is_infinity(self) -> bool:
        return self.b == 0

    @property
    def value(self) -> Fraction:
        if self.b == 0:
            raise ValueError("point at infinity has no affine value")
        return Fraction(self.a, self.b)

    def __str__(self) -> str:
        return "inf" if self.b == 0 else format_rational(self.value)


INFINITY = ProjPointQ(1, 0)


class ProjPointC:
    """Point of P^1(C) as a pair of mpmath complex numbers."""

    __slots__ = ("x0", "x1")

    def __init__(self, x0, x1):
        x0, x1 = mpmath.mpc(x0), mpmath.mpc(x1)
        if x0 == 0 and x1 == 0:
            raise ValueError("(0 : 0) is not a projective point")
        self.x0, self.x1 = x0, x1
        self._renormalize()

    @classmethod
    def from_complex(cls, z) -> "ProjPointC":
        if z is None or (isinstance(z, float) and math.isinf(z)):
            return cls(1, 0)
        return cls(z, 1)

    @classmethod
    def from_q(cls, x: ProjPointQ) -> "ProjPointC":
        return cls(x.a, x.b)

    def _renormalize(self):
        m = max(abs(self.x0), abs(self.x1))
        if m < 0.5 or m > 2:
            self.x0 /= m
            self.x1 /= m

    def norm(self):
        return max(abs(self.x0), abs(self.x1))

    @property
    def value(self):
        """Affine coordinate, or None at infinity."""
        return None if self.x1 == 0 else self.x0 / self.x1

    def __repr__(self) -> str:
        return f"ProjPointC({mpmath.nstr(self.x0, 12)}, {mpmath.nstr(self.x1, 12)})"


# --------------------------------------------------------------------------
# maps
# --------------------------------------------------------------------------

class DegenerateMapError(ValueError):
    pass


@dataclass(frozen=True)
class RationalMapP1:
    """A rational map with a normalised integer lift and cached resultant."""

    lift: HomogeneousLift
    resultant: Fraction = field(compare=False)

    @classmethod
    def from_lift(cls, F: HomogeneousLift) -> "RationalMapP1":
        if F.degree < 1:
            raise ValueError("degree must be >= 1")
        G = normalize_lift(F)
        res = resultant(G)
        if res == 0:
            raise DegenerateMapError("degenerate map (Res = 0)")
        return cls(G, res)

    @classmethod
    def from_coeffs(cls, c0: Sequence, c1: Sequence) -> "RationalMapP1":
        if len(c0) != len(c1):
            raise ValueError("F0 and F1 need the same number of coefficients")
        return cls.from_lift(HomogeneousLift(len(c0) - 1, tuple(c0), tuple(c1)))

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "RationalMapP1":
        """z -> c_0 z^d + ... + c_d (coefficients highest degree first)."""
        d = len(coeffs) - 1
        return cls.from_coeffs(list(coeffs), [0] * d + [1])

    @classmethod
    def from_json(cls, obj) -> "RationalMapP1":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            d = int(obj["d"])
            c0 = [as_rational(c) for c in obj["F0"]]
            c1 = [as_rational(c) for c in obj["F1"]]
        except KeyError as exc:
            raise ValueError(f"map JSON missing field {exc}") from exc
        if len(c0) != d + 1 or len(c1) != d + 1:
            raise ValueError(f"map JSON: d={d} needs {d + 1} coefficients in F0 and F1")
        return cls.from_lift(HomogeneousLift(d, tuple(c0), tuple(c1)))

    def to_json(self) -> dict:
        return {
            "d": self.degree,
            "F0": [format_rational(c) for c in self.lift.coeffs0],
            "F1": [format_rational(c) for c in self.lift.coeffs1],
        }

    @property
    def degree(self) -> int:
        return self.lift.degree

    @cached_property
    def int_coeffs(self) -> tuple[list[int], list[int]]:
        return self.lift.int_coeffs()

    @cached_property
    def bad_primes(self) -> tuple[int, ...]:
        r = abs(self.resultant.numerator)
        return tuple(p for p, _ in factor_integer(r)) if r > 1 else ()

    def res_valuation(self, p: int) -> int:
        return valuation(self.resultant, p)

    @property
    def is_polynomial(self) -> bool:
        """True when infinity is totally invariant (F1 = c Y^d)."""
        c1 = self.lift.coeffs1
        return all(c == 0 for c in c1[:-1]) and c1[-1] != 0

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __str__(self) -> str:
        return f"RationalMapP1(d={self.degree}, F0={list(map(str, self.lift.coeffs0))}, F1={list(map(str, self.lift.coeffs1))})"


def sup_norm_F(F: HomogeneousLift | RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION):
    """log ||F||_v (max of coefficient absolute values)."""
    if isinstance(F, RationalMapP1):
        F = F.lift
    check_precision(precision)
    coeffs = [c for c in F.coeffs0 + F.coeffs1 if c != 0]
    with mp.workprec(precision):
        if v.is_archimedean:
            m = max(abs(c) for c in coeffs)
            return mpmath.log(m.numerator) - mpmath.log(m.denominator)
        k = max(-valuation(c, v.p) for c in coeffs)
        return k * log_prime(v.p, precision)


def chordal_distance_exact(x: ProjPointQ, y: ProjPointQ, v: Place) -> Fraction:
    """dist_v(x, y) = |X0 Y1 - X1 Y0|_v / (||X||_v ||Y||_v) for rational points."""
    cross = x.a * y.b - x.b * y.a
    if v.is_archimedean:
        return Fraction(abs(cross), max(abs(x.a), abs(x.b)) * max(abs(y.a), abs(y.b)))
    if cross == 0:
        return Fraction(0)
    # coprime integer lifts have p-adic norm 1
    e = valuation(cross, v.p)
    return Fraction(1, v.p**e)


def chordal_distance(x, y, v: Place, precision: int = DEFAULT_PRECISION):
    check_precision(precision)
    if isinstance(x, ProjPointQ) and isinstance(y, ProjPointQ):
        d = chordal_distance_exact(x, y, v)
        with mp.workprec(precision):
            return mpmath.mpf(d.numerator) / d.denominator
    if not v.is_archimedean:
        raise ValueError("ultrametric distance needs rational points")
    if isinstance(x, ProjPointQ):
        x = ProjPointC.from_q(x)
    if isinstance(y, ProjPointQ):
        y = ProjPointC.from_q(y)
    with mp.workprec(precision):
        return abs(x.x0 * y.x1 - x.x1 * y.x0) / (x.norm() * y.norm())


def apply(f: RationalMapP1, x, v: Place | None = None):
    """Image of a point; exact coprime lift for rational points."""
    if isinstance(x, ProjPointQ):
        c0, c1 = f.int_coeffs
        return ProjPointQ(form_eval(c0, x.a, x.b), form_eval(c1, x.a, x.b))
    if isinstance(x, ProjPointC):
        y0, y1 = f.lift(x.x0, x.x1)
        return ProjPointC(y0, y1)
    raise TypeError(f"unsupported point type {type(x).__name__}")


def compose_lifts(F: HomogeneousLift, G: HomogeneousLift) -> HomogeneousLift:
    """Lift of f o g (integer lifts)."""
    f0, f1 = F.int_coeffs()
    g0, g1 = G.int_coeffs()
    return HomogeneousLift.from_ints(form_compose(f0, g0, g1), form_compose(f1, g0, g1))


def iterate_lift(F: HomogeneousLift | RationalMapP1, n: int) -> HomogeneousLift:
    """Normalised lift of the n-th iterate (degree d^n)."""
    if isinstance(F, RationalMapP1):
        F = F.lift
    if n < 1:
        raise ValueError("n must be >= 1")
    F = normalize_lift(F)
    if F.degree**n > MAX_ITERATE_DEGREE:
        raise ValueError(f"iterate degree {F.degree}^{n} exceeds guard {MAX_ITERATE_DEGREE}")
    G = F
    for _ in range(n - 1):
        G = normalize_lift(compose_lifts(F, G))
    return G


def iterate_map(f: RationalMapP1, n: int) -> RationalMapP1:
    return RationalMapP1.from_lift(iterate_lift(f, n))


_IDENTITY = HomogeneousLift.from_ints([1, 0], [0, 1])


def preperiodicity_form(f: RationalMapP1, m: int, n: int) -> list[int]:
    """Homogeneous Phi = F0^(n) F1^(m) - F0^(m) F1^(n), degree d^n + d^m."""
    if not 0 <= m < n:
        raise ValueError("need 0 <= m < n")
    if f.degree**n > MAX_ITERATE_DEGREE:
        raise ValueError(f"iterate degree {f.degree}^{n} exceeds guard {MAX_ITERATE_DEGREE}")
    Fn = iterate_lift(f, n)
    Fm = _IDENTITY if m == 0 else iterate_lift(f, m)
    a0, a1 = Fn.int_coeffs()
    b0, b1 = Fm.int_coeffs()
    return [x - y for x, y in zip(form_mul(a0, b1), form_mul(b0, a1))]


def preperiodicity_polynomial(f: RationalMapP1, m: int, n: int) -> list[Fraction]:
    """Affine Phi(z) = Phi(z, 1), ascending powers, trailing zeros stripped.

    Its roots are the affine solutions of f^n(z) = f^m(z); infinity is
    handled separately (see :func:`infinity_multiplicity`).
    """
    form = preperiodicity_form(f, m, n)
    asc = [Fraction(c) for c in reversed(form)]
    while len(asc) > 1 and asc[-1] == 0:
        asc.pop()
    return asc


def infinity_multiplicity(form: Sequence[int]) -> int:
    """Order of vanishing of a binary form at (1 : 0)."""
    k = 0
    for c in form:
        if c != 0:
            break
        k += 1
    return k


# --------------------------------------------------------------------------
# Moebius conjugation
# --------------------------------------------------------------------------

def conjugate(f: RationalMapP1, phi: Sequence[Sequence[int]]) -> RationalMapP1:
    """phi^-1 o f o phi for phi(z) = (a z + b)/(c z + d) given as [[a, b], [c, d]]."""
    (a, b), (c, d) = phi
    a, b, c, d = (int(as_rational(t)) if as_rational(t).denominator == 1 else None for t in (a, b, c, d))
    if None in (a, b, c, d):
        raise ValueError("Moebius entries must be integers")
    if a * d - b * c == 0:
        raise ValueError("singular Moebius matrix")
    Phi0, Phi1 = [a, b], [c, d]
    f0, f1 = f.int_coeffs
    g0 = form_compose(f0, Phi0, Phi1)
    g1 = form_compose(f1, Phi0, Phi1)
    # adj(Phi) = [[d, -b], [-c, a]]
    h0 = form_add(form_scale(g0, d), form_scale(g1, -b))
    h1 = form_add(form_scale(g0, -c), form_scale(g1, a))
    return RationalMapP1.from_lift(HomogeneousLift.from_ints(h0, h1))
