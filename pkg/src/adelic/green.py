"""Local Green functions g_{F,v} and Hölder certificates at every place.

With u_F(x) = (1/d) log||F(X)|| - log||X|| the Green function is the series
g_F = sum_j d^-j u_F o f^j.  Everything here is driven by four per-map,
per-place numbers:

* C1, a bound for sup |u_F|;
* C2, a Lipschitz constant of u_F for the chordal distance;
* C3, a Lipschitz constant of f;
* R = |Res(F)|_v / ||F||_v^(2d).

At a finite place R comes from v_p(Res) and C1 from the largest content
valuation min(v(F0(X)), v(F1(X))) over primitive X in C_p^2; that maximum
sits at a root of F0 or F1 and is read off exactly from Newton polygons.  At the
archimedean place they come from the Sylvester adjugate (exact), a
branch-and-bound lower bound for ||F|| on the unit sphere and a grid upper
bound, both padded for floating-point error.

Archimedean chain used for the certificates (own derivation, lifts with
||X|| = ||Y|| = 1 and delta = dist(x, y)):

* the phase-aligned lift Y' of y satisfies ||X - Y'|| <= 4 delta for
  delta <= 1/2, so |u(x) - u(y)| <= 4 sigma delta / c_low where sigma is the
  larger coefficient sum and c_low = min ||F|| on the sphere; above 1/2 the
  oscillation bound is used, giving C2 = max(4 sigma / c_low, 2 osc_u);
* the Bezoutian Q of (F0, F1) gives dist(f x, f y) <= q / c_low^2 dist(x, y);
* summing the series up to N ~ alpha0 log(1/delta)/log d and bounding the
  tail by the oscillation gives |g(x) - g(y)| <= K delta^alpha0 with
  Lambda = max(2d, C3), alpha0 = log d / log Lambda, K = C2 Lambda + osc_g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np
import sympy
from mpmath import iv, mp

from .projmap import (
    ProjPointC,
    ProjPointQ,
    RationalMapP1,
    bezoutian,
    chordal_distance_exact,
    form_eval,
    resultant_cofactors,
)
from .qfield import ARCH, DEFAULT_PRECISION, Place, check_precision, log_prime, valuation

# relative padding applied to floating-point bounds before they are trusted
_FLOAT_SLACK = 1e-9
HOLDER_KAPPA = 1.5
VERIFY_GREEN_TOL = 1e-12


def _mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _log_fraction(x: Fraction) -> mpmath.mpf:
    return mpmath.log(x.numerator) - mpmath.log(x.denominator)


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ArchConstants:
    """eval_upper: ||F(X)|| <= eval_upper ||F|| ||X||^d.
    eval_lower: ||F(X)|| >= |Res| / (eval_lower ||F||^(2d-1)) ||X||^d.
    pair_div: |Q(X, Y)| <= pair_div ||X||^(d-1) ||Y||^(d-1) for the Bezoutian Q.
    """

    eval_upper: mpmath.mpf
    eval_lower: mpmath.mpf
    pair_div: mpmath.mpf


@dataclass(frozen=True)
class LocalGreenParams:
    place: Place
    C1: mpmath.mpf
    C2: mpmath.mpf
    C3: mpmath.mpf
    R: mpmath.mpf
    log_R: mpmath.mpf
    u_min: mpmath.mpf
    u_max: mpmath.mpf

    @property
    def osc_u(self) -> mpmath.mpf:
        return self.u_max - self.u_min


@dataclass(frozen=True)
class HolderCertificate:
    """|g(z) - g(w)| <= C min(dist_v(z, w), 1)^alpha.

    ``K`` and ``alpha0`` are the pair produced directly by the estimate;
    (C, alpha) trades exponent for constant so that C stays within a small
    factor of the oscillation of g.  ``formula_alpha`` is the closed-form
    exponent built from the worst-case shape of the constants, kept for
    comparison.
    """

    place: Place
    C: mpmath.mpf
    alpha: mpmath.mpf
    params: LocalGreenParams
    K: mpmath.mpf
    alpha0: mpmath.mpf
    osc_g: mpmath.mpf
    formula_alpha: mpmath.mpf

    def scaled(self, factor) -> "HolderCertificate":
        return HolderCertificate(self.place, self.C * factor, self.alpha, self.params, self.K,
                                 self.alpha0, self.osc_g, self.formula_alpha)

    def bound(self, dist) -> mpmath.mpf:
        return self.C * mpmath.mpf(min(dist, 1)) ** self.alpha


@dataclass(frozen=True)
class GreenValue:
    value: mpmath.mpf
    error: mpmath.mpf
    terms: int
    certified: bool
    place: Place


# --------------------------------------------------------------------------
# archimedean instance constants
# --------------------------------------------------------------------------

def _chart_coeffs(f: RationalMapP1):
    """Ascending float coefficients of F(z, 1) and F(1, w)."""
    c0, c1 = f.int_coeffs
    a1 = np.array([float(c) for c in reversed(c0)])
    b1 = np.array([float(c) for c in reversed(c1)])
    a2 = np.array([float(c) for c in c0])
    b2 = np.array([float(c) for c in c1])
    return (a1, b1), (a2, b2)


def _lip_poly(asc: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # sup of |p'| on the disk of radius rho
    k = np.arange(1, len(asc))
    dcoef = np.abs(asc[1:]) * k
    return np.polyval(dcoef[::-1], rho) if len(dcoef) else np.zeros_like(rho)


def _disk_min_lower(a: np.ndarray, b: np.ndarray, levels: int = 40, max_cells: int = 400_000) -> float:
    """Lower bound for min over |z| <= 1 of max(|a(z)|, |b(z)|), by branch and bound."""
    n = 16
    s = 1.0 / n
    grid = -1 + s + 2 * s * np.arange(n)
    cx, cy = np.meshgrid(grid, grid)
    c = (cx + 1j * cy).ravel()
    best = math.inf
    ra, rb = a[::-1], b[::-1]
    for level in range(levels):
        r = math.sqrt(2) * s
        c = c[np.abs(c) - r <= 1]
        if c.size == 0:
            break
        va = np.abs(np.polyval(ra, c))
        vb = np.abs(np.polyval(rb, c))
        inside = np.abs(c) <= 1
        if inside.any():
            best = min(best, float(np.maximum(va, vb)[inside].min()))
        rho = np.abs(c) + r
        lb = np.maximum(va - _lip_poly(a, rho) * r, vb - _lip_poly(b, rho) * r)
        target = 0.95 * best
        active = lb < target
        if not active.any():
            return target
        if 4 * int(active.sum()) > max_cells or level == levels - 1:
            return max(min(float(lb[active].min()), target), 0.0)
        c = c[active]
        s /= 2
        c = np.concatenate([c + s * off for off in (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j)])
    return max(0.95 * best, 0.0) if best < math.inf else 0.0


def _torus_max_upper(a: np.ndarray, b: np.ndarray, m: int = 4096) -> float:
    theta = 2 * np.pi * np.arange(m) / m
    z = np.exp(1j * theta)
    out = 0.0
    for p in (a, b):
        val = float(np.abs(np.polyval(p[::-1], z)).max())
        slope = float((np.abs(p[1:]) * np.arange(1, len(p))).sum())
        out = max(out, val + np.pi / m * slope)
    return out


@dataclass(frozen=True)
class _ArchData:
    sigma: Fraction          # max coefficient sum of F0, F1
    cofactor_sum: Fraction   # S: |Res| ||X||^(2d-1) <= S ||X||^(d-1) ||F(X)||
    c_low_cofactor: Fraction
    c_low: Fraction          # certified min of ||F(X)|| on ||X|| = 1
    sup_F: Fraction          # certified max of ||F(X)|| on ||X|| = 1
    bezout_sum: Fraction     # q


@lru_cache(maxsize=1024)
def _arch_data(f: RationalMapP1) -> _ArchData:
    c0, c1 = f.int_coeffs
    sigma = Fraction(max(sum(map(abs, c0)), sum(map(abs, c1))))
    cof = resultant_cofactors(f.lift)
    S = max(sum(abs(c) for c in cof["A0"] + cof["B0"]), sum(abs(c) for c in cof["A1"] + cof["B1"]))
    res = abs(f.resultant)
    c_low_cof = res / S
    (a1, b1), (a2, b2) = _chart_coeffs(f)
    lower = min(_disk_min_lower(a1, b1), _disk_min_lower(a2, b2))
    lower = lower * (1 - _FLOAT_SLACK) - _FLOAT_SLACK * float(sigma)
    c_low = c_low_cof
    if lower > 0 and Fraction(lower) > c_low:
        c_low = Fraction(lower)
    upper = _torus_max_upper(a1, b1) * (1 + _FLOAT_SLACK) + _FLOAT_SLACK * float(sigma)
    sup_F = min(sigma, Fraction(upper))
    sup_F = max(sup_F, c_low)
    q = sum(abs(c) for row in bezoutian(f.lift) for c in row)
    return _ArchData(sigma, Fraction(S), c_low_cof, c_low, sup_F, Fraction(q))


def arch_eval_constants(f: RationalMapP1, precision: int = DEFAULT_PRECISION) -> ArchConstants:
    """Instance constants of the two-sided evaluation bound at the archimedean place."""
    check_precision(precision)
    data = _arch_data(f)
    normF = max(abs(c) for c in f.lift.coeffs0 + f.lift.coeffs1)
    d = f.degree
    with mp.workprec(precision):
        return ArchConstants(
            eval_upper=mpmath.mpf(d + 1),
            eval_lower=_mpf(data.cofactor_sum / normF ** (2 * d - 1)),
            pair_div=_mpf(data.bezout_sum),
        )


# --------------------------------------------------------------------------
# local parameters
# --------------------------------------------------------------------------

def _place_key(v: Place):
    return v.p


# --------------------------------------------------------------------------
# finite places: exact content maximum
# --------------------------------------------------------------------------

_X, _T = sympy.symbols("x T")


def _affine(coeffs) -> sympy.Poly:
    """F(x, 1) for a form given X-degree-descending."""
    d = len(coeffs) - 1
    return sympy.Poly([int(c) for c in coeffs], _X, domain="ZZ") if any(coeffs) else sympy.Poly(0, _X, domain="ZZ")


def _primitive(coeffs):
    g = 0
    for c in coeffs:
        g = math.gcd(g, int(c))
    return [int(c) // g for c in coeffs]


def _unit_form(f: RationalMapP1, p: int) -> list[int]:
    """A monic form L (X-degree-descending) whose reduction mod p shares no zero with F0 F1 mod p."""
    c0, c1 = f.int_coeffs
    G = _affine(_primitive(c0)) * _affine(_primitive(c1))
    Gp = sympy.Poly(G.as_expr(), _X, modulus=p)
    top = len(_primitive(c0)) - 1 + len(_primitive(c1)) - 1
    inf_zero = Gp.degree() < top if not Gp.is_zero else True
    for t in range(p):
        if Gp.eval(t) % p != 0:
            return [1, -t]
    if not inf_zero:
        return [0, 1]   # the form Y
    k = 2
    while True:
        for tail in range(p ** k):
            digits = [(tail // p ** i) % p for i in range(k)]
            L = sympy.Poly([1] + digits[::-1], _X, modulus=p)
            if L.is_irreducible and sympy.gcd(L, Gp).degree() == 0:
                return [1] + digits[::-1]
        k += 1


def _max_root_valuation(chi: sympy.Poly, p: int) -> Fraction:
    """Largest p-adic valuation of a root of chi (chi(0) != 0)."""
    cs = chi.all_coeffs()[::-1]     # ascending
    v0 = valuation(int(cs[0]), p)
    best = None
    for j in range(1, len(cs)):
        if cs[j] != 0:
            s = Fraction(v0 - valuation(int(cs[j]), p), j)
            best = s if best is None or s > best else best
    return best


def _content_at_roots(P_coeffs, N_coeffs, L, p: int) -> Fraction:
    """max over roots a of the form P of v(N(a)) for primitive lifts a."""
    d = len(P_coeffs) - 1
    k = len(L) - 1
    best = Fraction(0)
    P = _affine(P_coeffs)
    # roots at infinity
    if P.degree() < d:
        best = max(best, Fraction(valuation(int(N_coeffs[0]), p)))   # N(1, 0) != 0 as Res != 0
    if P.degree() >= 1:
        # phi = N^k / L^d is a unit multiple of N(a)^k at every root
        Lx = _affine(L) if L != [0, 1] else sympy.Poly(1, _X, domain="ZZ")
        num = _affine(N_coeffs) ** k
        den = Lx ** d
        chi = sympy.Poly(sympy.resultant(P.as_expr(), _T * den.as_expr() - num.as_expr(), _X), _T)
        best = max(best, _max_root_valuation(chi, p) / k)
    return best


@lru_cache(maxsize=1024)
def content_valuation_max(f: RationalMapP1, p: int) -> Fraction:
    """max over P^1(C_p) of min(v(F0(X)), v(F1(X))) with X primitive; at most v_p(Res)."""
    if f.res_valuation(p) == 0:
        return Fraction(0)
    c0, c1 = f.int_coeffs
    L = _unit_form(f, p)
    e = max(_content_at_roots(c0, c1, L, p), _content_at_roots(c1, c0, L, p))
    return min(e, Fraction(f.res_valuation(p)))


@lru_cache(maxsize=4096)
def _local_params_cached(f: RationalMapP1, p, precision: int) -> LocalGreenParams:
    v = Place(p)
    d = f.degree
    with mp.workprec(precision):
        if v.is_archimedean:
            data = _arch_data(f)
            normF = max(abs(c) for c in f.lift.coeffs0 + f.lift.coeffs1)
            log_R = _log_fraction(abs(f.resultant)) - 2 * d * _log_fraction(normF)
            u_min = _log_fraction(data.c_low) / d
            u_max = _log_fraction(data.sup_F) / d if data.sup_F != data.c_low else u_min
            C1 = max(abs(u_min), abs(u_max))
            osc = u_max - u_min
            C2 = max(4 * _mpf(data.sigma) / _mpf(data.c_low), 2 * osc)
            C3 = _mpf(data.bezout_sum) / _mpf(data.c_low) ** 2
            return LocalGreenParams(v, C1, C2, C3, mpmath.exp(log_R), log_R, u_min, u_max)
        r = f.res_valuation(p)
        lp = log_prime(p, precision)
        log_R = -r * lp
        R = mpmath.mpf(1) / mpmath.mpf(p) ** r
        e = content_valuation_max(f, p)
        C1 = _mpf(e) * lp / d
        C2 = C1 / R if r else mpmath.mpf(0)
        return LocalGreenParams(v, C1, C2, 1 / R**2, R, log_R, -C1, mpmath.mpf(0))


def local_params(f: RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION) -> LocalGreenParams:
    check_precision(precision)
    return _local_params_cached(f, v.p, precision)


def sup_uF_bound(f: RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """C1: sup |u_F| <= C1.  At a finite place this is v_p(Res) log p / d."""
    return local_params(f, v, precision).C1


def lip_uF_bound(f: RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """C2: |u_F(x) - u_F(y)| <= C2 dist_v(x, y)."""
    return local_params(f, v, precision).C2


def res_radius(f: RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """R = |Res|_v / ||F||_v^(2d); at a finite place u_F is constant on balls of radius R."""
    return local_params(f, v, precision).R


def lip_f_bound(f: RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """C3: dist_v(f x, f y) <= C3 dist_v(x, y)."""
    return local_params(f, v, precision).C3


# --------------------------------------------------------------------------
# u_F and Green values
# --------------------------------------------------------------------------

def _vp_residue(y: int, p: int, k: int) -> int:
    if y == 0:
        return k
    return min(int(gmpy2.remove(gmpy2.mpz(y), p)[1]), k)


def _content_exponent(f: RationalMapP1, x: ProjPointQ, p: int) -> int:
    c0, c1 = f.int_coeffs
    y0, y1 = form_eval(c0, x.a, x.b), form_eval(c1, x.a, x.b)
    return min(_vp_residue(y0, p, 1 << 62), _vp_residue(y1, p, 1 << 62))


def u_F(f: RationalMapP1, x, v: Place, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """(1/d) log||F(X)||_v - log||X||_v, independent of the lift X."""
    check_precision(precision)
    d = f.degree
    with mp.workprec(precision):
        if not v.is_archimedean:
            if not isinstance(x, ProjPointQ):
                raise ValueError("ultrametric distance needs rational points")
            e = _content_exponent(f, x, v.p)
            return -e * log_prime(v.p, precision) / d
        if isinstance(x, ProjPointQ):
            c0, c1 = f.int_coeffs
            y = max(abs(form_eval(c0, x.a, x.b)), abs(form_eval(c1, x.a, x.b)))
            return mpmath.log(y) / d - mpmath.log(max(abs(x.a), abs(x.b)))
        y0, y1 = f.lift(x.x0, x.x1)
        return mpmath.log(max(abs(y0), abs(y1))) / d - mpmath.log(x.norm())


def tail_terms(C1, d: int, tol) -> int:
    """Smallest N with C1 d^(-N) d/(d-1) <= tol."""
    C1 = mpmath.mpf(C1)
    tol = mpmath.mpf(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if C1 == 0:
        return 0
    n = int(mpmath.ceil(mpmath.log(C1 * d / ((d - 1) * tol)) / mpmath.log(d)))
    n = max(n, 0)
    while C1 * mpmath.mpf(d) ** (1 - n) / (d - 1) > tol:
        n += 1
    return n


def _tail(C1, d: int, n: int) -> mpmath.mpf:
    return mpmath.mpf(C1) * mpmath.mpf(d) ** (1 - n) / (d - 1)


def finite_content_exponents(f: RationalMapP1, x: ProjPointQ, p: int, n: int) -> list[int]:
    """e_j = v_p(content of F(X_j)) for the first n orbit points, computed mod p^K."""
    r = f.res_valuation(p)
    c0, c1 = f.int_coeffs
    k = n * r + r + 1
    mod = p**k
    x0, x1 = x.a % mod, x.b % mod
    out = []
    for _ in range(n):
        y0 = form_eval(c0, x0, x1) % mod
        y1 = form_eval(c1, x0, x1) % mod
        e = min(_vp_residue(y0, p, k), _vp_residue(y1, p, k))
        if e > r:
            raise ArithmeticError("content exponent exceeds v_p(Res); precision bookkeeping failed")
        out.append(e)
        k -= e
        mod = p**k
        pe = p**e
        x0, x1 = (y0 // pe) % mod, (y1 // pe) % mod
    return out


def _imax(x, y):
    return iv.mpf([max(x.a, y.a), max(x.b, y.b)])


def _arch_green_interval(f: RationalMapP1, x: ProjPointQ, n: int, C1, wp: int):
    """Interval sum of the first n series terms; stops early if the orbit enclosure degrades."""
    d = f.degree
    c0, c1 = f.int_coeffs
    old = iv.prec
    iv.prec = wp
    try:
        k0 = [iv.mpf(c) for c in c0]
        k1 = [iv.mpf(c) for c in c1]
        one = iv.mpf(1)
        if abs(x.a) <= abs(x.b):
            affine, t = True, iv.mpf(x.a) / iv.mpf(x.b)
        else:
            affine, t = False, iv.mpf(x.b) / iv.mpf(x.a)
        total = iv.mpf(0)
        weight = iv.mpf(1)
        stop = n
        for j in range(n):
            X0, X1 = (t, one) if affine else (one, t)
            A = form_eval(k0, X0, X1)
            B = form_eval(k1, X0, X1)
            aA, aB = abs(A), abs(B)
            m = _imax(aA, aB)
            if not m.a > 0:
                stop = j
                break
            total += weight * (iv.log(m) / d - iv.log(_imax(abs(t), one)))
            weight /= d
            if j == n - 1:
                break
            if aA.mid >= aB.mid:
                if not aA.a > 0:
                    stop = j + 1
                    break
                affine, t = False, B / A
            else:
                if not aB.a > 0:
                    stop = j + 1
                    break
                affine, t = True, A / B
            if t.delta > 1:
                stop = j + 1
                break
        lo, hi = mpmath.mpf(total.a), mpmath.mpf(total.b)
    finally:
        iv.prec = old
    return lo, hi, stop


def green_value(f: RationalMapP1, x, v: Place, tol=1e-30, precision: int = DEFAULT_PRECISION) -> GreenValue:
    """g_{F,v}(x) with error bound <= tol.

    Finite places: exact partial sum (integer exponents) plus a certified
    geometric tail; identically 0 at primes of good reduction.  Archimedean
    place: certified interval evaluation for rational points, plain
    multiprecision evaluation (uncertified rounding) for complex points.
    """
    check_precision(precision)
    d = f.degree
    with mp.workprec(precision):
        tol = mpmath.mpf(tol)
        if tol <= 0:
            raise ValueError("tol must be positive")
        if not v.is_archimedean:
            if not isinstance(x, ProjPointQ):
                raise ValueError("ultrametric distance needs rational points")
            r = f.res_valuation(v.p)
            if r == 0:
                return GreenValue(mpmath.mpf(0), mpmath.mpf(0), 0, True, v)
            C1 = sup_uF_bound(f, v, precision)
            n = tail_terms(C1, d, tol)
            es = finite_content_exponents(f, x, v.p, n)
            s = sum(Fraction(e, d**j) for j, e in enumerate(es))
            value = -_mpf(s) * log_prime(v.p, precision) / d
            return GreenValue(value, _tail(C1, d, n), n, True, v)

        params = local_params(f, ARCH, precision)
        C1 = params.C1
        n = tail_terms(C1, d, tol / 2)
        if isinstance(x, ProjPointQ):
            growth = max(float(params.C3), 2.0)
            wp = precision + 64 + int(math.ceil(min(n, 64) * math.log2(growth)))
            for _ in range(8):
                lo, hi, stop = _arch_green_interval(f, x, n, C1, wp)
                value = (lo + hi) / 2
                err = (hi - lo) / 2 + _tail(C1, d, stop) + abs(value) * mpmath.mpf(2) ** (-precision)
                if err <= tol:
                    return GreenValue(+value, err, n, True, v)
                wp *= 2
            raise ArithmeticError(f"interval evaluation did not reach tol {mpmath.nstr(tol, 5)}")
        if not isinstance(x, ProjPointC):
            raise TypeError(f"unsupported point type {type(x).__name__}")
        total = mpmath.mpf(0)
        y0, y1 = x.x0, x.x1
        nrm = max(abs(y0), abs(y1))
        y0, y1 = y0 / nrm, y1 / nrm
        for j in range(n):
            z0, z1 = f.lift(y0, y1)
            m = max(abs(z0), abs(z1))
            total += mpmath.log(m) / (d * mpmath.mpf(d) ** j)
            y0, y1 = z0 / m, z1 / m
        return GreenValue(total, _tail(C1, d, n), n, False, v)


def green_batch_coeffs(c0: np.ndarray, c1: np.ndarray, x0: np.ndarray, x1: np.ndarray, n: int) -> np.ndarray:
    """n-term double-precision Green sums for a lift with (possibly complex) coefficient arrays."""
    d = len(c0) - 1
    x0 = np.asarray(x0, dtype=complex)
    x1 = np.asarray(x1, dtype=complex)
    m = np.maximum(np.abs(x0), np.abs(x1))
    x0, x1 = x0 / m, x1 / m
    g = np.zeros(x0.shape)
    w = 1.0 / d
    for _ in range(n):
        y0 = form_eval(c0, x0, x1)
        y1 = form_eval(c1, x0, x1)
        m = np.maximum(np.abs(y0), np.abs(y1))
        g += w * np.log(m)
        w /= d
        x0, x1 = y0 / m, y1 / m
    return g


def numeric_u_range(c0: np.ndarray, c1: np.ndarray) -> tuple[float, float]:
    """Padded (min, max) of u_F on the sphere for a numeric lift (floating-point bounds)."""
    d = len(c0) - 1
    c0 = np.asarray(c0, dtype=complex)
    c1 = np.asarray(c1, dtype=complex)
    sigma = float(max(np.abs(c0).sum(), np.abs(c1).sum()))
    lower = min(_disk_min_lower(c0[::-1], c1[::-1]), _disk_min_lower(c0, c1))
    lower = lower * (1 - _FLOAT_SLACK) - _FLOAT_SLACK * sigma
    upper = min(sigma, _torus_max_upper(c0[::-1], c1[::-1]) * (1 + _FLOAT_SLACK) + _FLOAT_SLACK * sigma)
    if lower <= 0:
        raise ArithmeticError("could not bound ||F|| away from zero on the sphere (degenerate lift?)")
    return math.log(lower) / d, math.log(upper) / d


def green_arch_batch(f: RationalMapP1, x0: np.ndarray, x1: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Double-precision archimedean Green values for arrays of homogeneous points."""
    C1 = float(sup_uF_bound(f, ARCH, 64))
    n = tail_terms(C1, f.degree, tol)
    c0, c1 = (np.array([float(c) for c in cs]) for cs in f.int_coeffs)
    return green_batch_coeffs(c0, c1, x0, x1, n)


# --------------------------------------------------------------------------
# certificates
# --------------------------------------------------------------------------

def _tune(K, alpha0, osc_g, kappa):
    # trade exponent for a constant close to the oscillation of g; see module docstring
    if K <= kappa * osc_g:
        return K, alpha0
    alpha = alpha0 * mpmath.log(kappa) / mpmath.log(K / osc_g)
    return kappa * osc_g, alpha


def holder_certificate(f: RationalMapP1, v: Place, precision: int = DEFAULT_PRECISION,
                       kappa=HOLDER_KAPPA) -> HolderCertificate:
    """(C_v, alpha_v) with |g(z) - g(w)| <= C_v min(dist_v(z, w), 1)^alpha_v."""
    params = local_params(f, v, precision)
    d = f.degree
    with mp.workprec(precision):
        kappa = mpmath.mpf(kappa)
        osc_u = params.osc_u
        osc_g = osc_u * d / (d - 1)
        if v.is_archimedean:
            big = max(mpmath.mpf(2 * d), mpmath.exp(-params.log_R))
            formula_alpha = mpmath.log(d) / (params.C2 + mpmath.log(big))
            if osc_u == 0:
                # u_F is identically zero on the sphere, hence so is g_F
                one = mpmath.mpf(1)
                return HolderCertificate(v, mpmath.mpf(0), one, params, mpmath.mpf(0), one, osc_g, formula_alpha)
            lam = max(mpmath.mpf(2 * d), params.C3)
            alpha0 = mpmath.log(d) / mpmath.log(lam)
            K = params.C2 * lam + osc_g
        else:
            if osc_u == 0:
                one = mpmath.mpf(1)
                return HolderCertificate(v, mpmath.mpf(0), one, params, mpmath.mpf(0), one, osc_g, one)
            L = -params.log_R
            alpha0 = min(mpmath.mpf(1), mpmath.log(d) / (2 * L))
            formula_alpha = alpha0
            K = osc_g * mpmath.sqrt(d)
        C, alpha = _tune(K, alpha0, osc_g, kappa)
        return HolderCertificate(v, C, alpha, params, K, alpha0, osc_g, formula_alpha)


# --------------------------------------------------------------------------
# empirical verification
# --------------------------------------------------------------------------

@dataclass
class HolderVerifyReport:
    place: Place
    passed: bool
    num_pairs: int
    max_ratio: float
    green_tol: float
    witness: dict | None = None
    violations: int = 0
    details: dict = field(default_factory=dict)


def _sphere_points(rng: np.random.Generator, n: int):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[:, 0] + 1j * v[:, 1], (1 - v[:, 2]).astype(complex)


def _normalize_pair(x0, x1):
    m = np.maximum(np.abs(x0), np.abs(x1))
    return x0 / m, x1 / m


def _backward_orbit_points(f: RationalMapP1, rng: np.random.Generator, n: int, depth: int = 24):
    """Points near the Julia set: random inverse branches applied to random starts."""
    c0, c1 = (np.array([float(c) for c in cs]) for cs in f.int_coeffs)
    d = f.degree
    w0, w1 = _normalize_pair(*_sphere_points(rng, n))
    for _ in range(depth):
        # solve w1 F0(X) - w0 F1(X) = 0
        G = w1[:, None] * c0[None, :] - w0[:, None] * c1[None, :]
        scale = np.abs(G).max(axis=1)
        use_affine = np.abs(G[:, 0]) >= 1e-8 * scale
        H = np.where(use_affine[:, None], G, G[:, ::-1])
        lead = H[:, 0]
        comp = np.zeros((n, d, d), dtype=complex)
        comp[:, 0, :] = -H[:, 1:] / lead[:, None]
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1
        roots = np.linalg.eigvals(comp)
        pick = roots[np.arange(n), rng.integers(0, d, size=n)]
        z0 = np.where(use_affine, pick, 1)
        z1 = np.where(use_affine, 1, pick)
        w0, w1 = _normalize_pair(z0.astype(complex), z1.astype(complex))
    return w0, w1


def _perturb(rng: np.random.Generator, x0, x1):
    n = len(x0)
    affine = np.abs(x0) <= np.abs(x1)
    t = np.where(affine, x0 / np.where(affine, x1, 1), x1 / np.where(affine, 1, x0))
    eta = 10.0 ** (-rng.uniform(0, 8, size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))
    t2 = t + eta
    y0 = np.where(affine, t2, 1)
    y1 = np.where(affine, 1, t2)
    return _normalize_pair(y0.astype(complex), y1.astype(complex))


def _chordal_np(x0, x1, y0, y1):
    num = np.abs(x0 * y1 - x1 * y0)
    return num / (np.maximum(np.abs(x0), np.abs(x1)) * np.maximum(np.abs(y0), np.abs(y1)))


def _arch_pairs(f: RationalMapP1, n: int, rng: np.random.Generator):
    n1 = n // 3
    n2 = n // 3
    n3 = n - n1 - n2
    xs = [_sphere_points(rng, n1)]
    ys = [_sphere_points(rng, n1)]
    j0 = _backward_orbit_points(f, rng, n2 + n3)
    j1 = _backward_orbit_points(f, rng, n2)
    xs.append((j0[0][:n2], j0[1][:n2]))
    ys.append(j1)
    base = (j0[0][n2:], j0[1][n2:])
    # half of the perturbed pairs sit near the Julia set, half anywhere
    s0, s1 = _sphere_points(rng, n3)
    half = rng.uniform(size=n3) < 0.5
    b0 = np.where(half, base[0], s0)
    b1 = np.where(half, base[1], s1)
    b0, b1 = _normalize_pair(b0, b1)
    xs.append((b0, b1))
    ys.append(_perturb(rng, b0, b1))
    x0 = np.concatenate([p[0] for p in xs])
    x1 = np.concatenate([p[1] for p in xs])
    y0 = np.concatenate([p[0] for p in ys])
    y1 = np.concatenate([p[1] for p in ys])
    return _normalize_pair(x0, x1), _normalize_pair(y0, y1)


def _padic_roots(coeffs, p: int, digits: int) -> list[int]:
    """Integers approximating the Z_p-roots of F(x, 1) to `digits` digits where Hensel lifting applies."""
    P = _affine(coeffs)
    if P.degree() < 1:
        return []
    Pp = sympy.Poly(P.as_expr(), _X, modulus=p)
    if Pp.is_zero or Pp.degree() < 1:
        return []
    out = []
    dP = P.diff(_X)
    mod = p ** digits
    for fac, _ in Pp.factor_list()[1]:
        if fac.degree() != 1:
            continue
        a, b = (int(c) % p for c in fac.all_coeffs())
        x = (-b * pow(a, -1, p)) % p
        if int(dP.eval(x)) % p:
            m = p
            while m < mod:
                m = min(m * m, mod)
                x = (x - int(P.eval(x)) * pow(int(dP.eval(x)), -1, m)) % m
        elif p <= 64:
            # repeated root mod p: greedy digits, keeping the deepest residue
            m = p
            while m < mod:
                x = max((x + t * m for t in range(p)), key=lambda y: valuation(int(P.eval(y)), p) if P.eval(y) else digits * 4)
                m *= p
        out.append(x)
    return out


def padic_sample_points(p: int, rng: np.random.Generator, count: int = 200, digits: int = 12,
                        f: RationalMapP1 | None = None) -> list[ProjPointQ]:
    """Rational points clustered p-adically: shared digit prefixes and inversions near infinity.

    With a map given, p-adic approximations of the roots of F0 and F1 (in
    both charts) seed the pool; the Green function is most negative there.
    """
    ints: list[int] = []
    pts: list[ProjPointQ] = []
    seen = set()
    if f is not None:
        for cs in f.int_coeffs:
            for x in _padic_roots(cs, p, digits):
                for pt in (ProjPointQ(x, 1),):
                    if pt not in seen:
                        seen.add(pt)
                        pts.append(pt)
                ints.append(x)
            for y in _padic_roots(list(cs)[::-1], p, digits):
                if y % p == 0:
                    pt = ProjPointQ(1, y) if y else ProjPointQ(1, 0)
                    if pt not in seen:
                        seen.add(pt)
                        pts.append(pt)
                    ints.append(y)
        # shallow and deep neighbours of each root
        for x in list(ints):
            for keep in range(1, digits + 1):
                a = x % p**keep + int(rng.integers(1, p)) * p**keep
                pt = ProjPointQ(a, 1)
                if pt not in seen:
                    seen.add(pt)
                    pts.append(pt)
                ints.append(a)
    while len(pts) < count:
        if ints and rng.uniform() < 0.7:
            base = ints[int(rng.integers(0, len(ints)))]
            keep = int(rng.integers(0, digits + 1))
            a = base % p**keep
            for k in range(keep, digits):
                a += int(rng.integers(0, p)) * p**k
        else:
            a = sum(int(rng.integers(0, p)) * p**k for k in range(digits))
        ints.append(a)
        kind = rng.uniform()
        if kind < 0.6:
            pt = ProjPointQ(a, 1)
        elif kind < 0.85 and a != 0:
            pt = ProjPointQ(1, a)
        else:
            pt = ProjPointQ(a, p ** int(rng.integers(1, 4)) * (1 + p * int(rng.integers(0, 50))))
        if pt not in seen:
            seen.add(pt)
            pts.append(pt)
    return pts


# --------------------------------------------------------------------------
# unramified extensions: sample points of P^1(C_p) off P^1(Q_p)
# --------------------------------------------------------------------------

class _UnramifiedRing:
    """Z[t]/(p^N, m(t)) for a monic m irreducible mod p; elements are ascending coefficient tuples.

    The powers of t form an integral basis with irreducible reduction, so
    the valuation of an element is the least valuation of its coefficients.
    """

    def __init__(self, p: int, m: tuple[int, ...], N: int):
        self.p, self.m, self.N = p, m, N
        self.k = len(m) - 1

    def elem(self, coeffs, mod: int) -> tuple[int, ...]:
        c = [int(x) for x in coeffs] + [0] * max(0, self.k - len(coeffs))
        for i in range(len(c) - 1, self.k - 1, -1):
            q = c[i]
            if q:
                for j in range(self.k):
                    c[i - self.k + j] -= q * self.m[j]
        return tuple(x % mod for x in c[:self.k])

    def mul(self, a, b, mod: int):
        c = [0] * (2 * self.k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    c[i + j] += x * y
        return self.elem(c, mod)

    def add(self, a, b, mod: int):
        return tuple((x + y) % mod for x, y in zip(a, b))

    def scalar(self, c: int, mod: int):
        return self.elem([c], mod)

    def val(self, a, cap: int) -> int:
        return min(_vp_residue(x, self.p, cap) for x in a)

    def form(self, coeffs, x0, x1, mod: int):
        d = len(coeffs) - 1
        p0, p1 = [self.scalar(1, mod)], [self.scalar(1, mod)]
        for _ in range(d):
            p0.append(self.mul(p0[-1], x0, mod))
            p1.append(self.mul(p1[-1], x1, mod))
        out = self.scalar(0, mod)
        for i, c in enumerate(coeffs):
            if c:
                term = self.mul(p0[d - i], p1[i], mod)
                out = self.add(out, tuple(c * x for x in term), mod)
        return out

    def inverse(self, a, mod: int):
        """Inverse of a unit: sympy inverse mod p, then Newton lifting."""
        t = sympy.Symbol("t")
        A = sympy.Poly(list(reversed(a)), t, modulus=self.p)
        M = sympy.Poly(list(reversed(self.m)), t, modulus=self.p)
        inv = A.invert(M)
        y = self.elem([int(c) % self.p for c in reversed(inv.all_coeffs())], mod)
        two = self.scalar(2, mod)
        m = self.p
        while m < mod:
            m = min(m * m, mod)
            y = self.mul(y, self.add(two, tuple(-x for x in self.mul(a, y, m)), m), m)
        return y

    def label(self, x0, x1) -> str:
        return f"({list(x0)} : {list(x1)}) in Z_{self.p}[t]/({list(self.m)})"


def _unramified_moduli(f: RationalMapP1, p: int, max_degree: int = 6) -> list[tuple[int, ...]]:
    """Monic lifts of the irreducible factors of degree >= 2 of F0(x, 1) and F1(x, 1) mod p."""
    out = []
    for cs in f.int_coeffs:
        P = sympy.Poly(_affine(cs).as_expr(), _X, modulus=p)
        if P.is_zero or P.degree() < 2:
            continue
        for fac, _ in P.factor_list()[1]:
            if not 2 <= fac.degree() <= max_degree:
                continue
            c = [int(x) % p for x in fac.all_coeffs()]
            lead = pow(c[0], -1, p)
            m = tuple((x * lead) % p for x in reversed(c))
            if m not in out:
                out.append(m)
    return out


def _ext_content_exponents(f: RationalMapP1, ring: _UnramifiedRing, x0, x1, n: int, r: int) -> list[int]:
    c0, c1 = f.int_coeffs
    k = n * r + r + 1
    out = []
    for _ in range(n):
        mod = ring.p**k
        y0, y1 = ring.form(c0, x0, x1, mod), ring.form(c1, x0, x1, mod)
        e = min(ring.val(y0, k), ring.val(y1, k))
        if e > r:
            raise ArithmeticError("content exponent exceeds v_p(Res); precision bookkeeping failed")
        out.append(e)
        k -= e
        pe = ring.p**e
        x0 = tuple((y // pe) % ring.p**k for y in y0)
        x1 = tuple((y // pe) % ring.p**k for y in y1)
    return out


def _extension_pool(f: RationalMapP1, ring: _UnramifiedRing, rng: np.random.Generator,
                    rationals: list[ProjPointQ], count: int, digits: int):
    """Primitive points of O_K^2: lifted roots of F0 and F1, their neighbours, random and rational points."""
    p, k = ring.p, ring.k
    mod = p**ring.N
    one, zero = ring.scalar(1, mod), ring.scalar(0, mod)
    t = ring.elem([0, 1], mod)
    pts = []
    seen = set()

    def add(x0, x1):
        if min(ring.val(x0, ring.N), ring.val(x1, ring.N)) != 0:
            return
        if (x0, x1) not in seen:
            seen.add((x0, x1))
            pts.append((x0, x1))

    roots = []
    for cs in f.int_coeffs:
        P = [int(c) for c in cs]
        dP = [c * (len(P) - 1 - i) for i, c in enumerate(P[:-1])]
        theta = t
        if ring.val(ring.form(P, theta, one, mod), 1) < 1:
            continue
        der = ring.form([0] + dP, theta, one, mod)
        if ring.val(der, 1) == 0:
            m = p
            while m < mod:
                m = min(m * m, mod)
                step = ring.mul(ring.form(P, theta, one, m), ring.inverse(ring.form([0] + dP, theta, one, m), m), m)
                theta = ring.add(theta, tuple(-x for x in step), m)
            theta = ring.elem(theta, mod)
        roots.append(theta)
    if not roots:
        roots.append(t)
    for theta in roots:
        add(theta, one)
        for keep in range(1, digits + 1):
            u = [int(x) for x in rng.integers(0, p, size=k)]
            if all(x == 0 for x in u):
                u[0] = 1
            add(ring.add(theta, tuple(p**keep * x for x in u), mod), one)
    for q in rationals[: count // 4]:
        add(ring.scalar(q.a, mod), ring.scalar(q.b, mod))
    while len(pts) < count:
        base = roots[int(rng.integers(0, len(roots)))] if rng.uniform() < 0.6 else zero
        keep = int(rng.integers(0, digits))
        x = tuple(c % p**keep for c in base)
        noise = [sum(int(rng.integers(0, p)) * p**i for i in range(digits - keep)) for _ in range(k)]
        x = ring.add(x, tuple(p**keep * c for c in noise), mod)
        if rng.uniform() < 0.8:
            add(x, one)
        else:
            add(one, ring.mul(x, ring.scalar(p, mod), mod))
    return pts


def _extension_checks(f: RationalMapP1, v: Place, cert: HolderCertificate, rng: np.random.Generator,
                      rationals: list[ProjPointQ], tol, count: int = 60, digits: int = 8):
    """Yield (diff, bound, label_z, label_w, dist) for all pairs of each extension pool."""
    p = v.p
    d = f.degree
    r = f.res_valuation(p)
    C1 = sup_uF_bound(f, v, 128)
    n = tail_terms(C1, d, tol)
    lp = log_prime(p, 128)
    for m in _unramified_moduli(f, p):
        ring = _UnramifiedRing(p, m, max(n * r + r + 1, digits + 2))
        pool = _extension_pool(f, ring, rng, rationals, count, digits)
        vals = []
        for x0, x1 in pool:
            es = _ext_content_exponents(f, ring, x0, x1, n, r)
            vals.append(-_mpf(sum(Fraction(e, d**j) for j, e in enumerate(es))) * lp / d)
        mod = p**ring.N
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                (a0, a1), (b0, b1) = pool[i], pool[j]
                det = ring.add(ring.mul(a0, b1, mod), tuple(-x for x in ring.mul(a1, b0, mod)), mod)
                dist = Fraction(1, p ** ring.val(det, ring.N))
                bound = cert.C * _mpf(min(dist, Fraction(1))) ** cert.alpha
                yield abs(vals[i] - vals[j]), bound, ring.label(a0, a1), ring.label(b0, b1), dist


def holder_verify(f: RationalMapP1, v: Place, cert: HolderCertificate, num_samples: int = 10_000,
                  rng_seed: int = 0, green_tol: float | None = None) -> HolderVerifyReport:
    """Check |g(z) - g(w)| <= C min(dist, 1)^alpha + 2 tol on sampled pairs.

    Archimedean pairs mix uniform sphere points, points near the Julia set
    (random backward orbits) and small perturbations at scales 1e-8..1.
    Green values there are double precision, so the tolerance is a numerical
    allowance rather than a certified bound.  At a finite place pairs are
    drawn from a pool of p-adically clustered rationals and evaluated exactly;
    when F0 or F1 has irreducible factors mod p of degree >= 2, every pair of
    a pool of points over the matching unramified extension is checked too,
    since the Green function may be constant on P^1(Q_p) alone.
    """
    rng = np.random.default_rng(rng_seed)
    C = float(cert.C)
    alpha = float(cert.alpha)
    if v.is_archimedean:
        tol = VERIFY_GREEN_TOL if green_tol is None else green_tol
        (x0, x1), (y0, y1) = _arch_pairs(f, num_samples, rng)
        gx = green_arch_batch(f, x0, x1)
        gy = green_arch_batch(f, y0, y1)
        dist = _chordal_np(x0, x1, y0, y1)
        diff = np.abs(gx - gy)
        bound = C * np.minimum(dist, 1.0) ** alpha
        excess = diff - (bound + 2 * tol)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0, diff / bound, np.where(diff > 2 * tol, np.inf, 0.0))
        report = HolderVerifyReport(v, bool((excess <= 0).all()), len(diff), float(ratio.max()), tol,
                                    violations=int((excess > 0).sum()))
        if not report.passed:
            i = int(np.argmax(excess))
            report.witness = {
                "z": [complex(x0[i]), complex(x1[i])],
                "w": [complex(y0[i]), complex(y1[i])],
                "dist": float(dist[i]),
                "green_diff": float(diff[i]),
                "bound": float(bound[i]),
            }
        return report

    tol = 1e-30 if green_tol is None else green_tol
    pool = padic_sample_points(v.p, rng, f=f)
    with mp.workprec(128):
        values = [green_value(f, x, v, tol, 128) for x in pool]
        n = len(pool)
        all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        take = min(num_samples, len(all_pairs))
        idx = rng.choice(len(all_pairs), size=take, replace=False)

        def rational_pairs():
            for k in sorted(int(t) for t in idx):
                i, j = all_pairs[k]
                dist = chordal_distance_exact(pool[i], pool[j], v)
                bound = cert.C * _mpf(min(dist, Fraction(1))) ** cert.alpha
                yield abs(values[i].value - values[j].value), bound, str(pool[i]), str(pool[j]), dist

        worst = None
        max_ratio = 0.0
        violations = 0
        checked = 0
        extension_pairs = 0
        sources = [(rational_pairs(), False)]
        if cert.C > 0:
            sources.append((_extension_checks(f, v, cert, rng, pool, tol), True))
        for source, is_ext in sources:
            for diff, bound, za, zb, dist in source:
                checked += 1
                extension_pairs += is_ext
                if bound > 0:
                    max_ratio = max(max_ratio, float(diff / bound))
                elif diff > 2 * tol:
                    max_ratio = math.inf
                # each value carries error <= tol
                excess = diff - bound - 2 * tol
                if excess > 0:
                    violations += 1
                    if worst is None or excess > worst[0]:
                        worst = (excess, za, zb, dist, diff, bound)
    report = HolderVerifyReport(v, violations == 0, checked, max_ratio, tol, violations=violations,
                                details={"extension_pairs": extension_pairs})
    if worst is not None:
        _, a, b, dist, diff, bound = worst
        report.witness = {"z": a, "w": b, "dist": str(dist),
                          "green_diff": float(diff), "bound": float(bound)}
    return report
