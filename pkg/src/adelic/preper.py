"""Preperiodic points: exact rational enumeration, complex spectra, common points.

Also hosts the calculator for the explicit cardinality bound N obtained from
a lower bound on the pairing plus an energy/cardinality inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import sympy
from mpmath import mp

from .green import green_value
from .heights import is_preperiodic
from .projmap import (
    INFINITY,
    ProjPointC,
    ProjPointQ,
    RationalMapP1,
    infinity_multiplicity,
    preperiodicity_form,
)
from .qfield import ARCH, DEFAULT_PRECISION, check_precision


@dataclass(frozen=True)
class PreperOrbit:
    point: ProjPointQ
    tail: int              # m
    period: int            # n - m
    orbit: tuple[ProjPointQ, ...]

    @property
    def witness(self) -> tuple[int, int]:
        return self.tail, self.tail + self.period


def height_box(B) -> int:
    """Largest H with log H <= B (small slack for a B passed as log of an integer)."""
    B = float(B)
    if B < 0:
        raise ValueError("height bound must be >= 0")
    return int(math.floor(math.exp(B) + 1e-9))


def rational_points_of_height(H: int):
    """P^1(Q) points a/b with max(|a|, |b|) <= H, plus infinity."""
    yield INFINITY
    for b in range(1, H + 1):
        for a in range(-H, H + 1):
            if math.gcd(a, b) == 1:
                yield ProjPointQ(a, b)


def rational_preperiodic_points(f: RationalMapP1, B, precision: int = DEFAULT_PRECISION) -> list[PreperOrbit]:
    """Every preperiodic x in P^1(Q) with naive height <= B, with orbit witnesses."""
    out = []
    for x in rational_points_of_height(height_box(B)):
        dec = is_preperiodic(f, x, precision)
        if dec.is_preperiodic:
            out.append(PreperOrbit(x, dec.tail, dec.period, dec.orbit))
    return sorted(out, key=lambda o: (o.point.b == 0, o.point.value if o.point.b else 0))


def common_rational_preperiodic(f: RationalMapP1, g: RationalMapP1, B,
                                precision: int = DEFAULT_PRECISION) -> dict[ProjPointQ, tuple[PreperOrbit, PreperOrbit]]:
    """Rational points of height <= B preperiodic for both maps, with both witnesses."""
    a = {o.point: o for o in rational_preperiodic_points(f, B, precision)}
    b = {o.point: o for o in rational_preperiodic_points(g, B, precision)}
    return {x: (a[x], b[x]) for x in sorted(a.keys() & b.keys(), key=_point_key)}


def _point_key(x: ProjPointQ):
    return (x.b == 0, x.value if x.b else 0)


# --------------------------------------------------------------------------
# exact polynomial helpers (ascending coefficient lists of Fractions)
# --------------------------------------------------------------------------

def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def squarefree_decomposition(p: Sequence[Fraction]) -> list[tuple[list[Fraction], int]]:
    """p = c * prod q_k^k with q_k squarefree, pairwise coprime (ascending coefficients)."""
    p = _trim([Fraction(c) for c in p])
    if len(p) == 1:
        return []
    z = sympy.Symbol("z")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p)], z, domain="QQ")
    _, factors = poly.sqf_list()
    out = []
    for q, k in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(q.all_coeffs())]
        out.append((coeffs, k))
    return out


# --------------------------------------------------------------------------
# complex spectra
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexRoot:
    value: mpmath.mpc | None   # None is the point at infinity
    multiplicity: int
    residual: mpmath.mpf
    converged: bool

    @property
    def is_infinity(self) -> bool:
        return self.value is None


def _initial_roots(poly_asc: list[Fraction]) -> np.ndarray:
    desc = [float(c) for c in reversed(poly_asc)]
    scale = max(abs(c) for c in desc)
    return np.roots(np.array(desc) / scale)


def _newton_polish(poly_desc_mp, roots, tol, maxiter: int = 200):
    dpoly = [c * (len(poly_desc_mp) - 1 - i) for i, c in enumerate(poly_desc_mp[:-1])]
    out = []
    for z in roots:
        z = mpmath.mpc(z)
        ok = False
        for _ in range(maxiter):
            fz = mpmath.polyval(poly_desc_mp, z)
            dz = mpmath.polyval(dpoly, z)
            if dz == 0:
                break
            step = fz / dz
            z -= step
            if abs(step) <= tol * max(1, abs(z)):
                ok = True
                break
        out.append((z, ok))
    return out


def _distinct(roots, tol) -> bool:
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= tol * max(1, abs(roots[i])):
                return False
    return True


def _roots_squarefree(q: list[Fraction], wp: int):
    """Simple roots of a squarefree polynomial, refined at working precision wp."""
    deg = len(q) - 1
    desc = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(q)]
    tol = mpmath.mpf(2) ** (-wp + 16)
    polished = _newton_polish(desc, _initial_roots(q), tol)
    vals = [z for z, _ in polished]
    if all(ok for _, ok in polished) and _distinct(vals, mpmath.mpf(2) ** (-wp // 2)):
        return polished
    # fall back to simultaneous iteration on the whole factor
    try:
        vals = mpmath.polyroots(desc, maxsteps=400, extraprec=2 * wp)
    except mpmath.libmp.libhyper.NoConvergence:
        return polished
    if deg == 1:
        vals = [vals] if not isinstance(vals, list) else vals
    return _newton_polish(desc, vals, tol)


def complex_preperiodic(f: RationalMapP1, m: int, n: int, precision: int = DEFAULT_PRECISION) -> list[ComplexRoot]:
    """Solutions of f^n(z) = f^m(z) in P^1(C), with multiplicities and residuals |Phi(root)|."""
    check_precision(precision)
    form = preperiodicity_form(f, m, n)
    inf_mult = infinity_multiplicity(form)
    affine = _trim([Fraction(c) for c in reversed(form)])
    coeff_bits = max(abs(c) for c in form).bit_length()
    wp = precision + 64 + coeff_bits
    out: list[ComplexRoot] = []
    with mp.workprec(wp):
        desc_full = [mpmath.mpf(int(c)) for c in reversed(affine)]
        for q, k in squarefree_decomposition(affine):
            for z, ok in _roots_squarefree(q, wp):
                res = abs(mpmath.polyval(desc_full, z))
                out.append(ComplexRoot(+z, k, res, ok))
    if inf_mult:
        out.append(ComplexRoot(None, inf_mult, mpmath.mpf(0), True))
    with mp.workprec(precision):
        return [ComplexRoot(None if r.value is None else +r.value, r.multiplicity, +r.residual, r.converged)
                for r in sorted(out, key=_root_key)]


def _root_key(r: ComplexRoot):
    if r.value is None:
        return (1, 0.0, 0.0)
    return (0, float(r.value.real), float(r.value.imag))


def preperiodic_spectrum(f: RationalMapP1, max_m: int, max_n: int, precision: int = DEFAULT_PRECISION,
                         dedup_tol=None) -> list[ComplexRoot]:
    """Union of complex_preperiodic over 0 <= m <= max_m, m < n <= max_n, deduplicated."""
    if dedup_tol is None:
        dedup_tol = mpmath.mpf(2) ** (-precision // 2)
    pts: list[ComplexRoot] = []
    for n in range(1, max_n + 1):
        for m in range(0, min(max_m, n - 1) + 1):
            for r in complex_preperiodic(f, m, n, precision):
                if any(_same(r, s, dedup_tol) for s in pts):
                    continue
                pts.append(r)
    return sorted(pts, key=_root_key)


def _same(a: ComplexRoot, b: ComplexRoot, tol) -> bool:
    if a.value is None or b.value is None:
        return a.value is None and b.value is None
    return abs(a.value - b.value) <= tol


@dataclass
class NumericMatchReport:
    label: str
    matches: list[dict]
    spectrum_sizes: tuple[int, int]
    exceptional: str
    notes: list[str] = field(default_factory=list)


def common_preperiodic_numeric(f: RationalMapP1, g: RationalMapP1, max_m: int = 2, max_n: int = 2,
                               match_tol=1e-20, precision: int = DEFAULT_PRECISION) -> NumericMatchReport:
    """Candidate common preperiodic points from numerically matched spectra (heuristic)."""
    from .energy import exceptional_pair_lookup

    with mp.workprec(precision):
        tol = mpmath.mpf(match_tol)
        sf = preperiodic_spectrum(f, max_m, max_n, precision)
        sg = preperiodic_spectrum(g, max_m, max_n, precision)
        matches = []
        for a in sf:
            for b in sg:
                if not _same(a, b, tol):
                    continue
                entry = {"point": "inf" if a.value is None else a.value,
                         "residual_f": a.residual, "residual_g": b.residual}
                if a.value is not None:
                    x = ProjPointC(a.value, 1)
                    entry["green_f"] = green_value(f, x, ARCH, 1e-20, precision).value
                    entry["green_g"] = green_value(g, x, ARCH, 1e-20, precision).value
                matches.append(entry)
        cls = exceptional_pair_lookup(f, g)
        notes = ["candidate common preperiodic points; numerical evidence only"]
        if cls.status == "EXCEPTIONAL":
            notes.append(f"exceptional pair ({cls.family}): matches are expected to proliferate")
        return NumericMatchReport("HEURISTIC", matches, (len(sf), len(sg)), cls.status, notes)


# --------------------------------------------------------------------------
# uniform bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformBoundInputs:
    C: float
    C_prime: float
    C1: float
    C2: float
    eps: float
    deg: int

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be > 0")
        if self.C_prime < 0 or self.C2 < 0:
            raise ValueError("C' and C2 must be >= 0")
        if self.C1 < 1:
            raise ValueError("C1 must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if self.deg < 0:
            raise ValueError("deg must be >= 0")


@dataclass(frozen=True)
class UniformBoundResult:
    N: int
    B: mpmath.mpf
    small_height_branch: mpmath.mpf   # 4B/eps log(4B/eps)
    large_height_branch: mpmath.mpf   # 4 C1/C log(2 C1/C)
    dominant: str
    height_threshold: mpmath.mpf
    delta_large: mpmath.mpf           # C/(2 C1)
    delta_small: mpmath.mpf           # eps/(4B)
    C_used: mpmath.mpf


def uniform_bound_calculator(inputs: UniformBoundInputs, precision: int = DEFAULT_PRECISION) -> UniformBoundResult:
    """Explicit N bounding the number of points of small height.

    The derivation may shrink C to 1, so C enters as min(C, 1).
    """
    with mp.workprec(check_precision(precision)):
        C = min(mpmath.mpf(inputs.C), mpmath.mpf(1))
        Cp, C1, C2, eps = (mpmath.mpf(x) for x in (inputs.C_prime, inputs.C1, inputs.C2, inputs.eps))
        lead = 4 * (Cp + C * C2 + eps / 2) / C
        B = C1 * (lead + 2 * C2)
        b1 = 4 * B / eps * mpmath.log(4 * B / eps)
        b2 = 4 * C1 / C * mpmath.log(2 * C1 / C)
        top = max(b1, b2)
        N = int(mpmath.ceil(top)) + inputs.deg
        return UniformBoundResult(N, B, b1, b2, "small_height" if b1 >= b2 else "large_height",
                                  lead + C2, C / (2 * C1), eps / (4 * B), C)
