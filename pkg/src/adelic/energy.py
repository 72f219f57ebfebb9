"""Mutual energies of equilibrium measures and the regularized energy of finite sets.

Conventions.  For signed measures rho, nu of total mass zero,
    (rho, nu) = -int int log|z - w| drho(z) dnu(w).
The chordal kernel gives the same value for mass-zero measures (the two
kernels differ by a sum of functions of one variable), so the discrete
estimators below work on the sphere and treat infinity like any other atom.

Equilibrium measures are approximated by iterated preimages.  Two
estimators are offered:
  * kernel: -sum s_i s_j log max(dist, eps) over all pairs of atoms;
  * potential: U(f, g) = -int (g_F - g_G) d(mu_f - mu_g), evaluated with the
    Green functions at the atoms.  Its seeds (the non-exceptional fixed points)
    move with a Moebius change of coordinates, so it is invariant under
    conjugation up to rounding.
Errors of both are depth differences, i.e. heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath
import numpy as np
import sympy
from mpmath import mp

from .green import green_batch_coeffs, holder_certificate, numeric_u_range, tail_terms
from .heights import average_height, hrat
from .projmap import (
    INFINITY,
    DegenerateMapError,
    HomogeneousLift,
    ProjPointQ,
    RationalMapP1,
    conjugate,
    form_compose,
    form_mul,
    infinity_multiplicity,
    iterate_lift,
    preperiodicity_form,
)
from .qfield import (
    ARCH,
    DEFAULT_PRECISION,
    Place,
    as_rational,
    check_precision,
    log_prime,
    product_formula_residual,
    valuation,
)

MAX_SAMPLE_ATOMS = 10 ** 6
_ROUNDING = 1e-12


# --------------------------------------------------------------------------
# input types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GaloisSetQ:
    """Nonempty finite set of distinct affine rational points."""
    points: tuple[ProjPointQ, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("point set must be nonempty")
        if any(p.b == 0 for p in self.points):
            raise ValueError("point set must be affine (no infinity)")
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct")

    @classmethod
    def of(cls, pts: Iterable) -> "GaloisSetQ":
        out = []
        for p in pts:
            if isinstance(p, ProjPointQ):
                out.append(p)
            elif isinstance(p, str):
                out.append(ProjPointQ.parse(p))
            else:
                out.append(ProjPointQ.from_rational(as_rational(p)))
        return cls(tuple(sorted(out, key=lambda x: x.value)))

    @property
    def values(self) -> list[Fraction]:
        return [p.value for p in self.points]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AdelicEpsilon:
    """eps_v in (0, 1] at finitely many places, 1 elsewhere."""
    values: tuple[tuple[Place, Fraction], ...] = ()

    def __post_init__(self):
        seen = set()
        for v, e in self.values:
            if not 0 < e <= 1:
                raise ValueError(f"eps at {v} must lie in (0, 1]")
            if v in seen:
                raise ValueError(f"duplicate place {v}")
            seen.add(v)

    @classmethod
    def parse(cls, obj: Mapping) -> "AdelicEpsilon":
        items = []
        for k, e in obj.items():
            items.append((Place.parse(str(k)), as_rational(e)))
        return cls(tuple(sorted(items, key=lambda t: (t[0].p or 0))))

    def __getitem__(self, v: Place) -> Fraction:
        for w, e in self.values:
            if w == v:
                return e
        return Fraction(1)

    @property
    def places(self) -> list[Place]:
        return [v for v, e in self.values if e != 1]


# --------------------------------------------------------------------------
# numeric maps (rational maps with complex double coefficients)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NumericMap:
    c0: tuple[complex, ...]
    c1: tuple[complex, ...]
    label: str = ""

    @property
    def degree(self) -> int:
        return len(self.c0) - 1

    @classmethod
    def from_map(cls, f: RationalMapP1) -> "NumericMap":
        c0, c1 = f.int_coeffs
        return cls(tuple(complex(float(c)) for c in c0), tuple(complex(float(c)) for c in c1), f.key())

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.c0, dtype=complex), np.array(self.c1, dtype=complex)

    def key(self):
        return (self.degree, tuple((z.real, z.imag) for z in self.c0 + self.c1))


def _as_numeric(f) -> NumericMap:
    return f if isinstance(f, NumericMap) else NumericMap.from_map(f)


def numeric_resultant(f: NumericMap) -> complex:
    """Res(F0, F1) as a floating determinant of the Sylvester matrix, relative to its scale."""
    d = f.degree
    a, b = f.c0, f.c1
    M = np.zeros((2 * d, 2 * d), dtype=complex)
    for i in range(d):
        M[i, i:i + d + 1] = a
        M[d + i, i:i + d + 1] = b
    return complex(np.linalg.det(M))


def _is_degenerate(f: NumericMap, rel: float = 1e-10) -> bool:
    scale = max(max(abs(c) for c in f.c0), max(abs(c) for c in f.c1))
    if scale == 0:
        return True
    return abs(numeric_resultant(f)) <= rel * scale ** (2 * f.degree)


# --------------------------------------------------------------------------
# preimage sampling
# --------------------------------------------------------------------------

def _normalize(x0: np.ndarray, x1: np.ndarray):
    m = np.maximum(np.abs(x0), np.abs(x1))
    return x0 / m, x1 / m


# fixed rotation of P^1 used when a target has preimages near both 0 and infinity
_ROT_C, _ROT_S = math.cos(0.6180339887), math.sin(0.6180339887)
_ILL_POSED = 1e-6


def _rotation_basis(d: int) -> np.ndarray:
    """B[i] = coefficients of (cX - sY)^(d-i) (sX + cY)^i in X^(d-k) Y^k."""
    out = np.zeros((d + 1, d + 1))
    for i in range(d + 1):
        p = np.array([1.0])
        for _ in range(d - i):
            p = np.convolve(p, [_ROT_C, -_ROT_S])
        for _ in range(i):
            p = np.convolve(p, [_ROT_S, _ROT_C])
        out[i] = p
    return out


def _preimages(c0: np.ndarray, c1: np.ndarray, w0: np.ndarray, w1: np.ndarray):
    """All d preimages of each target (w0 : w1), as normalized homogeneous pairs, target-major.

    Each target is solved in the chart (0 or infinity) with the larger end
    coefficient, or after a fixed rotation when both ends are tiny.
    """
    d = len(c0) - 1
    n = len(w0)
    G = w1[:, None] * c0[None, :] - w0[:, None] * c1[None, :]   # coefficients of X^(d-i) Y^i
    affine = np.abs(G[:, 0]) >= np.abs(G[:, -1])
    H = np.where(affine[:, None], G, G[:, ::-1])
    rotate = np.abs(H[:, 0]) < _ILL_POSED * np.abs(G).max(axis=1)
    if rotate.any():
        H = np.where(rotate[:, None], G @ _rotation_basis(d), H)
    lead = H[:, 0]
    if np.any(lead == 0):
        raise ArithmeticError("preimage polynomial vanished identically (degenerate target)")
    comp = np.zeros((n, d, d), dtype=complex)
    comp[:, 0, :] = -H[:, 1:] / lead[:, None]
    if d > 1:
        comp[:, np.arange(1, d), np.arange(d - 1)] = 1
    roots = np.linalg.eigvals(comp) if d > 1 else comp[:, :, 0]
    roots = np.sort_complex(roots)  # fixed order per target
    # one Newton step in the chosen chart: roots r of sum H_i r^(d-i)
    val = np.zeros_like(roots)
    der = np.zeros_like(roots)
    for i in range(d + 1):
        der = der * roots + val
        val = val * roots + H[:, i:i + 1]
    ok = der != 0
    roots = np.where(ok, roots - np.where(ok, val, 0) / np.where(ok, der, 1), roots)
    aff = np.repeat(affine, d)
    rot = np.repeat(rotate, d)
    r = roots.reshape(-1)
    z0 = np.where(aff, r, 1).astype(complex)
    z1 = np.where(aff, 1, r).astype(complex)
    z0 = np.where(rot, _ROT_C * r - _ROT_S, z0)
    z1 = np.where(rot, _ROT_S * r + _ROT_C, z1)
    return _normalize(z0, z1)


@dataclass(frozen=True)
class MeasureSample:
    """Iterated preimages of seed points, equal weights; atoms as homogeneous pairs."""
    x0: np.ndarray
    x1: np.ndarray
    depth: int
    source: str
    seeds: tuple[complex | None, ...]

    def __post_init__(self):
        self.x0.setflags(write=False)
        self.x1.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.x0)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def affine_atoms(self) -> np.ndarray:
        """Atoms as complex numbers (inf for the point at infinity)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.x1 != 0, self.x0 / np.where(self.x1 != 0, self.x1, 1), complex(np.inf))


def _seed_pairs(seeds: Sequence) -> tuple[np.ndarray, np.ndarray]:
    x0, x1 = [], []
    for s in seeds:
        if s is None or (isinstance(s, ProjPointQ) and s.b == 0) or s == "inf":
            x0.append(1.0)
            x1.append(0.0)
        elif isinstance(s, ProjPointQ):
            x0.append(float(s.a))
            x1.append(float(s.b))
        else:
            x0.append(complex(s))
            x1.append(1.0)
    return _normalize(np.array(x0, dtype=complex), np.array(x1, dtype=complex))


def _fixed_points(f: NumericMap) -> list[tuple[complex, complex]]:
    """Fixed points as normalized pairs: zeros of X F1 - Y F0."""
    c0, c1 = f.arrays()
    d = f.degree
    # X*F1 - Y*F0 in monomials X^(d+1-i) Y^i
    G = np.zeros(d + 2, dtype=complex)
    G[:d + 1] += c1
    G[1:] -= c0
    pts = []
    k = 0
    while k < len(G) - 1 and abs(G[k]) <= 1e-14 * np.abs(G).max():
        pts.append((1.0 + 0j, 0j))   # root at infinity
        k += 1
    rest = G[k:]
    for r in np.roots(rest):
        pts.append((complex(r), 1.0 + 0j))
    out = []
    for a, b in pts:
        m = max(abs(a), abs(b))
        out.append((a / m, b / m))
    return out


def _chordal(x0, x1, y0, y1):
    num = np.abs(x0 * y1 - x1 * y0)
    return num / (np.sqrt(np.abs(x0) ** 2 + np.abs(x1) ** 2) * np.sqrt(np.abs(y0) ** 2 + np.abs(y1) ** 2))


def _is_exceptional_fixed(f: NumericMap, z: tuple[complex, complex], tol: float = 1e-4) -> bool:
    # a double root at a critical value splits by ~sqrt(rounding), hence the loose tolerance
    c0, c1 = f.arrays()
    p0, p1 = _preimages(c0, c1, np.array([z[0]]), np.array([z[1]]))
    return bool(np.all(_chordal(p0, p1, z[0], z[1]) < tol))


def default_seeds(f) -> list:
    """The non-exceptional fixed points of f, sorted; conjugation moves them along with f."""
    fn = _as_numeric(f)
    exact = []
    if isinstance(f, RationalMapP1):
        for x in _totally_invariant_points(f):
            m = max(abs(x.a), abs(x.b))
            exact.append((x.a / m, x.b / m))
    pts = [z for z in _fixed_points(fn)
           if not _is_exceptional_fixed(fn, z)
           and not any(_chordal(z[0], z[1], a, b) < 1e-8 for a, b in exact)]
    if not pts:
        raise ArithmeticError("no non-exceptional fixed point found")
    vals = [None if abs(b) < 1e-300 or abs(a / b) > 1e300 else a / b for a, b in pts]
    return sorted(vals, key=lambda v: (v is None, 0.0 if v is None else v.real, 0.0 if v is None else v.imag))


def equilibrium_sample(f, depth: int, seed=None, precision: int = 53) -> MeasureSample:
    """All d^n solutions of f^n(z) = seed for each seed (double precision atoms).

    seed may be a number, a ProjPointQ, "inf", or a list of those; by default
    the first non-exceptional fixed point is used.
    """
    check_precision(precision)
    fn = _as_numeric(f)
    d = fn.degree
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if seed is None:
        seeds = default_seeds(fn)[:1]
    elif isinstance(seed, (list, tuple)):
        seeds = list(seed)
    else:
        seeds = [seed]
    if len(seeds) * d ** depth > MAX_SAMPLE_ATOMS:
        raise ValueError(f"sample of {len(seeds) * d ** depth} atoms exceeds {MAX_SAMPLE_ATOMS}")
    c0, c1 = fn.arrays()
    x0, x1 = _seed_pairs(seeds)
    for _ in range(depth):
        x0, x1 = _preimages(c0, c1, x0, x1)
    if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(x1))):
        raise ArithmeticError("root extraction produced non-finite atoms")
    return MeasureSample(np.ascontiguousarray(x0), np.ascontiguousarray(x1), depth, fn.label,
                         tuple(None if (isinstance(s, ProjPointQ) and s.b == 0) or s == "inf" else
                               complex(s.value) if isinstance(s, ProjPointQ) else
                               None if s is None else complex(s) for s in seeds))


# --------------------------------------------------------------------------
# kernel estimator
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    error: float
    label: str = "heuristic"
    depth: int = 0
    eps: float = 0.0
    details: dict = field(default_factory=dict)


def _kernel_sum(a: MeasureSample, b: MeasureSample, eps: float, chunk: int = 1024) -> float:
    """sum_{i,j} log max(dist(a_i, b_j), eps), with a fixed reduction order."""
    parts = []
    for i in range(0, a.size, chunk):
        D = _chordal(a.x0[i:i + chunk, None], a.x1[i:i + chunk, None], b.x0[None, :], b.x1[None, :])
        parts.append(float(np.log(np.maximum(D, eps)).sum()))
    return math.fsum(parts)


def _kernel_energy(sa: MeasureSample, sb: MeasureSample, eps: float) -> float:
    Ma, Mb = sa.size, sb.size
    saa = _kernel_sum(sa, sa, eps)
    sbb = _kernel_sum(sb, sb, eps)
    sab = _kernel_sum(sa, sb, eps)
    return -math.fsum([saa / Ma ** 2, sbb / Mb ** 2, -2 * sab / (Ma * Mb)])


def _ordered(f, g, sf, sg):
    kf, kg = _as_numeric(f).key(), _as_numeric(g).key()
    if (kg, repr(sg)) < (kf, repr(sf)):
        return g, f, sg, sf
    return f, g, sf, sg


def mutual_energy_arch(f, g, depth: int = 9, eps: float | None = None, seed_f=None, seed_g=None,
                       precision: int = 53) -> EnergyEstimate:
    """(mu_f - mu_g, mu_f - mu_g) by the regularized kernel estimator at depths n and n-1.

    eps defaults to 1/M (M the larger sample), which offsets the diagonal
    self-energy for evenly spread atoms.
    """
    check_precision(precision)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if eps is not None and not eps > 0:
        raise ValueError("eps must be > 0")
    a, b, sa_seed, sb_seed = _ordered(f, g, seed_f, seed_g)
    vals = []
    used_eps = []
    for n in (depth - 1, depth):
        sa = equilibrium_sample(a, n, sa_seed)
        sb = sa if (_as_numeric(a).key() == _as_numeric(b).key() and repr(sa_seed) == repr(sb_seed)) \
            else equilibrium_sample(b, n, sb_seed)
        e = eps if eps is not None else 1.0 / max(sa.size, sb.size)
        used_eps.append(e)
        vals.append(0.0 if sa is sb else _kernel_energy(sa, sb, e))
    details = {"estimator": "kernel", "previous": vals[0]}
    if isinstance(f, RationalMapP1) and isinstance(g, RationalMapP1):
        details["exceptional"] = exceptional_pair_lookup(f, g).status
    return EnergyEstimate(vals[1], abs(vals[1] - vals[0]), "heuristic", depth, used_eps[1], details)


def pairing_lower_arch(f, g, depth: int = 9, precision: int = 53) -> EnergyEstimate:
    """Half the archimedean mutual energy: the archimedean share of <f, g> (HEURISTIC)."""
    e = mutual_energy_arch(f, g, depth, precision=precision)
    return EnergyEstimate(e.value / 2, e.error / 2, "HEURISTIC", e.depth, e.eps,
                          dict(e.details, note="archimedean local contribution only"))


def circle_arcsine_energy(precision: int = 53) -> mpmath.mpf:
    """Closed form for (mu_{z^2} - mu_{z^2-2}, same): 4 int_1^2 log w / (pi sqrt(4 - w^2)) dw."""
    with mp.workprec(max(precision, 53)):
        return 4 * mpmath.quad(lambda w: mpmath.log(w) / (mpmath.pi * mpmath.sqrt(4 - w * w)), [1, 2])


# --------------------------------------------------------------------------
# potential estimator and the parameter scan
# --------------------------------------------------------------------------

def _green_terms(f: NumericMap, tol: float = 1e-14) -> int:
    c0, c1 = f.arrays()
    lo, hi = numeric_u_range(c0, c1)
    C1 = max(abs(lo), abs(hi))
    return int(tail_terms(C1, f.degree, tol))


def _potential_at_depth(F: NumericMap, G: NumericMap, nF: int, nG: int, seedsF, seedsG, depth: int):
    sf = equilibrium_sample(F, depth, seedsF)
    sg = equilibrium_sample(G, depth, seedsG)
    cF = F.arrays()
    cG = G.arrays()

    def diff(s):
        gf = green_batch_coeffs(*cF, s.x0, s.x1, nF)
        gg = green_batch_coeffs(*cG, s.x0, s.x1, nG)
        return gf - gg

    df, dg = diff(sf), diff(sg)
    value = -(math.fsum(df) / sf.size - math.fsum(dg) / sg.size)
    scale = (np.abs(df).sum() / sf.size + np.abs(dg).sum() / sg.size)
    return value, scale


def potential_energy(f, g, depth: int = 8, tol: float = 1e-14) -> EnergyEstimate:
    """U(f, g) = -int (g_F - g_G) d(mu_f - mu_g), seeds at the non-exceptional fixed points."""
    F, G = _as_numeric(f), _as_numeric(g)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if F.key() == G.key():
        return EnergyEstimate(0.0, 0.0, "heuristic", depth, 0.0, {"estimator": "potential"})
    nF, nG = _green_terms(F, tol), _green_terms(G, tol)
    seedsF, seedsG = default_seeds(F), default_seeds(G)
    prev, _ = _potential_at_depth(F, G, nF, nG, seedsF, seedsG, depth - 1)
    val, scale = _potential_at_depth(F, G, nF, nG, seedsF, seedsG, depth)
    err = abs(val - prev) + _ROUNDING * (1 + scale)
    return EnergyEstimate(val, err, "heuristic", depth, 0.0,
                          {"estimator": "potential", "previous": prev, "seeds": (len(seedsF), len(seedsG))})


@dataclass(frozen=True)
class MapFamily:
    """Two maps whose coefficients are expressions in a complex parameter t."""
    degree_f: int
    degree_g: int
    f_coeffs: tuple[tuple[str, ...], tuple[str, ...]]
    g_coeffs: tuple[tuple[str, ...], tuple[str, ...]]

    @classmethod
    def from_json(cls, obj) -> "MapFamily":
        def one(m):
            d = int(m["d"])
            c0, c1 = tuple(map(str, m["F0"])), tuple(map(str, m["F1"]))
            if len(c0) != d + 1 or len(c1) != d + 1:
                raise ValueError("coefficient lists must have d+1 entries")
            return d, (c0, c1)
        df, cf = one(obj["f"])
        dg, cg = one(obj["g"])
        return cls(df, dg, cf, cg)

    def _compiled(self):
        t = sympy.Symbol("t")
        fns = []
        for coeffs in (self.f_coeffs, self.g_coeffs):
            pair = []
            for cs in coeffs:
                exprs = []
                for s in cs:
                    try:
                        e = sympy.sympify(s, locals={"t": t, "I": sympy.I})
                    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
                        raise ValueError(f"cannot parse coefficient {s!r}") from exc
                    if e.free_symbols - {t}:
                        raise ValueError(f"coefficient {s!r} uses symbols other than t")
                    exprs.append(sympy.lambdify(t, e, "mpmath"))
                pair.append(exprs)
            fns.append(pair)
        return fns

    def at(self, t: complex) -> tuple[NumericMap, NumericMap]:
        fns = self._compiled()
        out = []
        for (e0, e1) in fns:
            c0 = tuple(complex(e(mpmath.mpc(t))) for e in e0)
            c1 = tuple(complex(e(mpmath.mpc(t))) for e in e1)
            out.append(NumericMap(c0, c1, ""))
        return out[0], out[1]

    @classmethod
    def shifted_square(cls) -> "MapFamily":
        """(z^2, z^2 + t)."""
        return cls(2, 2, (("1", "0", "0"), ("0", "0", "1")), (("1", "0", "t"), ("0", "0", "1")))


@dataclass(frozen=True)
class ScanRow:
    t: complex
    u: float
    err: float


@dataclass
class ScanResult:
    rows: list[ScanRow]
    skipped: list[complex]


def u_parameter_scan(family: MapFamily, grid: Sequence[complex], depth: int = 8,
                     eps: float | None = None, precision: int = 53) -> ScanResult:
    """U(f_t, g_t) over a grid of parameters; degenerate parameters are skipped and listed.

    eps is accepted for symmetry with the kernel estimator; the potential
    estimator does not regularize.
    """
    check_precision(precision)
    rows, skipped = [], []
    fns = family._compiled()
    for t in grid:
        t = complex(t)
        maps = []
        for (e0, e1) in fns:
            c0 = tuple(complex(e(mpmath.mpc(t))) for e in e0)
            c1 = tuple(complex(e(mpmath.mpc(t))) for e in e1)
            maps.append(NumericMap(c0, c1, ""))
        if any(_is_degenerate(m) for m in maps):
            skipped.append(t)
            continue
        try:
            est = potential_energy(maps[0], maps[1], depth)
        except ArithmeticError:
            skipped.append(t)
            continue
        rows.append(ScanRow(t, est.value, est.error))
    if not rows:
        raise ValueError("every grid point is degenerate")
    return ScanResult(rows, skipped)


# --------------------------------------------------------------------------
# regularized energy of finite sets
# --------------------------------------------------------------------------

def arch_regularized_kernel(D, eps, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Circle average of log max(|x + eps e^{i theta} - y|, eps) with D = |x - y|."""
    with mp.workprec(check_precision(precision)):
        D = mpmath.mpf(D.numerator) / D.denominator if isinstance(D, Fraction) else mpmath.mpf(D)
        eps = mpmath.mpf(eps.numerator) / eps.denominator if isinstance(eps, Fraction) else mpmath.mpf(eps)
        if D == 0:
            return mpmath.log(eps)
        if D >= 2 * eps:
            return mpmath.log(D)
        # |.| >= eps exactly for theta in [0, theta*]
        ts = mpmath.acos(-D / (2 * eps))
        inner = mpmath.quad(lambda th: mpmath.log(D * D + eps * eps + 2 * D * eps * mpmath.cos(th)) / 2, [0, ts])
        return (inner + (mpmath.pi - ts) * mpmath.log(eps)) / mpmath.pi


@dataclass(frozen=True)
class SetEnergyResult:
    lhs: mpmath.mpf
    rhs: mpmath.mpf
    per_place: dict
    residual: mpmath.mpf

    @property
    def gap(self) -> mpmath.mpf:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs


def _log_fraction(x: Fraction) -> mpmath.mpf:
    return mpmath.log(x.numerator) - mpmath.log(x.denominator)


def regularized_set_energy(E: GaloisSetQ, eps: AdelicEpsilon,
                           precision: int = DEFAULT_PRECISION) -> SetEnergyResult:
    """Regularized adelic energy of E (lhs) against its lower bound (rhs)."""
    check_precision(precision)
    xs = E.values
    n = len(xs)
    primes = {v.p for v in eps.places if not v.is_archimedean}
    for i in range(n):
        for j in range(i + 1, n):
            den = (xs[i] - xs[j]).denominator
            primes.update(p for p in sympy.factorint(den))
    with mp.workprec(precision + 32):
        per_place = {}
        e_arch = eps[ARCH]
        tot = mpmath.mpf(0)
        for i in range(n):
            for j in range(n):
                tot += arch_regularized_kernel(abs(xs[i] - xs[j]), e_arch, precision + 32)
        per_place["arch"] = tot / n ** 2
        for p in sorted(primes):
            ep = eps[Place(p)]
            log_ep = _log_fraction(ep)
            lp = log_prime(p, precision + 32)
            tot = mpmath.mpf(0)
            for i in range(n):
                for j in range(n):
                    if i == j:
                        tot += log_ep
                    else:
                        tot += max(-valuation(xs[i] - xs[j], p) * lp, log_ep)
            per_place[str(p)] = tot / n ** 2
        lhs = mpmath.fsum(per_place.values())
        residual = mpmath.mpf(0)
        for i in range(n):
            for j in range(n):
                if i != j:
                    residual += product_formula_residual(xs[i] - xs[j], precision + 32)
        residual /= n ** 2
        rhs = mpmath.fsum(_log_fraction(e) for _, e in eps.values) / n + residual
    with mp.workprec(precision):
        return SetEnergyResult(+lhs, +rhs, {k: +v for k, v in per_place.items()}, +residual)


# --------------------------------------------------------------------------
# the split bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaceTerm:
    place: Place
    logC: mpmath.mpf          # log C_v for the averaged bundle (sum of both certificates)
    alpha: mpmath.mpf
    eps: mpmath.mpf
    contribution: mpmath.mpf


@dataclass(frozen=True)
class PairingBoundReport:
    delta: Fraction
    per_place_terms: tuple[PlaceTerm, ...]
    holder_term: mpmath.mpf
    height_term: mpmath.mpf            # average height plus its certified error
    total_upper_bound: mpmath.mpf
    height_error: mpmath.mpf
    generic: dict


def split_bound(f: RationalMapP1, g: RationalMapP1, E: GaloisSetQ, delta, tol=1e-30,
                precision: int = DEFAULT_PRECISION) -> PairingBoundReport:
    """Upper bound for <f, g> from the Hoelder certificates of both maps and E.

    Per place: log C = C_f + C_g, 1/alpha = sum of 1/alpha_i over maps with
    C_i > 0, eps = delta^(1/alpha), contribution 4 log C eps^alpha - log(eps)/#E
    (log C raised to 1 at the archimedean place when positive); places with
    log C = 0 take eps = 1 and contribute 0.
    """
    check_precision(precision)
    delta = as_rational(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not isinstance(E, GaloisSetQ):
        E = GaloisSetQ.of(E)
    n = len(E)
    places = [ARCH] + [Place(p) for p in sorted(set(f.bad_primes) | set(g.bad_primes))]
    with mp.workprec(precision):
        ld = _log_fraction(delta)
        terms = []
        for v in places:
            cf = holder_certificate(f, v, precision)
            cg = holder_certificate(g, v, precision)
            logC = cf.C + cg.C
            inv = sum((1 / c.alpha for c in (cf, cg) if c.C > 0), mpmath.mpf(0))
            if logC > 0:
                alpha = 1 / inv
                lc = max(logC, mpmath.mpf(1)) if v.is_archimedean else logC
                eps = mpmath.exp(ld / alpha)
                contrib = 4 * lc * mpmath.mpf(delta.numerator) / delta.denominator - ld / (alpha * n)
            else:
                alpha, eps, contrib = mpmath.mpf(1), mpmath.mpf(1), mpmath.mpf(0)
            terms.append(PlaceTerm(v, logC, alpha, eps, contrib))
        holder = mpmath.fsum(t.contribution for t in terms)
        avg = average_height(f, g, E.points, tol, precision)
        height = avg.value + avg.certified_error
        d1, d2 = f.degree, g.degree
        # displayed generic constants; C3 and C1 are unpinned in the source
        C3, C1 = mpmath.mpf(1), mpmath.e
        A = 4 * C3 * (d1 + d2 + 1)
        dd = mpmath.mpf(delta.numerator) / delta.denominator
        generic_value = A * (dd - ld / n) * (hrat(f, precision) + hrat(g, precision) + 1) + height
        generic = {"A": A, "B": 4 * C3 * mpmath.log(C1), "C3": C3, "C1": C1, "value": generic_value,
                   "note": "C3 = 1 and C1 = e are placeholders; the slack constants are unpinned"}
        return PairingBoundReport(delta, tuple(terms), holder, height, holder + height, avg.certified_error, generic)


# --------------------------------------------------------------------------
# exceptional pairs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExceptionalClassification:
    status: str                  # EXCEPTIONAL | NOT_DETECTED
    family: str | None = None    # monomial | chebyshev
    lattes: str = "UNKNOWN"
    details: dict = field(default_factory=dict)


def _rational_roots_of_form(form: Sequence[int]) -> list[ProjPointQ]:
    pts = []
    if infinity_multiplicity(form):
        pts.append(INFINITY)
    z = sympy.Symbol("z")
    affine = list(reversed([int(c) for c in form]))   # coefficient of z^k at index k, Y = 1
    while affine and affine[-1] == 0:
        affine.pop()
    if len(affine) > 1:
        poly = sympy.Poly(list(reversed(affine)), z, domain="QQ")
        for r in poly.ground_roots():
            pts.append(ProjPointQ.from_rational(Fraction(int(r.p), int(r.q))))
    return pts


def _preimage_form(f0: Sequence[int], f1: Sequence[int], x: ProjPointQ) -> list[int]:
    """x1 F0 - x0 F1: vanishes exactly on f^-1(x)."""
    return [x.b * a - x.a * b for a, b in zip(f0, f1)]


def _is_power_of_linear(form: Sequence[int], x: ProjPointQ) -> bool:
    """form == c (x1 X - x0 Y)^d for some c != 0."""
    d = len(form) - 1
    lin = [x.b, -x.a]
    pw = [1]
    for _ in range(d):
        pw = form_mul(pw, lin)
    k = next(i for i, c in enumerate(pw) if c)
    if form[k] == 0:
        return False
    # form * pw[k] == pw * form[k]
    return all(form[i] * pw[k] == pw[i] * form[k] for i in range(d + 1))


def _totally_invariant_points(f: RationalMapP1) -> list[ProjPointQ]:
    """Rational points x with (f^2)^-1(x) = {x}."""
    F2 = iterate_lift(f.lift, 2)
    f0, f1 = F2.int_coeffs()
    cands = _rational_roots_of_form(preperiodicity_form(f, 0, 2))
    return [x for x in cands if _is_power_of_linear(_preimage_form(f0, f1, x), x)]


def _moebius_to(x: ProjPointQ, y: ProjPointQ | None):
    """Integer matrix of phi with phi(0) = x and phi(inf) = y (y may be None: any point)."""
    if y is None:
        y = INFINITY if x != INFINITY else ProjPointQ(0, 1)
    # columns are the images of inf and 0: [[y0, x0], [y1, x1]]
    return [[y.a, x.a], [y.b, x.b]]


def _chebyshev(d: int) -> list[int]:
    """Coefficients (ascending) of the monic Chebyshev polynomial with T(w + 1/w) = w^d + w^-d."""
    a, b = [2], [0, 1]
    if d == 0:
        return a
    for _ in range(d - 1):
        nxt = [0] + b
        for i, c in enumerate(a):
            nxt[i] -= c
        a, b = b, nxt
    return b


def _affine_poly(f: RationalMapP1) -> list[Fraction] | None:
    """Ascending coefficients if f is a polynomial in the chart Y = 1."""
    c0, c1 = f.lift.coeffs0, f.lift.coeffs1
    d = f.degree
    if any(c1[i] for i in range(d)) or c1[d] == 0:
        return None
    return [Fraction(c0[d - k]) / c1[d] for k in range(d + 1)]


def _monomial_radius_key(f: RationalMapP1):
    """For f = c z^(+-d): (sign of exponent, |c|^k) normalised so that equal keys mean equal Julia circles."""
    c0, c1 = f.lift.coeffs0, f.lift.coeffs1
    d = f.degree
    if all(c == 0 for c in c0[1:]) and all(c == 0 for c in c1[:d]):      # c z^d
        c = Fraction(c0[0]) / c1[d]
        return ("pos", abs(c), -1, d - 1)       # r = |c|^(-1/(d-1))
    if all(c == 0 for c in c0[:d]) and all(c == 0 for c in c1[1:]):      # c z^-d
        c = Fraction(c0[d]) / c1[0]
        return ("neg", abs(c), 1, d + 1)        # r = |c|^(1/(d+1))
    return None


def _same_radius(a, b) -> bool:
    # r_a = |c_a|^(s_a/m_a), r_b = |c_b|^(s_b/m_b)
    _, ca, sa, ma = a
    _, cb, sb, mb = b
    return ca ** (sa * mb) == cb ** (sb * ma)


def _chebyshev_data(p: list[Fraction]):
    """(centre c, A) if the polynomial p is affinely conjugate to +-T_d, else None."""
    d = len(p) - 1
    lead = p[d]
    c = -p[d - 1] / (d * lead)
    # q(z) = p(z + c) - c
    z = sympy.Symbol("z")
    expr = sympy.expand(sum(sympy.Rational(a.numerator, a.denominator) * (z + sympy.Rational(c.numerator, c.denominator)) ** k
                            for k, a in enumerate(p)) - sympy.Rational(c.numerator, c.denominator))
    q = [Fraction(int(sympy.Rational(expr.coeff(z, k)).p), int(sympy.Rational(expr.coeff(z, k)).q)) for k in range(d + 1)]
    if d == 1:
        return None
    A = -q[d - 2] / (d * q[d])
    if A == 0:
        return None
    t = _chebyshev(d)
    for k in range(d + 1):
        if (d - k) % 2:
            if q[k] != 0:
                return None
        elif q[k] != q[d] * t[k] * A ** ((d - k) // 2):
            return None
    if q[d] ** 2 * A ** (d - 1) != 1:
        return None
    return c, A


def exceptional_pair_lookup(f: RationalMapP1, g: RationalMapP1) -> ExceptionalClassification:
    """Detect pairs simultaneously conjugate to monomials or to Chebyshev polynomials.

    Only rational exceptional points are searched, so a NOT_DETECTED answer is
    not a proof that the pair is not exceptional; Lattes maps are never
    recognised.
    """
    Tf, Tg = _totally_invariant_points(f), _totally_invariant_points(g)
    details = {"exceptional_f": [str(x) for x in Tf], "exceptional_g": [str(x) for x in Tg]}
    if len(Tf) == 2 and set(Tf) == set(Tg):
        x, y = Tf
        phi = _moebius_to(x, y)
        kf = _monomial_radius_key(conjugate(f, phi))
        kg = _monomial_radius_key(conjugate(g, phi))
        if kf and kg and _same_radius(kf, kg):
            return ExceptionalClassification("EXCEPTIONAL", "monomial", details=dict(details, moebius=phi))
        return ExceptionalClassification("NOT_DETECTED", details=dict(details, reason="different Julia circles"))
    if len(Tf) == 1 and Tf == Tg:
        (x,) = Tf
        # send x to infinity
        phi = [[x.a, 1], [x.b, 0]] if x != INFINITY else [[1, 0], [0, 1]]
        pf = _affine_poly(conjugate(f, phi))
        pg = _affine_poly(conjugate(g, phi))
        if pf and pg:
            cf, cg = _chebyshev_data(pf), _chebyshev_data(pg)
            if cf and cg and cf == cg:
                return ExceptionalClassification("EXCEPTIONAL", "chebyshev",
                                                 details=dict(details, moebius=phi, centre=str(cf[0]), A=str(cf[1])))
    return ExceptionalClassification("NOT_DETECTED", details=details)
