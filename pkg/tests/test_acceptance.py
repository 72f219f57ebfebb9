"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line with its timing."""

import random
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mp
from sympy import primerange

from adelic.energy import (
    AdelicEpsilon,
    GaloisSetQ,
    circle_arcsine_energy,
    mutual_energy_arch,
    pairing_lower_arch,
    potential_energy,
    regularized_set_energy,
    split_bound,
)
from adelic.green import green_value, holder_certificate, holder_verify
from adelic.heights import canonical_height, naive_height
from adelic.preper import UniformBoundInputs, common_rational_preperiodic, uniform_bound_calculator
from adelic.projmap import INFINITY, ProjPointQ, RationalMapP1, apply, conjugate
from adelic.qfield import ARCH, Place, product_formula_residual

from acceptance_log import record
from helpers import CLI_CASES, good_primes, random_map, random_point, run_cli

SQUARE = RationalMapP1.polynomial([1, 0, 0])
CHEB = RationalMapP1.polynomial([1, 0, -2])
SMALL_PRIMES = list(primerange(2, 10_000))


def _random_factored_rational(rng):
    """A random rational of up to ~40 digits, built from primes so its factorisation is known."""
    fac = {}
    for _ in range(rng.randint(1, 8)):
        p = rng.choice(SMALL_PRIMES)
        fac[p] = fac.get(p, 0) + rng.choice([-3, -2, -1, 1, 2, 3])
    fac = {p: e for p, e in fac.items() if e}
    x = Fraction(1)
    for p, e in fac.items():
        x *= Fraction(p) ** e
    return (-x if rng.random() < 0.5 else x), fac


def test_criterion_01_product_formula():
    rng = random.Random(101)
    cases = [_random_factored_rational(rng) for _ in range(1000)]
    t0 = time.perf_counter()
    with mp.workprec(256):
        worst = max(abs(product_formula_residual(x, 256, fac)) for x, fac in cases)
        ok = worst <= mpmath.mpf(2) ** -240
    dt = time.perf_counter() - t0
    status = record(1, "product formula, 1000 rationals", ok, dt, 1.0, f"max residual {mpmath.nstr(worst, 3)}")
    assert status == "PASS"


def test_criterion_02_height_functional_equation():
    rng = random.Random(202)
    t0 = time.perf_counter()
    worst_ratio = 0.0
    ok = True
    for k in range(100):
        d = 2 if k % 2 == 0 else 3
        f = random_map(rng, d, bound=20)
        x = random_point(rng)
        with mp.workprec(256):
            a = canonical_height(f, x, 1e-30)
            b = canonical_height(f, apply(f, x), 1e-30)
            gap = abs(b.value - d * a.value)
            limit = (d + 1) * mpmath.mpf(10) ** -30
            worst_ratio = max(worst_ratio, float(gap / limit))
            ok &= gap <= limit
    dt = time.perf_counter() - t0
    status = record(2, "height functional equation, 100 cases", bool(ok), dt, 30.0,
                    f"max gap / limit {worst_ratio:.2e}")
    assert status == "PASS"


def test_criterion_03_monomial_exactness():
    rng = random.Random(303)
    pts = [random_point(rng, 10**6) for _ in range(100)]
    t0 = time.perf_counter()
    ok = True
    with mp.workprec(256):
        for x in pts:
            h = canonical_height(SQUARE, x, 1e-30)
            ok &= abs(h.value - naive_height(x)) <= mpmath.mpf(10) ** -30
    dt = time.perf_counter() - t0
    status = record(3, "monomial height exactness, 100 points", bool(ok), dt, 5.0)
    assert status == "PASS"


def test_criterion_04_good_reduction_vanishing():
    rng = random.Random(404)
    t0 = time.perf_counter()
    ok, checks = True, 0
    for _ in range(20):
        f = random_map(rng, rng.choice([2, 3]))
        for p in good_primes(f, 3):
            for _ in range(50):
                g = green_value(f, random_point(rng), Place(p))
                ok &= g.value == 0 and g.error == 0
                checks += 1
    dt = time.perf_counter() - t0
    status = record(4, "good-reduction vanishing", bool(ok), dt, 10.0, f"{checks} exact zeros checked")
    assert status == "PASS"


def test_criterion_05_holder_certificates():
    rng = random.Random(505)
    t0 = time.perf_counter()
    passed = failed_corrupt = places = 0
    problems = []
    for k in range(20):
        f = random_map(rng, 2 if k % 2 == 0 else 3, bound=20)
        for v in [ARCH] + [Place(p) for p in f.bad_primes]:
            places += 1
            cert = holder_certificate(f, v)
            rep = holder_verify(f, v, cert, num_samples=10_000, rng_seed=k)
            bad = holder_verify(f, v, cert.scaled(mpmath.mpf(1) / 10), num_samples=10_000, rng_seed=k)
            passed += rep.passed
            caught = (not bad.passed) and bad.witness is not None
            failed_corrupt += caught
            if not rep.passed or not caught:
                problems.append((k, str(v), rep.passed, caught))
    dt = time.perf_counter() - t0
    ok = not problems
    status = record(5, "Hoelder certificates verify, C/10 corruption fails", ok, dt, 300.0,
                    f"{passed}/{places} verified, {failed_corrupt}/{places} corruptions caught"
                    + (f"; problems {problems}" if problems else ""))
    assert status == "PASS"


def test_criterion_06_common_preperiodic_enumeration():
    t0 = time.perf_counter()
    common = common_rational_preperiodic(SQUARE, CHEB, mpmath.log(10))
    expected = {INFINITY} | {ProjPointQ.parse(s) for s in ("0", "1", "-1")}
    ok = set(common) == expected
    with mp.workprec(256):
        for x, orbits in common.items():
            for f, o in zip((SQUARE, CHEB), orbits):
                m, n = o.witness
                y = x
                pts = []
                for _ in range(n + 1):
                    pts.append(y)
                    y = apply(f, y)
                ok &= pts[m] == pts[n]
                h = canonical_height(f, x, 1e-25)
                ok &= abs(h.value) + h.certified_error <= mpmath.mpf(10) ** -20
    dt = time.perf_counter() - t0
    status = record(6, "common preperiodic points of z^2, z^2-2", bool(ok), dt, 10.0,
                    "found " + ", ".join(str(x) for x in common))
    assert status == "PASS"


def test_criterion_07_set_energy_inequality():
    rng = random.Random(707)
    places = ["arch", "2", "3", "5", "7", "11"]
    t0 = time.perf_counter()
    worst = None
    for _ in range(200):
        E = set()
        while len(E) < rng.randint(1, 6):
            E.add(Fraction(rng.randint(-30, 30), rng.randint(1, 12)))
        eps = {v: Fraction(rng.randint(1, 40), 40) for v in rng.sample(places, rng.randint(0, 3))}
        res = regularized_set_energy(GaloisSetQ.of(sorted(E)), AdelicEpsilon.parse(eps), 128)
        with mp.workprec(128):
            gap = res.lhs - res.rhs
        worst = gap if worst is None or gap < worst else worst
    dt = time.perf_counter() - t0
    ok = worst >= -1e-10
    status = record(7, "regularized energy lower bound, 200 cases", bool(ok), dt, 60.0,
                    f"min lhs - rhs {mpmath.nstr(worst, 3)}")
    assert status == "PASS"


def test_criterion_08_mutual_energy_oracle():
    t0 = time.perf_counter()
    est = mutual_energy_arch(SQUARE, CHEB, depth=9)
    oracle = circle_arcsine_energy()
    rel = float(abs(est.value - oracle) / oracle)
    dt = time.perf_counter() - t0
    status = record(8, "mutual energy vs circle/arcsine oracle", rel <= 0.05, dt, 120.0,
                    f"estimate {est.value:.5f}, oracle {float(oracle):.5f}, rel {rel:.3%}")
    assert status == "PASS"


def _test_set(f, g):
    common = common_rational_preperiodic(f, g, mpmath.log(10))
    pts = [x for x in common if x.b != 0]
    return GaloisSetQ.of(pts) if pts else GaloisSetQ.of(["0"])


def test_criterion_09_split_bound_consistency():
    rng = random.Random(909)
    t0 = time.perf_counter()
    ok = True
    margins = []
    for k in range(20):
        d = 2 if k % 2 == 0 else 3
        f, g = random_map(rng, d, bound=10), random_map(rng, d, bound=10)
        rep = split_bound(f, g, _test_set(f, g), Fraction(1, 2), tol=1e-20)
        low = pairing_lower_arch(f, g, depth=9 if d == 2 else 6)
        margin = float(rep.total_upper_bound) - (low.value - low.error)
        margins.append(margin)
        ok &= margin >= 0
    dt = time.perf_counter() - t0
    status = record(9, "split bound dominates archimedean lower estimate", bool(ok), dt, 600.0,
                    f"min margin {min(margins):.3f}")
    assert status == "PASS"


def test_criterion_10_conjugation_invariance():
    rng = random.Random(1010)
    t0 = time.perf_counter()
    pairs = []
    while len(pairs) < 5:
        f, g = random_map(rng, 2, bound=5), random_map(rng, 2, bound=5)
        if f != g:
            pairs.append((f, g))
    moebius = []
    while len(moebius) < 10:
        m = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 0:
            moebius.append(m)
    worst = 0.0
    ok = True
    for f, g in pairs:
        base = potential_energy(f, g)
        for m in moebius:
            other = potential_energy(conjugate(f, m), conjugate(g, m))
            allow = 2 * max(base.error, other.error)
            gap = abs(base.value - other.value)
            worst = max(worst, gap / allow if allow else (0.0 if gap == 0 else float("inf")))
            ok &= gap <= allow
    dt = time.perf_counter() - t0
    status = record(10, "conjugation invariance of U", bool(ok), dt, 300.0, f"max gap / allowance {worst:.3f}")
    assert status == "PASS"


def test_criterion_11_uniform_bound_example():
    t0 = time.perf_counter()
    res = uniform_bound_calculator(UniformBoundInputs(C=1, C_prime=0, C1=1, C2=0, eps=1, deg=2))
    with mp.workprec(256):
        ok = (res.N == 19
              and abs(res.small_height_branch - 8 * mpmath.log(8)) < mpmath.mpf(10) ** -60
              and abs(res.large_height_branch - 4 * mpmath.log(2)) < mpmath.mpf(10) ** -60)
    dt = time.perf_counter() - t0
    status = record(11, "uniform bound worked example", ok, dt, 1.0,
                    f"N = {res.N}, branches {mpmath.nstr(res.small_height_branch, 8)}, "
                    f"{mpmath.nstr(res.large_height_branch, 8)}")
    assert status == "PASS"


def test_criterion_12_determinism():
    t0 = time.perf_counter()
    differing = []
    for name, args in sorted(CLI_CASES.items()):
        a, b = run_cli(args), run_cli(args)
        if a.returncode != 0 or a.stdout != b.stdout or a.returncode != b.returncode:
            differing.append(name)
    dt = time.perf_counter() - t0
    status = record(12, "byte-identical repeated CLI runs", not differing, dt, float("inf"),
                    f"{len(CLI_CASES)} subcommands" + (f"; differing {differing}" if differing else ""))
    assert status == "PASS"
