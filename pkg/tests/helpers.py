"""Shared generators for random maps and points."""

from __future__ import annotations

import random

from adelic.projmap import DegenerateMapError, ProjPointQ, RationalMapP1


def random_map(rng: random.Random, d: int, bound: int = 20) -> RationalMapP1:
    while True:
        c0 = [rng.randint(-bound, bound) for _ in range(d + 1)]
        c1 = [rng.randint(-bound, bound) for _ in range(d + 1)]
        try:
            return RationalMapP1.from_coeffs(c0, c1)
        except (DegenerateMapError, ValueError):
            continue


def random_point(rng: random.Random, height: int = 50) -> ProjPointQ:
    while True:
        a, b = rng.randint(-height, height), rng.randint(0, height)
        if (a, b) != (0, 0):
            return ProjPointQ.from_pair(a, b) if b else ProjPointQ(1, 0)


def good_primes(f: RationalMapP1, count: int, start: int = 2) -> list[int]:
    from sympy import nextprime
    out, p = [], start
    while len(out) < count:
        if f.resultant % p:
            out.append(p)
        p = nextprime(p)
    return out


SQ = '{"d": 2, "F0": ["1","0","0"], "F1": ["0","0","1"]}'
CHEB = '{"d": 2, "F0": ["1","0","-2"], "F1": ["0","0","1"]}'

# one quick invocation per subcommand
CLI_CASES = {
    "resultant": ["resultant", CHEB],
    "green": ["green", CHEB, "--point", "3", "--tol", "1e-20"],
    "holder-cert": ["holder-cert", CHEB],
    "holder-verify": ["holder-verify", CHEB, "--samples", "500"],
    "height": ["height", CHEB, "--point", "1/2", "--tol", "1e-20"],
    "hrat": ["hrat", CHEB],
    "preper": ["preper", CHEB, "--box", "5"],
    "common-preper": ["common-preper", SQ, CHEB, "--box", "5"],
    "pairing-energy": ["pairing-energy", SQ, CHEB, "--depth", "6"],
    "set-energy": ["set-energy", "--set", '["0","1/2"]', "--eps", '{"arch": "1/2"}'],
    "bound-split": ["bound-split", SQ, CHEB, "--tol", "1e-20"],
    "uscan": ["uscan", "--grid=-2:0:3,0", "--depth", "5", "--threads", "2"],
    "uniform-n": ["uniform-n", "--C", "1", "--C-prime", "0", "--C1", "1", "--C2", "0", "--eps", "1", "--deg", "2"],
    "product-check": ["product-check", "7/10", "-12"],
}


def run_cli(args, env=None):
    import os
    import subprocess
    import sys
    full_env = dict(os.environ)
    full_env.update(env or {})
    return subprocess.run([sys.executable, "-m", "adelic.cli", *args], capture_output=True, env=full_env)
