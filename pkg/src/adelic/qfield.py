"""Exact rationals, the places of Q, and product-formula utilities.

Rationals are :class:`fractions.Fraction`.  Finite-place quantities are kept
as integer exponents of a prime and only turned into floating logarithms
(mpmath ``mpf``) when they are aggregated, so all ultrametric bookkeeping
is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Union

import gmpy2
import mpmath
from mpmath import mp
from sympy import factorint

DEFAULT_PRECISION = 256
MIN_PRECISION = 53

RationalLike = Union[Fraction, int, str]


def as_rational(x: RationalLike) -> Fraction:
    """Coerce ``x`` to a Fraction; strings use the ``"num/den"`` form."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational {x!r}") from exc
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def is_prime(p: int) -> bool:
    return p >= 2 and bool(gmpy2.is_prime(p, 40))


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q: ``p is None`` for the archimedean one, else a prime."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def is_archimedean(self) -> bool:
        return self.p is None

    @property
    def local_degree(self) -> int:
        return 1

    @classmethod
    def parse(cls, s: str | int) -> "Place":
        if isinstance(s, int):
            return cls(s)
        s = s.strip().lower()
        if s in ("arch", "inf", "infinity", "oo"):
            return ARCH
        return cls(int(s))

    def __str__(self) -> str:
        return "arch" if self.p is None else str(self.p)


ARCH = Place()


def check_precision(precision: int) -> int:
    if precision < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} bits, got {precision}")
    return int(precision)


def _vp_int(n: int, p: int) -> int:
    # gmpy2 removes all factors of p at once
    return int(gmpy2.remove(gmpy2.mpz(n), p)[1])


def valuation(x: RationalLike, p: int) -> int:
    """p-adic valuation v_p(x) of a nonzero rational."""
    x = as_rational(x)
    if x == 0:
        raise ValueError("valuation of zero")
    return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)


def finite_log_exponent(x: RationalLike, p: int) -> int:
    """Integer k with log|x|_p = k * log p (that is, k = -v_p(x))."""
    return -valuation(x, p)


@lru_cache(maxsize=4096)
def _log_prime_cached(p: int, prec: int) -> mpmath.mpf:
    with mp.workprec(prec):
        return +mpmath.log(p)


def log_prime(p: int, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    return _log_prime_cached(int(p), int(precision))


def log_abs(x: RationalLike, v: Place, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """log|x|_v with the normalisation for which the product formula holds."""
    x = as_rational(x)
    if x == 0:
        raise ValueError("log_abs of zero")
    check_precision(precision)
    with mp.workprec(precision):
        if v.is_archimedean:
            return mpmath.log(abs(x.numerator)) - mpmath.log(x.denominator)
        k = finite_log_exponent(x, v.p)
        return k * log_prime(v.p, precision) if k else mpmath.mpf(0)


@lru_cache(maxsize=8192)
def factor_integer(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of |n| as sorted ((p, e), ...); cached."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor zero")
    return tuple(sorted(factorint(n).items()))


def _checked_factorization(x: Fraction, factorization: Mapping[int, int]) -> dict[int, int]:
    num, den = 1, 1
    for p, e in factorization.items():
        if not is_prime(p):
            raise ValueError(f"factorization base {p} is not prime")
        if e > 0:
            num *= p**e
        elif e < 0:
            den *= p ** (-e)
    if num != abs(x.numerator) or den != x.denominator:
        raise ValueError("factorization does not reproduce x")
    return {p: e for p, e in factorization.items() if e}


def support_primes(x: RationalLike) -> set[int]:
    """Primes dividing the numerator or denominator of x."""
    x = as_rational(x)
    if x == 0:
        raise ValueError("support of zero")
    out = set()
    for n in (x.numerator, x.denominator):
        if abs(n) > 1:
            out.update(p for p, _ in factor_integer(n))
    return out


def rational_factorization(x: RationalLike) -> dict[int, int]:
    """{p: v_p(x)} over the support of x."""
    x = as_rational(x)
    if x == 0:
        raise ValueError("factorization of zero")
    out: dict[int, int] = {}
    if abs(x.numerator) > 1:
        out.update(factor_integer(x.numerator))
    if x.denominator > 1:
        out.update((p, -e) for p, e in factor_integer(x.denominator))
    return out


def product_formula_residual(
    x: RationalLike,
    precision: int = DEFAULT_PRECISION,
    factorization: Mapping[int, int] | None = None,
) -> mpmath.mpf:
    """Sum of log|x|_v over the archimedean place and the support of x.

    Mathematically zero.  ``factorization`` ({p: v_p(x)}) may be passed when
    it is already known; it is verified (primality of every base and exact
    reconstruction of x) instead of recomputed.
    """
    x = as_rational(x)
    if x == 0:
        raise ValueError("product formula residual of zero")
    check_precision(precision)
    if factorization is None:
        fac = rational_factorization(x)
    else:
        fac = _checked_factorization(x, factorization)
    with mp.workprec(precision):
        total = log_abs(x, ARCH, precision)
        # finite places: log|x|_p = -v_p(x) log p, with exact integer exponents
        for p in sorted(fac):
            total -= fac[p] * log_prime(p, precision)
        return total
