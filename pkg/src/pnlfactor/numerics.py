"""Integer and high-precision real helpers shared by the rest of the package.

Python ints are the big integers. High-precision reals are ``mpmath.mpf``
values produced under an explicit working precision (in bits); callers pass
``prec`` around rather than relying on mpmath's global context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath

# Deterministic Miller-Rabin witnesses, valid for n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def default_prec(n: int) -> int:
    """Working precision used for a number ``n`` to be factored."""
    return 64 + 2 * n.bit_length()


def workprec(prec: int):
    return mpmath.workprec(prec)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with a fixed witness schedule (deterministic below 3.3e24)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i, f in enumerate(flags) if f]


@dataclass(frozen=True)
class FactorBase:
    """Extended prime list ``(-1, 2, 3, ..., p_d)``."""

    primes: tuple[int, ...]

    def __post_init__(self):
        if len(self.primes) < 2 or self.primes[0] != -1:
            raise ValueError("factor base must start with -1 followed by primes")
        ps = self.primes[1:]
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValueError("primes must be strictly increasing")

    @property
    def d(self) -> int:
        return len(self.primes) - 1

    @property
    def largest(self) -> int:
        return self.primes[-1]

    def __len__(self) -> int:
        return len(self.primes)

    def __getitem__(self, i: int) -> int:
        return self.primes[i]

    def __iter__(self):
        return iter(self.primes)


def primes_first(d: int) -> FactorBase:
    """Return ``-1`` followed by the first ``d`` primes."""
    if d < 1:
        raise ValueError("d must be >= 1")
    # p_d < d (ln d + ln ln d) for d >= 6
    limit = 15
    if d >= 6:
        limit = int(d * (math.log(d) + math.log(math.log(d)))) + 1
    return FactorBase((-1, *_sieve(limit)[:d]))


@lru_cache(maxsize=8192)
def ln_hp(x: int, prec: int) -> mpmath.mpf:
    """Natural log of a positive integer with relative error below 2**(1-prec)."""
    if x <= 0:
        raise ValueError(f"logarithm of non-positive integer {x}")
    if x == 1:
        return mpmath.mpf(0)
    # guard bits so the final rounding dominates the error
    with mpmath.workprec(prec + 20):
        val = mpmath.log(mpmath.mpf(x))
    with mpmath.workprec(prec):
        return +val


def gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def mod_pow(base: int, exp: int, m: int) -> int:
    if m < 2:
        raise ValueError("modulus must be >= 2")
    if exp < 0:
        raise ValueError("exponent must be non-negative")
    return pow(base, exp, m)


def integer_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    r = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def perfect_power(n: int) -> tuple[int, int] | None:
    """Return ``(root, k)`` with ``root**k == n`` and k maximal-first search, else None."""
    for k in range(n.bit_length(), 1, -1):
        r = integer_root(n, k)
        if r > 1 and r**k == n:
            return r, k
    return None


def product_of_powers(primes: Sequence[int], exponents: Sequence[int]) -> int:
    out = 1
    for p, e in zip(primes, exponents):
        if e:
            out *= p**e
    return out
