"""Sieved arithmetic tables over [1, X]: primes, von Mangoldt, Moebius.

The sieve is segmented (span 10**7) so X up to 10**8 stays within ~1 GiB; the
dominant memory is the per-n value tables themselves.  A finished PrimeTable
is immutable and safe to share across workers.
"""

import math

import numpy as np

from .errors import DomainError

MAX_LIMIT = 10**8
_SEGMENT = 10**7


class PrimeTable:
    """Primes <= limit plus per-n Mangoldt (float64) and Moebius (int8) tables.

    mangoldt[n] and moebius[n] are indexed directly by n (index 0 unused).
    """

    __slots__ = ("limit", "primes", "mangoldt", "moebius", "_support", "_support_w")

    def __init__(self, limit, primes, mangoldt, moebius):
        self.limit = limit
        self.primes = primes
        self.mangoldt = mangoldt
        self.moebius = moebius
        self._support = None
        self._support_w = None

    def primes_upto(self, x):
        """Array view of the primes <= x."""
        if x > self.limit:
            raise DomainError(f"x = {x} exceeds table limit {self.limit}")
        k = int(np.searchsorted(self.primes, x, side="right"))
        return self.primes[:k]

    def mangoldt_support(self, x):
        """(n, mangoldt(n)) arrays over prime powers n <= x, ascending n."""
        if x > self.limit:
            raise DomainError(f"x = {x} exceeds table limit {self.limit}")
        if self._support is None:
            sup = np.flatnonzero(self.mangoldt > 0.0).astype(np.int64)
            self._support = sup
            self._support_w = self.mangoldt[sup]
        k = int(np.searchsorted(self._support, x, side="right"))
        return self._support[:k], self._support_w[:k]


def _base_primes(limit):
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def sieve(x):
    """Build the full PrimeTable up to x (2 <= x <= 10**8)."""
    if not isinstance(x, int) or x < 2 or x > MAX_LIMIT:
        raise DomainError(f"sieve limit must be an integer in [2, {MAX_LIMIT}], got {x!r}")
    base = _base_primes(math.isqrt(x))
    mangoldt = np.zeros(x + 1, dtype=np.float64)
    moebius = np.ones(x + 1, dtype=np.int8)
    moebius[0] = 0
    prime_chunks = []
    for lo in range(2, x + 1, _SEGMENT):
        hi = min(lo + _SEGMENT, x + 1)
        span = hi - lo
        is_p = np.ones(span, dtype=bool)
        rem = np.arange(lo, hi, dtype=np.int64)
        mu = moebius[lo:hi]
        for p in base:
            p = int(p)
            first = ((lo + p - 1) // p) * p
            strike = max(p * p, first)  # keep p itself prime
            if strike < hi:
                is_p[strike - lo :: p] = False
            if first < hi:
                sl = slice(first - lo, span, p)
                mu[sl] *= -1
                rem[sl] //= p
            p2 = p * p
            first2 = ((lo + p2 - 1) // p2) * p2
            if first2 < hi:
                mu[first2 - lo :: p2] = 0
        # entries whose cofactor is a single prime > sqrt(x)
        big = rem > 1
        mu[big] *= -1
        seg_primes = np.flatnonzero(is_p).astype(np.int64) + lo
        prime_chunks.append(seg_primes)
        mangoldt[seg_primes] = np.log(seg_primes.astype(np.float64))
    primes = np.concatenate(prime_chunks) if prime_chunks else np.empty(0, np.int64)
    # prime powers p**k, k >= 2
    for p in primes[primes <= math.isqrt(x)]:
        p = int(p)
        lp = math.log(p)
        n = p * p
        while n <= x:
            mangoldt[n] = lp
            n *= p
    primes.setflags(write=False)
    mangoldt.setflags(write=False)
    moebius.setflags(write=False)
    return PrimeTable(limit=x, primes=primes, mangoldt=mangoldt, moebius=moebius)


def pi(table, x):
    """Number of primes <= x."""
    return int(table.primes_upto(x).size)


def pi1(table, n):
    """Number of primes in (n, 2n]."""
    if 2 * n > table.limit:
        raise DomainError(f"2N = {2 * n} exceeds table limit {table.limit}")
    return pi(table, 2 * n) - pi(table, n)
