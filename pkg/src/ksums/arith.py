"""Exact modular and multiplicative arithmetic.

Moduli are factored once and cached; the Modulus record carries the
arithmetic functions (omega, tau, tau3, phi) that appear in every explicit
bound.  All operations are pure; Modulus and Residue are immutable.
"""

import functools
import math
from dataclasses import dataclass

from ._backend import impl
from .errors import DomainError, NotInvertible

MAX_Q = 1 << 63

# Deterministic Miller-Rabin witness set for n < 2**64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_LIMIT = 1000


@dataclass(frozen=True)
class Modulus:
    """A modulus q >= 2 with its factorization and derived functions.

    factors is sorted by prime; omega counts distinct primes, tau the
    divisors, tau3 the ordered triples (d1, d2, d3) with d1*d2*d3 = q, phi
    the Euler totient.
    """

    q: int
    factors: tuple[tuple[int, int], ...]
    omega: int
    tau: int
    tau3: int
    phi: int

    @property
    def prime_divisors(self):
        return tuple(p for p, _ in self.factors)

    def divisors(self):
        """All divisors of q, sorted ascending."""
        ds = [1]
        for p, a in self.factors:
            ds = [d * p**k for d in ds for k in range(a + 1)]
        return sorted(ds)

    def __int__(self):
        return self.q


@dataclass(frozen=True)
class Residue:
    """An integer normalized to [0, q)."""

    value: int
    modulus: Modulus

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.modulus.q)

    def __int__(self):
        return self.value


def egcd(x, y):
    """Extended gcd: returns (g, u, v) with u*x + v*y = g = gcd(|x|, |y|)."""
    if x == 0 and y == 0:
        raise DomainError("egcd(0, 0) is undefined")
    a, b = x, y
    u0, v0, u1, v1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        u0, u1 = u1, u0 - t * u1
        v0, v1 = v1, v0 - t * v1
    if a < 0:
        a, u0, v0 = -a, -u0, -v0
    return a, u0, v0


def _as_modulus(q):
    return q if isinstance(q, Modulus) else factorize(q)


def modinv(n, q):
    """The residue nbar with n*nbar = 1 (mod q), in [1, q)."""
    mod = _as_modulus(q)
    g = math.gcd(n, mod.q)
    if g != 1:
        raise NotInvertible(n, mod.q, g)
    return Residue(pow(n, -1, mod.q), mod)


def batch_modinv(ns, q):
    """Elementwise modinv with one inversion plus O(len) products.

    Raises NotInvertible identifying the first bad index.
    """
    mod = _as_modulus(q)
    import numpy as np

    arr = np.asarray(list(ns), dtype=np.int64)
    try:
        out = impl().batch_inverse(arr, mod.q)
    except ValueError as exc:
        i = int(str(exc))
        n = int(arr[i])
        raise NotInvertible(n, mod.q, math.gcd(n, mod.q), index=i) from None
    return [Residue(int(v), mod) for v in out]


def _is_prime(n):
    """Deterministic Miller-Rabin, valid for n < 2**64."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho_factor(n):
    """Brent-cycle rho with a deterministic parameter sweep; n composite, odd."""
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"rho failed on {n}")  # not reachable below 2**63


def _factor_into(n, out):
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    # trial division on the 6k+-1 wheel below the threshold
    while f <= _TRIAL_LIMIT and f * f <= n:
        for g in (f, f + 4):
            while n % g == 0:
                out[g] = out.get(g, 0) + 1
                n //= g
        f += 6
    if n == 1:
        return
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _rho_factor(m)
        stack.append(d)
        stack.append(m // d)


@functools.lru_cache(maxsize=None)
def factorize(q):
    """Complete factorization of q as an immutable Modulus record."""
    if not isinstance(q, int) or q < 2:
        raise DomainError(f"modulus must be an integer >= 2, got {q!r}")
    if q >= MAX_Q:
        raise DomainError(f"modulus must be below 2**63, got {q}")
    fac = {}
    _factor_into(q, fac)
    factors = tuple(sorted(fac.items()))
    omega = len(factors)
    tau = 1
    tau3 = 1
    phi = 1
    for p, a in factors:
        tau *= a + 1
        tau3 *= (a + 1) * (a + 2) // 2
        phi *= p ** (a - 1) * (p - 1)
    return Modulus(q=q, factors=factors, omega=omega, tau=tau, tau3=tau3, phi=phi)


def mu_of(n):
    """Moebius function of n >= 1 via factorization."""
    if n == 1:
        return 1
    mod = factorize(n)
    for _, a in mod.factors:
        if a >= 2:
            return 0
    return -1 if mod.omega % 2 else 1


def mangoldt_of(n):
    """Von Mangoldt function of n >= 1: ln p when n = p**k, else 0."""
    if n <= 1:
        return 0.0
    mod = factorize(n)
    if mod.omega == 1:
        return math.log(mod.factors[0][0])
    return 0.0
