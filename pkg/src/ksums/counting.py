"""Solution counting for the quadratic and inverse-sum congruences.

Every counter has at least two independent routes: a structural fast path
(square-root counting per prime power, CRT combination, hash-key grouping)
and a brute-force oracle for moderate inputs.  The explicit upper bounds
carried alongside each count are the inequalities under test; a finite bound
smaller than the exact count is a flagged violation, never silently dropped.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .arith import Modulus, Residue, factorize
from .errors import DomainError

_BRUTE_LIMIT = 10**5


@dataclass(frozen=True)
class CountResult:
    """An exact count, the applicable explicit bound, and the method tag.

    bound is +inf when the reference inequality carries an implicit
    constant; envelope then holds the trend reference instead.
    """

    value: int
    bound: float
    method: str
    envelope: float | None = None

    @property
    def violates(self):
        return math.isfinite(self.bound) and self.value > self.bound * (1.0 + 1e-12)


def _as_mod(q):
    return q if isinstance(q, Modulus) else factorize(q)


def _as_int(v):
    return v.value if isinstance(v, Residue) else int(v)


# ---------------------------------------------------------------------------
# nu: x**2 = A (mod q)
# ---------------------------------------------------------------------------


def _sqrt_roots_mod_p(a, p):
    """Roots of y**2 = a (mod p) for odd prime p, gcd(a, p) = 1; sorted."""
    if pow(a, (p - 1) // 2, p) != 1:
        return []
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
        return sorted({r, p - r})
    # Tonelli-Shanks with a deterministic non-residue scan
    s = 0
    d = p - 1
    while d % 2 == 0:
        d //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    c = pow(z, d, p)
    r = pow(a, (d + 1) // 2, p)
    t = pow(a, d, p)
    m = s
    while t != 1:
        i = 1
        x = t * t % p
        while x != 1:
            x = x * x % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        r = r * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return sorted({r, p - r})


def _unit_sqrt_roots(a, p, e):
    """Roots of y**2 = a (mod p**e) with gcd(a, p) = 1; sorted list.

    Odd p lifts the mod-p roots by Hensel steps; p = 2 uses the hardcoded
    mod 2 / 4 / 8 cases and the two-adic lift above.
    """
    pe = p**e
    a %= pe
    if p == 2:
        if e == 1:
            return [1]
        if e == 2:
            return [1, 3] if a % 4 == 1 else []
        if a % 8 != 1:
            return []
        y = 1
        for k in range(3, e):
            if (y * y - a) % (1 << (k + 1)):
                y += 1 << (k - 1)
        half = 1 << (e - 1)
        return sorted({y % pe, (pe - y) % pe, (y + half) % pe, (pe - y + half) % pe})
    roots = _sqrt_roots_mod_p(a % p, p)
    if not roots:
        return []
    y = roots[0]
    pk = p
    while pk < pe:
        pk *= p
        y = (y - (y * y - a) * pow(2 * y, -1, pk)) % pk
    return sorted({y, pe - y})


def _nu_prime_power(p, e, a_val):
    """Solutions of x**2 = A (mod p**e), following the valuation case split."""
    pe = p**e
    a_val %= pe
    if a_val == 0:
        return p ** (e // 2)
    beta = 0
    t = a_val
    while t % p == 0:
        t //= p
        beta += 1
    if beta % 2:  # odd valuation: unsolvable
        return 0
    gamma = beta // 2
    return len(_unit_sqrt_roots(t, p, e - beta)) * p**gamma


def nu(q, a_val, method="fast"):
    """Count x in [1, q] with x**2 = A (mod q).

    Bound: 2**(omega(q)+c) * sqrt(gcd(A, q)) with c = 1 for even q.
    """
    mod = _as_mod(q)
    a_val = int(a_val)
    if method == "fast":
        value = 1
        for p, e in mod.factors:
            value *= _nu_prime_power(p, e, a_val)
            if value == 0:
                break
    elif method == "brute":
        if mod.q > _BRUTE_LIMIT:
            raise DomainError(f"brute nu limited to q <= {_BRUTE_LIMIT}")
        xs = np.arange(1, mod.q + 1, dtype=np.int64)
        value = int(np.count_nonzero((xs * xs - a_val) % mod.q == 0))
    else:
        raise DomainError(f"unknown method {method!r}")
    c = 1 if mod.q % 2 == 0 else 0
    bound = 2.0 ** (mod.omega + c) * math.sqrt(math.gcd(a_val, mod.q))
    return CountResult(value=value, bound=bound, method=method)


def mu_count(q, a_val, method="fast"):
    """Count x in [1, q] with x(x+1) = a (mod q).

    The substitution y = 2x+1 turns the congruence into y**2 = 4a+1
    (mod 4q); x = (y-1)/2 maps back, and exactly half the y classes mod 4q
    correspond to x classes mod q, so the count is nu(4q; 4a+1)/2.
    Bound: 4 * 2**omega(q) * sqrt(gcd(4a+1, q)).
    """
    mod = _as_mod(q)
    a_val = int(a_val)
    disc = 4 * a_val + 1
    if method == "fast":
        value = nu(4 * mod.q, disc, method="fast").value // 2
    elif method == "brute":
        if mod.q > _BRUTE_LIMIT:
            raise DomainError(f"brute mu limited to q <= {_BRUTE_LIMIT}")
        xs = np.arange(1, mod.q + 1, dtype=np.int64)
        value = int(np.count_nonzero((xs * (xs + 1) - a_val) % mod.q == 0))
    else:
        raise DomainError(f"unknown method {method!r}")
    bound = 4.0 * 2.0**mod.omega * math.sqrt(math.gcd(disc, mod.q))
    return CountResult(value=value, bound=bound, method=method)


def e_roots(n, h, method="auto"):
    """Count z in [1, h] with z**n = 1 (mod h).

    n = 2 has a closed multiplicative form; other n fall back to brute force.
    """
    if h < 1:
        raise DomainError("modulus must be >= 1")
    if h == 1:
        return 1
    if n == 2 and method != "brute":
        mod = factorize(h)
        out = 1
        for p, e in mod.factors:
            if p == 2:
                out *= 1 if e == 1 else (2 if e == 2 else 4)
            else:
                out *= 2
        return out
    return sum(1 for z in range(1, h + 1) if pow(z, n, h) == 1)


# ---------------------------------------------------------------------------
# kappa: g(x) = g(y) (mod q) for g(x) = a*xbar + b*x
# ---------------------------------------------------------------------------


def _unit_residues(q, prime_divisors):
    mask = np.ones(q, dtype=bool)
    mask[0] = False
    for p in prime_divisors:
        mask[::p] = False
    return np.flatnonzero(mask).astype(np.int64)


def _g_values(mod, a, b):
    """g(x) over the units of q, as (units, values) int64 arrays."""
    q = mod.q
    units = _unit_residues(q, mod.prime_divisors)
    if q < 2**31:
        inv = np.asarray(_backend.impl().batch_inverse(units, q), dtype=np.int64)
        g = (a % q * inv + b % q * units) % q
    else:
        g = np.asarray(
            [(a * pow(int(x), -1, q) + b * int(x)) % q for x in units], dtype=np.int64
        )
    return units, g


def kappa(q, a, b, method="hashed"):
    """Count pairs (x, y) of units mod q with g(x) = g(y) (mod q).

    Bound: 2**(omega(q)+1) * tau(q) * q.  The hashed route groups x by the
    value g(x); the brute oracle counts, for each x, the roots y of
    (y - x)(y - a*bbar*xbar) = 0 (mod q) via divisor-split CRT.
    """
    mod = _as_mod(q)
    a, b = _as_int(a), _as_int(b)
    if math.gcd(a * b, mod.q) != 1:
        raise DomainError(f"kappa requires gcd(ab, q) = 1, got a = {a}, b = {b}, q = {mod.q}")
    if method == "hashed":
        _, g = _g_values(mod, a, b)
        counts = np.bincount(g, minlength=mod.q)
        value = int(np.dot(counts, counts))
    elif method == "brute":
        if mod.q > 10**4:
            raise DomainError("brute kappa limited to q <= 10**4")
        value = _kappa_brute(mod, a, b)
    else:
        raise DomainError(f"unknown method {method!r}")
    bound = 2.0 ** (mod.omega + 1) * mod.tau * mod.q
    return CountResult(value=value, bound=bound, method=method)


def _kappa_brute(mod, a, b):
    q = mod.q
    # per-divisor CRT data for y = x (mod d), y = z (mod q/d)
    splits = []
    for d in mod.divisors():
        e = q // d
        g = math.gcd(d, e)
        dg, eg = d // g, e // g
        splits.append((d, g, dg, eg, pow(dg, -1, eg) if eg > 1 else 0, q // g))
    abar_b = a * pow(b, -1, q) % q
    total = 0
    for x in range(1, q + 1):
        if math.gcd(x, q) != 1:
            continue
        z = abar_b * pow(x, -1, q) % q
        roots = set()
        for d, g, dg, eg, inv_dg, step in splits:
            if (z - x) % g:
                continue
            s = ((z - x) // g * inv_dg) % eg if eg > 1 else 0
            y0 = (x + d * s) % q
            for t in range(g):
                roots.add((y0 + t * step) % q)
        total += len(roots)
    return total


# ---------------------------------------------------------------------------
# Quadruple counts: count_I (paired system) and count_J (inverses only)
# ---------------------------------------------------------------------------


def _range_units(mod, lo, hi):
    """Units of q inside (lo, hi], with their inverses."""
    xs = np.arange(lo + 1, hi + 1, dtype=np.int64)
    xm = xs % mod.q
    keep = np.gcd(xm, mod.q) == 1
    xs = xs[keep]
    xm = xm[keep]
    if xs.size == 0:
        return xs, xs
    if mod.q < 2**31:
        inv = np.asarray(_backend.impl().batch_inverse(xm, mod.q), dtype=np.int64)
    else:
        inv = np.asarray([pow(int(v), -1, mod.q) for v in xm], dtype=np.int64)
    return xs, inv


def count_I(q, n, n1, method="hashed"):
    """Count quadruples in (N, N1]**4 of units solving the paired system

        x1bar + x2bar = y1bar + y2bar  and  x1 + x2 = y1 + y2  (mod q).

    Bound: (2c)**3 * 2**omega(q) * tau3(q) * N**2 with c = N1/N.
    """
    mod = _as_mod(q)
    if not 1 < n < n1 <= mod.q:
        raise DomainError(f"need 1 < N < N1 <= q, got N = {n}, N1 = {n1}, q = {mod.q}")
    if method == "hashed":
        if n1 - n > 2048 or mod.q >= 2**31:
            raise DomainError("hashed count_I limited to widths <= 2048 and q < 2**31")
        xs, inv = _range_units(mod, n, n1)
        value = 0
        if xs.size:
            xm = xs % mod.q
            key_inv = (inv[:, None] + inv[None, :]) % mod.q
            key_lin = (xm[:, None] + xm[None, :]) % mod.q
            keys = (key_inv * mod.q + key_lin).ravel()
            _, counts = np.unique(keys, return_counts=True)
            value = int(np.dot(counts, counts))
    elif method == "brute":
        if n1 - n > 30:
            raise DomainError("brute count_I limited to ranges of width <= 30")
        value = _count_I_brute(mod, n, n1)
    else:
        raise DomainError(f"unknown method {method!r}")
    c = n1 / n
    bound = (2.0 * c) ** 3 * 2.0**mod.omega * mod.tau3 * float(n) ** 2
    return CountResult(value=value, bound=bound, method=method)


def _count_I_brute(mod, n, n1):
    q = mod.q
    xs, inv = _range_units(mod, n, n1)
    if xs.size == 0:
        return 0
    xm = xs % q
    si = (inv[:, None] + inv[None, :]).ravel() % q
    sl = (xm[:, None] + xm[None, :]).ravel() % q
    eq = (si[:, None] == si[None, :]) & (sl[:, None] == sl[None, :])
    return int(np.count_nonzero(eq))


def count_J(q, m, method="hashed", epsilon=0.05):
    """Count quadruples in (M, 2M]**4 of units with x1bar + x2bar = y1bar + y2bar.

    The reference envelope M**(2+eps) * (M**1.5 / sqrt(q) + 1) has an
    implicit constant, so it is reported as a trend only (bound = +inf).
    """
    mod = _as_mod(q)
    if not 1 < m < mod.q / 2:
        raise DomainError(f"need 1 < M < q/2, got M = {m}, q = {mod.q}")
    if method == "hashed":
        if m > 2048:
            raise DomainError("hashed count_J limited to M <= 2048")
        _, inv = _range_units(mod, m, 2 * m)
        value = 0
        if inv.size:
            keys = (inv[:, None] + inv[None, :]).ravel() % mod.q
            counts = np.bincount(keys, minlength=mod.q)
            value = int(np.dot(counts, counts))
    elif method == "brute":
        if m > 30:
            raise DomainError("brute count_J limited to M <= 30")
        _, inv = _range_units(mod, m, 2 * m)
        value = 0
        if inv.size:
            si = (inv[:, None] + inv[None, :]).ravel() % mod.q
            value = int(np.count_nonzero(si[:, None] == si[None, :]))
    else:
        raise DomainError(f"unknown method {method!r}")
    env = float(m) ** (2.0 + epsilon) * (float(m) ** 1.5 / math.sqrt(mod.q) + 1.0)
    return CountResult(value=value, bound=math.inf, method=method, envelope=env)
