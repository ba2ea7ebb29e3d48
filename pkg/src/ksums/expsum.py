"""Exact evaluation of the exponential sums.

Everything reduces to chunked, compensated accumulation of terms
w(n) * e_q(a*nbar + b*n) with e_q(u) = exp(2*pi*i*u/q).  The phase argument
is always reduced exactly in integers before a single cos/sin call, so no
phase drift accumulates over long ranges.  Chunks are fixed index ranges of
width 2**16 merged pairwise in ascending order: results are bit-identical
for any worker count.

Each sum carries a tracked rounding-error bound: err = 2*eps*(terms + sum of
|weights|), the model scale prescribed for compensated accumulation.  Bound
checks must add err before declaring a violation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .arith import Modulus, Residue, factorize
from .errors import DomainError

EPS = 2.0**-52

WEIGHT_PRIMES = "unit-over-primes"
WEIGHT_MANGOLDT = "mangoldt"
WEIGHT_INTEGERS = "unit-over-integers"
_WEIGHTS = (WEIGHT_PRIMES, WEIGHT_MANGOLDT, WEIGHT_INTEGERS)


@dataclass(frozen=True)
class ComplexSum:
    """A complex accumulation with its tracked rounding-error bound.

    err bounds |computed - exact| under the accumulation model; terms counts
    the summed terms (coprimality skips excluded).
    """

    re: float
    im: float
    err: float
    terms: int

    @property
    def value(self):
        return complex(self.re, self.im)

    @property
    def magnitude(self):
        return abs(complex(self.re, self.im))

    def conjugate(self):
        return ComplexSum(self.re, -self.im, self.err, self.terms)


ZERO_SUM = ComplexSum(0.0, 0.0, 0.0, 0)


@dataclass(frozen=True)
class SumSpec:
    """Inputs of a weighted sum: modulus, twist (a, b), range limit, weight."""

    q: Modulus
    a: int
    b: int
    x: int
    weight: str = WEIGHT_PRIMES

    def __post_init__(self):
        if self.weight not in _WEIGHTS:
            raise DomainError(f"unknown weight {self.weight!r}")


def _cs_from_block(block):
    re, im, sumabs, terms = block
    return ComplexSum(re, im, 2.0 * EPS * (terms + sumabs), int(terms))


def merge(x, y):
    """Combine two partial sums; error bounds add."""
    return ComplexSum(x.re + y.re, x.im + y.im, x.err + y.err, x.terms + y.terms)


def subtract(x, y):
    return ComplexSum(x.re - y.re, x.im - y.im, x.err + y.err, x.terms + y.terms)


def scale(cs, z):
    """Multiply a sum by a complex scalar, propagating the error bound."""
    z = complex(z)
    re = cs.re * z.real - cs.im * z.imag
    im = cs.re * z.imag + cs.im * z.real
    err = abs(z) * cs.err + 2.0 * EPS * (abs(re) + abs(im))
    return ComplexSum(re, im, err, cs.terms)


def reduce_pairwise(parts):
    """Deterministic pairwise merge in index order."""
    parts = list(parts)
    if not parts:
        return ZERO_SUM
    while len(parts) > 1:
        nxt = []
        for i in range(0, len(parts) - 1, 2):
            nxt.append(merge(parts[i], parts[i + 1]))
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _mod_ctx(mod):
    """(inverse table, cos table, sin table) for a modulus, possibly None."""
    inv = _backend.inverse_table(mod.q, mod.prime_divisors)
    cos_t, sin_t = _backend.phase_tables(mod.q)
    return inv, cos_t, sin_t


def _range_sum(mod, a, b, start, stop, weight_mode):
    """Sum of w(n) e_q(a nbar + b n) over n in [start, stop), gcd(n, q) = 1."""
    if stop <= start:
        return ZERO_SUM
    q = mod.q
    a %= q
    b %= q
    inv, cos_t, sin_t = _mod_ctx(mod)
    blocks = [(s, min(s + _backend.BLOCK, stop)) for s in range(start, stop, _backend.BLOCK)]
    kernel = _backend.impl().sum_range_block

    def run(blk):
        return kernel(q, a, b, blk[0], blk[1], weight_mode, inv, cos_t, sin_t)

    return reduce_pairwise(_cs_from_block(r) for r in _backend.map_ordered(run, blocks))


def _terms_sum(mod, a, b, ns, ws=None):
    """Sum of w_i e_q(a nbar_i + b n_i) over an explicit term array."""
    k = len(ns)
    if k == 0:
        return ZERO_SUM
    q = mod.q
    a %= q
    b %= q
    inv, cos_t, sin_t = _mod_ctx(mod)
    kernel = _backend.impl().sum_terms_block
    blocks = [(s, min(s + _backend.BLOCK, k)) for s in range(0, k, _backend.BLOCK)]

    def run(blk):
        lo, hi = blk
        w = ws[lo:hi] if ws is not None else None
        return kernel(q, a, b, ns[lo:hi], w, inv, cos_t, sin_t)

    return reduce_pairwise(_cs_from_block(r) for r in _backend.map_ordered(run, blocks))


def _phases_sum(mod, rs, ws=None):
    """Sum of w_i e_q(r_i) over pre-reduced residues."""
    k = len(rs)
    if k == 0:
        return ZERO_SUM
    q = mod.q
    cos_t, sin_t = _backend.phase_tables(q)
    kernel = _backend.impl().sum_phases_block
    blocks = [(s, min(s + _backend.BLOCK, k)) for s in range(0, k, _backend.BLOCK)]

    def run(blk):
        lo, hi = blk
        w = ws[lo:hi] if ws is not None else None
        return kernel(q, rs[lo:hi], w, cos_t, sin_t)

    return reduce_pairwise(_cs_from_block(r) for r in _backend.map_ordered(run, blocks))


def _as_mod(q):
    return q if isinstance(q, Modulus) else factorize(q)


def _as_int(v):
    return v.value if isinstance(v, Residue) else int(v)


def complete_sum(a, b, q):
    """Sum of e_q(a*nbar + b*n) over a full residue system, gcd(n, q) = 1."""
    mod = _as_mod(q)
    return _range_sum(mod, _as_int(a), _as_int(b), 1, mod.q + 1, 0)


def incomplete_sum(a, b, q, n):
    """Sum of e_q(a*nbar + b*n) over 1 <= n <= N <= q with gcd(n, q) = 1."""
    mod = _as_mod(q)
    if not 1 <= n <= mod.q:
        raise DomainError(f"incomplete range N = {n} must satisfy 1 <= N <= q = {mod.q}")
    return _range_sum(mod, _as_int(a), _as_int(b), 1, n + 1, 0)


def _require_coprime_twist(mod, a, b):
    g = math.gcd(a * b, mod.q)
    if g != 1:
        raise DomainError(f"gcd(ab, q) = {g} != 1 for a = {a}, b = {b}, q = {mod.q}")


def prime_sum(spec, table):
    """Sum of e_q(a*pbar + b*p) over primes p <= X with p not dividing q."""
    if spec.weight != WEIGHT_PRIMES:
        raise DomainError(f"prime_sum expects weight {WEIGHT_PRIMES!r}")
    mod = spec.q
    a, b = _as_int(spec.a), _as_int(spec.b)
    _require_coprime_twist(mod, a, b)
    if spec.x < 2:
        return ZERO_SUM
    ps = table.primes_upto(spec.x)
    return _terms_sum(mod, a, b, ps)


def lambda_sum(spec, table):
    """Mangoldt-weighted sum over n <= X coprime to q."""
    if spec.weight != WEIGHT_MANGOLDT:
        raise DomainError(f"lambda_sum expects weight {WEIGHT_MANGOLDT!r}")
    mod = spec.q
    a, b = _as_int(spec.a), _as_int(spec.b)
    _require_coprime_twist(mod, a, b)
    if spec.x < 2:
        return ZERO_SUM
    ns, ws = table.mangoldt_support(spec.x)
    return _terms_sum(mod, a, b, ns, ws)


def integer_sum(spec):
    """Unit-weight sum over 1 <= n <= X coprime to q (X may exceed q)."""
    if spec.weight != WEIGHT_INTEGERS:
        raise DomainError(f"integer_sum expects weight {WEIGHT_INTEGERS!r}")
    mod = spec.q
    if spec.x < 1:
        return ZERO_SUM
    return _range_sum(mod, _as_int(spec.a), _as_int(spec.b), 1, spec.x + 1, 0)


def evaluate(spec, table=None):
    """Dispatch a SumSpec to its evaluator."""
    if spec.weight == WEIGHT_PRIMES:
        return prime_sum(spec, table)
    if spec.weight == WEIGHT_MANGOLDT:
        return lambda_sum(spec, table)
    return integer_sum(spec)


def bilinear_sum(alpha, beta, a, b, q, cap=None):
    """Double sum of alpha_m beta_n e_q(a*mbar*nbar + b*m*n).

    alpha and beta map integers to (possibly complex) coefficients; only
    pairs with gcd(mn, q) = 1 contribute, restricted to m*n <= cap when a
    cap is given.  Coefficient supports must lie in [1, q).
    """
    mod = _as_mod(q)
    a, b = _as_int(a) % mod.q, _as_int(b) % mod.q
    ms = sorted(alpha)
    ns = sorted(beta)
    if ms and not 1 <= ms[0] <= ms[-1] < mod.q:
        raise DomainError("alpha support must lie in [1, q)")
    if ns and not 1 <= ns[0] <= ns[-1] < mod.q:
        raise DomainError("beta support must lie in [1, q)")
    ns_arr = np.asarray(ns, dtype=np.int64)
    w_re = np.asarray([complex(beta[n]).real for n in ns], dtype=np.float64)
    w_im = np.asarray([complex(beta[n]).imag for n in ns], dtype=np.float64)
    has_imag = bool(np.any(w_im != 0.0))
    return _bilinear_arrays(mod, a, b, ms, [alpha[m] for m in ms], ns_arr, w_re,
                            w_im if has_imag else None, cap)


def _bilinear_arrays(mod, a, b, ms, m_coeffs, ns_arr, w_re, w_im, cap):
    q = mod.q

    def row(item):
        m, am = item
        hi = len(ns_arr)
        if cap is not None:
            hi = int(np.searchsorted(ns_arr, cap // m, side="right"))
            if hi == 0:
                return ZERO_SUM
        mbar = pow(m, -1, q)
        a2 = a * mbar % q
        b2 = b * m % q
        inner = _terms_sum(mod, a2, b2, ns_arr[:hi], w_re[:hi])
        if w_im is not None:
            ii = _terms_sum(mod, a2, b2, ns_arr[:hi], w_im[:hi])
            inner = ComplexSum(inner.re - ii.im, inner.im + ii.re,
                               inner.err + ii.err, inner.terms)
        return scale(inner, am)

    rows = [
        (m, am) for m, am in zip(ms, m_coeffs) if am != 0 and math.gcd(m, q) == 1
    ]
    par = len(ns_arr) >= _backend.BLOCK
    return reduce_pairwise(_backend.map_ordered(row, rows, parallel=par))


@dataclass(frozen=True)
class RationalSumResult:
    """Sum over primes of e_q(P(p)/Q(p)) plus the skipped-term count."""

    sum: ComplexSum
    skipped: int


def _poly_eval_mod(coeffs, xs, q):
    """Horner evaluation mod q over an int64 vector; coeffs highest-first."""
    acc = np.zeros_like(xs)
    for c in coeffs:
        acc = (acc * xs + c % q) % q
    return acc


def rational_sum(p_coeffs, q_coeffs, q, x, table):
    """Sum of e_q(P(p) * Q(p)^-1) over primes p <= X with p not dividing q.

    Polynomial coefficients are listed highest degree first.  Primes where
    gcd(Q(p), q) > 1 are skipped and counted in the result.
    """
    mod = _as_mod(q)
    if not p_coeffs or not q_coeffs:
        raise DomainError("polynomials must have at least one coefficient")
    if x < 2:
        return RationalSumResult(ZERO_SUM, 0)
    ps = table.primes_upto(x)
    if mod.q >= 3_000_000_000:
        # int64 products would overflow; take the slow exact path
        return _rational_sum_big(p_coeffs, q_coeffs, mod, ps)
    pm = ps % mod.q
    keep = np.gcd(pm, mod.q) == 1
    pm = pm[keep]
    if pm.size == 0:
        return RationalSumResult(ZERO_SUM, 0)
    qv = _poly_eval_mod(q_coeffs, pm, mod.q)
    ok = np.gcd(qv, mod.q) == 1
    skipped = int(pm.size - np.count_nonzero(ok))
    pm = pm[ok]
    qv = qv[ok]
    if pm.size == 0:
        return RationalSumResult(ZERO_SUM, skipped)
    pv = _poly_eval_mod(p_coeffs, pm, mod.q)
    inv = np.asarray(_backend.impl().batch_inverse(qv, mod.q), dtype=np.int64)
    rs = pv * inv % mod.q
    return RationalSumResult(_phases_sum(mod, rs), skipped)


def _rational_sum_big(p_coeffs, q_coeffs, mod, ps):
    q = mod.q
    rs = []
    skipped = 0
    for p in ps.tolist():
        pm = p % q
        if math.gcd(pm, q) != 1:
            continue
        qv = 0
        for c in q_coeffs:
            qv = (qv * pm + c) % q
        if math.gcd(qv, q) != 1:
            skipped += 1
            continue
        pv = 0
        for c in p_coeffs:
            pv = (pv * pm + c) % q
        rs.append(pv * pow(qv, -1, q) % q)
    return RationalSumResult(_phases_sum(mod, np.asarray(rs, dtype=np.int64)), skipped)
