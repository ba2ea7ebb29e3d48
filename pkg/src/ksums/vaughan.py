"""Four-sum decomposition of the Mangoldt-weighted sum, with the
parameter-selection formulas.

For a cutoff 1 < V < sqrt(X) the target sum splits as

    T = S1 - S2 - S3 - S4 + remainder,

    S1 = sum_{m <= V}       mu(m)  sum_{n <= X/m}        ln(n)      e_q(...)
    S2 = sum_{m <= V}       a_m    sum_{n <= X/m}                   e_q(...)
    S3 = sum_{V < m <= V^2} a_m    sum_{n <= X/m}                   e_q(...)
    S4 = sum_{V < m <= X/V} b_m    sum_{V < n <= X/m}    Lambda(n)  e_q(...)

with a_m = sum_{kl = m, k,l <= V} mu(k) Lambda(l) and
b_m = sum_{d | m, d <= V} mu(d); all outer and inner variables run over
integers coprime to q and e_q is twisted by (a*mbar*nbar + b*m*n).

The remainder is never modelled: it is computed exactly as the difference
T - (S1 - S2 - S3 - S4) and then checked against its closed support formula
(it lives on n <= V).  Regrouping the four sums at a fixed n gives the
coefficient c(n) below, which must reproduce Lambda(n) for every n > V;
that identity is the self-check that validates the whole decomposition.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import map_ordered
from .arith import Modulus, factorize, mangoldt_of, mu_of
from .errors import DomainError
from .expsum import (
    ComplexSum,
    SumSpec,
    WEIGHT_MANGOLDT,
    ZERO_SUM,
    _as_int,
    _as_mod,
    _bilinear_arrays,
    _phases_sum,
    _range_sum,
    lambda_sum,
    merge,
    reduce_pairwise,
    scale,
    subtract,
)

REGIME_MAIN = "eq-3-11"
REGIME_LOW = "eq-3-15"
REGIME_TAIL = "tail-V-2X-over-q"
REGIME_MANUAL = "manual"

# validity caps on X for the two D-selection regimes
_C1 = 2.0 ** (-105.0 / 73.0)
_C2 = 2.0 ** (-7.0 / 5.0)

_REL_SLACK = 1e-9


def main_regime_cap(q):
    """Largest X for which the main D-selection keeps X/V <= q/2."""
    return _C1 * float(q) ** (107.0 / 73.0)


def low_regime_cap(q):
    """Largest X for which the low D-selection keeps X/V <= q/2.

    The low regime is only ever selected below q**(7/8), which sits under
    this cap for every q >= 6, so the constraint is never active there.
    """
    return _C2 * float(q) ** (29.0 / 20.0)


@dataclass(frozen=True)
class VaughanParams:
    """Cutoff V, dyadic/trivial-split threshold D, and the regime tag."""

    v: float
    d: float
    regime: str = REGIME_MANUAL

    def validate(self, q, x):
        """Check the standing conditions 1 < V < sqrt(X) and X/V <= q/2.

        Manual params only need 1 < V < X: the degenerate corners (such as
        X <= V**2, which empties S4) stay reachable for experiments.
        """
        if self.regime == REGIME_MANUAL:
            if not 1.0 < self.v < x:
                raise DomainError(f"manual cutoff must satisfy 1 < V < X, got V = {self.v}")
            return
        if not self.v > 1.0:
            raise DomainError(f"violated: V > 1 (V = {self.v})")
        if not self.v < math.sqrt(x):
            raise DomainError(f"violated: V < sqrt(X) (V = {self.v}, X = {x})")
        if x / self.v > (q / 2.0) * (1.0 + _REL_SLACK):
            raise DomainError(f"violated: X/V <= q/2 (X/V = {x / self.v}, q = {q})")


@dataclass(frozen=True)
class Decomposition:
    """The four partial sums, the total, and the exact remainder."""

    s1: ComplexSum
    s2: ComplexSum
    s3: ComplexSum
    s4: ComplexSum
    total: ComplexSum
    remainder: ComplexSum
    params: VaughanParams

    def components(self):
        return {
            "S1": self.s1,
            "S2": self.s2,
            "S3": self.s3,
            "S4": self.s4,
            "total": self.total,
            "remainder": self.remainder,
        }


def _divisors_with_factors(n):
    """Divisors of n with enough structure for mu and Mangoldt lookups."""
    if n == 1:
        return [1], {1: 1}
    mod = factorize(n)
    divs = [1]
    for p, a in mod.factors:
        divs = [d * p**k for d in divs for k in range(a + 1)]
    return sorted(divs), dict(mod.factors)


def coeff_a(m, v):
    """a_m = sum over factorizations m = k*l with k, l <= V of mu(k)*Lambda(l)."""
    if m < 1:
        raise DomainError("m must be >= 1")
    out = 0.0
    divs, _ = _divisors_with_factors(m)
    for k in divs:
        if k > v:
            continue
        l = m // k
        if l > v:
            continue
        mk = mu_of(k)
        if mk == 0:
            continue
        w = mangoldt_of(l)
        if w:
            out += mk * w
    return out


def coeff_b(m, v):
    """b_m = sum over divisors d <= V of mu(d); exact integer."""
    if m < 1:
        raise DomainError("m must be >= 1")
    divs, _ = _divisors_with_factors(m)
    return sum(mu_of(d) for d in divs if d <= v)


def coefficient_of(n, v, x):
    """The regrouped per-n coefficient of the four-sum split:

        c(n) = sum_{m | n, m <= V}   mu(m) ln(n/m)
             - sum_{m | n, m <= V^2} a_m
             - sum_{n = m k, V < m <= X/V, V < k} b_m Lambda(k).

    Reproduces Lambda(n) for every V < n <= X; below V it describes the
    remainder of the decomposition.
    """
    if not 1 <= n <= x:
        raise DomainError(f"need 1 <= n <= X, got n = {n}, X = {x}")
    divs, _ = _divisors_with_factors(n)
    v2 = v * v
    xv = x / v
    c = 0.0
    for m in divs:
        if m <= v:
            mm = mu_of(m)
            if mm:
                c += mm * math.log(n // m)
        if m <= v2:
            c -= coeff_a(m, v)
        if v < m <= xv:
            k = n // m
            if k > v:
                w = mangoldt_of(k)
                if w:
                    c -= coeff_b(m, v) * w
    return c


def choose_params(q, x):
    """Select (V, D) for the admissible window q**(3/4) <= X <= (q/2)**1.5.

    Low regime (X below q**(7/8)):  D = q**(3/28) X**(6/7),  V = D**(1/3).
    Main regime (up to c1 q**(107/73)): D = q**(2/35) X**(32/35), V = D**(1/3).
    Tail regime above:               V = 2X/q with the same D formula.
    """
    mod = q if isinstance(q, Modulus) else None
    qv = float(q.q) if isinstance(q, Modulus) else float(q)
    x = float(x)
    lo = qv**0.75
    hi = (qv / 2.0) ** 1.5
    if not lo * (1.0 - _REL_SLACK) <= x <= hi * (1.0 + _REL_SLACK):
        raise DomainError(
            f"X = {x} outside the admissible window [q^(3/4), (q/2)^(3/2)] = [{lo}, {hi}]"
        )
    q78 = qv ** (7.0 / 8.0)
    main_cap = main_regime_cap(qv)
    if x < q78:
        d = qv ** (3.0 / 28.0) * x ** (6.0 / 7.0)
        v = d ** (1.0 / 3.0)
        regime = REGIME_LOW
    elif x <= main_cap:
        d = qv ** (2.0 / 35.0) * x ** (32.0 / 35.0)
        v = d ** (1.0 / 3.0)
        regime = REGIME_MAIN
    else:
        d = qv ** (2.0 / 35.0) * x ** (32.0 / 35.0)
        v = 2.0 * x / qv
        regime = REGIME_TAIL
    if x / v > qv / 2.0:
        # at most one ulp over the boundary; pin the hard constraint
        v = 2.0 * x / qv
    return VaughanParams(v=v, d=d, regime=regime)


def _coeff_sieves(limit_mu, limit_mangoldt):
    """Small mu / Lambda sieves for the coefficient loops of decompose."""
    top = max(limit_mu, limit_mangoldt, 2)
    mu = np.ones(top + 1, dtype=np.int64)
    mu[0] = 0
    lam = np.zeros(top + 1, dtype=np.float64)
    is_p = np.ones(top + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, top + 1):
        if not is_p[p]:
            continue
        if p <= math.isqrt(top):
            is_p[p * p :: p] = False
        mu[p::p] *= -1
        if p * p <= top:
            mu[p * p :: p * p] = 0
        lp = math.log(p)
        pk = p
        while pk <= top:
            lam[pk] = lp
            pk *= p
    return mu, lam


def decompose(spec, params, table):
    """Evaluate the four sums and the exact remainder for a Mangoldt spec."""
    if spec.weight != WEIGHT_MANGOLDT:
        raise DomainError(f"decompose expects weight {WEIGHT_MANGOLDT!r}")
    mod = spec.q
    q = mod.q
    a, b = _as_int(spec.a) % q, _as_int(spec.b) % q
    if math.gcd(a * b, q) != 1:
        raise DomainError(f"gcd(ab, q) != 1 for a = {a}, b = {b}, q = {q}")
    x = int(spec.x)
    v = params.v
    params.validate(q, x)
    if x > table.limit:
        raise DomainError(f"X = {x} exceeds table limit {table.limit}")

    vf = math.floor(v)
    v2f = math.floor(v * v)
    m4_hi = math.floor(x / v)
    mu, lam = _coeff_sieves(max(vf, 2), max(vf, 2))

    total = lambda_sum(spec, table)

    def twisted_range(m, weight_mode):
        hi = x // m
        mbar = pow(m, -1, q)
        return _range_sum(mod, a * mbar % q, b * m % q, 1, hi + 1, weight_mode)

    # outer m-blocks may run in parallel, merged in ascending m order;
    # across-m threading only pays off once the inner ranges are long
    par = x >= 500_000

    # S1: mu(m) weighted, log-n inner sums (m <= V iff m <= floor(V))
    ms1 = [m for m in range(1, vf + 1) if mu[m] and math.gcd(m, q) == 1]
    parts = map_ordered(
        lambda m: scale(twisted_range(m, 1), float(mu[m])), ms1, parallel=par
    )
    s1 = reduce_pairwise(parts)

    # a_m for m <= V^2 via the double loop over k, l <= V
    a_coef = {}
    for k in range(1, vf + 1):
        mk = int(mu[k])
        if mk == 0:
            continue
        for l in range(2, vf + 1):
            w = float(lam[l])
            if w == 0.0:
                continue
            m = k * l
            a_coef[m] = a_coef.get(m, 0.0) + mk * w

    def a_block(m_lo, m_hi):
        ms = [
            m for m in sorted(a_coef)
            if m_lo < m <= m_hi and a_coef[m] != 0.0 and math.gcd(m, q) == 1
        ]
        parts = map_ordered(
            lambda m: scale(twisted_range(m, 0), a_coef[m]), ms, parallel=par
        )
        return reduce_pairwise(parts)

    s2 = a_block(0, min(vf, x))
    s3 = a_block(vf, min(v2f, x))

    # S4: b_m against Mangoldt support, capped at mn <= X
    ns_all, ws_all = table.mangoldt_support(min(x, table.limit))
    lo_idx = int(np.searchsorted(ns_all, v, side="right"))
    ns4 = ns_all[lo_idx:]
    ws4 = ws_all[lo_idx:]
    b_sieve = np.zeros(m4_hi + 1, dtype=np.int64)
    d = 1
    while d <= min(vf, m4_hi):
        if mu[d]:
            b_sieve[d::d] += mu[d]
        d += 1
    ms = []
    m_coeffs = []
    for m in range(vf + 1, m4_hi + 1):
        if m <= v or m > x / v:
            continue
        bm = int(b_sieve[m])
        if bm:
            ms.append(m)
            m_coeffs.append(float(bm))
    s4 = _bilinear_arrays(mod, a, b, ms, m_coeffs, ns4, ws4, None, cap=x)

    remainder = subtract(total, subtract(s1, merge(s2, merge(s3, s4))))
    return Decomposition(s1=s1, s2=s2, s3=s3, s4=s4, total=total,
                         remainder=remainder, params=params)


def remainder_reference(spec, params, table):
    """Closed form of the remainder: sum over n <= V, gcd(n, q) = 1 of
    (Lambda(n) - c(n)) e_q(a nbar + b n)."""
    mod = spec.q
    q = mod.q
    a, b = _as_int(spec.a) % q, _as_int(spec.b) % q
    x = int(spec.x)
    v = params.v
    rs = []
    ws = []
    for n in range(1, math.floor(v) + 1):
        if n > v or math.gcd(n, q) != 1:
            continue
        w = mangoldt_of(n) - coefficient_of(n, v, x)
        rs.append((a * pow(n, -1, q) + b * n) % q)
        ws.append(w)
    return _phases_sum(mod, np.asarray(rs, dtype=np.int64),
                       np.asarray(ws, dtype=np.float64))
