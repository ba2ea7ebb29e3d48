"""Bound formulas, sweep harness, and the congruence experiments.

The decay factor and the threshold exponents are closed formulas evaluated
exactly (rationals as Fractions, powers in log2 space so powers of two stay
exact).  The solution counters run on exact integer convolutions of prime
distributions mod q, with brute-force companions at small sizes; sweeps
produce tagged report rows consumed by the CLI serializer.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import Modulus, Residue, factorize
from .counting import _g_values
from .errors import DomainError, InconsistencyError
from .expsum import SumSpec, WEIGHT_MANGOLDT, lambda_sum
from .tables import pi, pi1
from .vaughan import choose_params

_REL_SLACK = 1e-9

# Chebyshev-type sanity: the Mangoldt partial sums stay below 1.04 X.
SANITY_FACTOR = 1.04


def _as_mod(q):
    return q if isinstance(q, Modulus) else factorize(q)


def _as_int(v):
    return v.value if isinstance(v, Residue) else int(v)


# ---------------------------------------------------------------------------
# Closed formulas
# ---------------------------------------------------------------------------


def decay_factor(q, x, branch=None):
    """Piecewise decay factor for the Mangoldt-weighted sum estimate:

        (q**(3/4) / X)**(1/7)   on [q**(3/4), q**(7/8)]
        (q**(2/3) / X)**(3/35)  on [q**(7/8), (q/2)**(3/2)]

    Evaluated in log2 space, so powers of two come out exact.  branch forces
    'low' or 'high' (used to check continuity at the crossover).
    """
    qv = float(int(q)) if not isinstance(q, float) else q
    xv = float(x)
    if qv < 2 or xv <= 1:
        raise DomainError("need q >= 2 and X > 1")
    lgq = math.log2(qv)
    lgx = math.log2(xv)
    if branch is None:
        lo = 0.75 * lgq
        hi = 1.5 * (lgq - 1.0)
        if not lo - 1e-9 <= lgx <= hi + 1e-9:
            raise DomainError(
                f"X = {xv} outside [q^(3/4), (q/2)^(3/2)] for q = {qv}"
            )
        branch = "low" if lgx <= 0.875 * lgq else "high"
    if branch == "low":
        return 2.0 ** ((3.0 * lgq - 4.0 * lgx) / 28.0)
    if branch == "high":
        return 2.0 ** ((2.0 * lgq - 3.0 * lgx) / 35.0)
    raise DomainError(f"unknown branch {branch!r}")


def threshold_exponent(k):
    """Exact rational threshold exponent c_k for the prime-modulus
    solvability window q**(c_k + eps) <= N; branch switch at k = 10."""
    if k < 3:
        raise DomainError("k must be >= 3")
    if k <= 9:
        return Fraction(2 * k + 31, 3 * k + 29)
    return Fraction(3 * k + 22, 4 * (k + 5))


def threshold_exponent_composite(k):
    """Exact rational threshold exponent c_k for the any-modulus variant;
    branch switch at k = 17."""
    if k < 3:
        raise DomainError("k must be >= 3")
    if k <= 16:
        return Fraction(2 * (k + 33), 3 * k + 64)
    return Fraction(3 * k + 50, 4 * (k + 12))


# ---------------------------------------------------------------------------
# Sweep harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundRow:
    """One sweep point: the computed sum against its reference envelope."""

    q: int
    x: int
    value_re: float
    value_im: float
    err: float
    terms: int
    reference: float
    ratio: float
    sane: bool
    params: dict

    @property
    def magnitude(self):
        return abs(complex(self.value_re, self.value_im))


@dataclass
class BoundReport:
    kind: str
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def sweep_lambda_sums(q, xs, a, b, table, epsilon=0.05):
    """Evaluate the Mangoldt-weighted sum on an X grid and report each value
    against the reference envelope X * q**eps * decay(q, X), plus the
    unconditional sanity cap 1.04 X + err.

    Out-of-window grid points are skipped with a note, not errors.
    """
    mod = _as_mod(q)
    a, b = _as_int(a), _as_int(b)
    report = BoundReport(kind="lambda-sweep")
    lo = float(mod.q) ** 0.75
    hi = (mod.q / 2.0) ** 1.5
    for x in xs:
        x = int(x)
        if not lo * (1 - _REL_SLACK) <= x <= hi * (1 + _REL_SLACK) or x > table.limit:
            report.skipped.append((x, "outside [q^(3/4), min(limit, (q/2)^(3/2))]"))
            continue
        spec = SumSpec(q=mod, a=a, b=b, x=x, weight=WEIGHT_MANGOLDT)
        t = lambda_sum(spec, table)
        delta = decay_factor(mod.q, x)
        reference = x * mod.q**epsilon * delta
        mag = t.magnitude
        params = choose_params(mod.q, x)
        report.rows.append(
            BoundRow(
                q=mod.q,
                x=x,
                value_re=t.re,
                value_im=t.im,
                err=t.err,
                terms=t.terms,
                reference=reference,
                ratio=mag / reference,
                sane=mag <= SANITY_FACTOR * x + t.err,
                params={
                    "a": a,
                    "b": b,
                    "epsilon": epsilon,
                    "delta": delta,
                    "regime": params.regime,
                    "V": params.v,
                    "D": params.d,
                },
            )
        )
    return report


# ---------------------------------------------------------------------------
# Congruence experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CongruenceWitness:
    """A verified solution tuple; check is the left side reduced mod q."""

    primes: tuple
    check: int


class NotFound:
    """Sentinel for a proven-zero solution count."""

    def __bool__(self):
        return False

    def __repr__(self):
        return "NotFound"


NOT_FOUND = NotFound()


def _exact_cyclic_convolve(u, v, q):
    """Exact cyclic convolution of two nonnegative integer vectors mod q."""
    mu_, mv = int(u.max(initial=0)), int(v.max(initial=0))
    if mu_ and mv and mu_ * mv * min(len(u), len(v)) < 2**62:
        c = np.convolve(u, v)
        out = c[:q].copy()
        if len(c) > q:
            out[: len(c) - q] += c[q:]
        return out
    # big-integer fallback keeps exactness at any size
    ul = [int(t) for t in u]
    vl = [int(t) for t in v]
    out = [0] * q
    for i, uv in enumerate(ul):
        if uv:
            for j, vv in enumerate(vl):
                if vv:
                    out[(i + j) % q] += uv * vv
    return np.asarray(out, dtype=object)


def _prime_residue_vector(ps, q):
    return np.bincount(ps % q, minlength=q).astype(np.int64)


def triple_histogram(q, n, table):
    """I(m) for every residue m of the congruence p1(p1+p2+p3) = m (mod q),
    over primes in (N, 2N]; exact counts, mass sums to pi1(N)**3."""
    mod = _as_mod(q)
    if len(mod.factors) != 1 or mod.factors[0][1] != 1:
        raise DomainError(f"q = {mod.q} must be prime")
    if mod.q >= 2**31:
        raise DomainError("triple histogram limited to q < 2**31")
    if 2 * n > table.limit:
        raise DomainError("2N exceeds the table limit")
    if n >= mod.q:
        raise DomainError("need N < q")
    qv = mod.q
    ps = table.primes_upto(2 * n)
    ps = ps[ps > n]
    pvec = _prime_residue_vector(ps, qv)
    c2 = _exact_cyclic_convolve(pvec, pvec, qv)
    hist = np.zeros(qv, dtype=c2.dtype)
    k = int(ps.size)
    ms = np.arange(qv, dtype=np.int64)
    for p1 in ps.tolist():
        r = p1 % qv
        if r == 0:
            hist[0] += k * k
            continue
        ip = pow(p1, -1, qv)
        hist += c2[(ms * ip - p1) % qv]
    return hist


@dataclass(frozen=True)
class TripleCount:
    """Solution count of p1(p1+p2+p3) = m (mod q) over primes in (N, 2N]."""

    value: int
    brute: int | None
    main_term: float
    remainder: float
    primes_in_range: int


_BRUTE_TRIPLE_LIMIT = 60


def count_triple(q, m, n, table):
    """Exact I(N) via the additive convolution of the prime residue vector;
    a direct triple loop runs alongside when the prime window is small."""
    mod = _as_mod(q)
    if len(mod.factors) != 1 or mod.factors[0][1] != 1:
        raise DomainError(f"q = {mod.q} must be prime")
    m = _as_int(m) % mod.q
    if math.gcd(m, mod.q) != 1:
        raise DomainError(f"need gcd(m, q) = 1, got m = {m}, q = {mod.q}")
    if 2 * n > table.limit:
        raise DomainError("2N exceeds the table limit")
    if n >= mod.q:
        raise DomainError("need N < q")
    qv = mod.q
    ps = table.primes_upto(2 * n)
    ps = ps[ps > n]
    p1n = pi1(table, n)
    pvec = _prime_residue_vector(ps, qv)
    c2 = _exact_cyclic_convolve(pvec, pvec, qv)
    value = 0
    for p1 in ps.tolist():
        if p1 % qv == 0:
            continue
        ip = pow(p1, -1, qv)
        value += int(c2[(m * ip - p1) % qv])
    brute = None
    if p1n <= _BRUTE_TRIPLE_LIMIT:
        brute = _count_triple_brute(qv, m, ps.tolist())
        if brute != value:
            raise InconsistencyError(
                f"triple count mismatch: convolution {value} != brute {brute}"
            )
    main = p1n**3 / qv
    return TripleCount(value=value, brute=brute, main_term=main,
                       remainder=value - main, primes_in_range=int(ps.size))


def _count_triple_brute(q, m, ps):
    total = 0
    for p1 in ps:
        for p2 in ps:
            for p3 in ps:
                if p1 * (p1 + p2 + p3) % q == m:
                    total += 1
    return total


def find_triple_witness(q, m, n, table):
    """A verified solution (p1, p2, p3) of p1(p1+p2+p3) = m (mod q), or
    NOT_FOUND when the exact count is zero; deterministic (smallest primes)."""
    mod = _as_mod(q)
    res = count_triple(mod, m, n, table)
    if res.value == 0:
        return NOT_FOUND
    m = _as_int(m) % mod.q
    qv = mod.q
    ps = table.primes_upto(2 * n)
    ps = [int(p) for p in ps[ps > n]]
    pvec = _prime_residue_vector(np.asarray(ps, dtype=np.int64), qv)
    by_residue = {}
    for p in ps:
        by_residue.setdefault(p % qv, p)  # smallest prime per residue
    for p1 in ps:
        if p1 % qv == 0:
            continue
        s = (m * pow(p1, -1, qv) - p1) % qv
        for p2 in ps:
            r3 = (s - p2) % qv
            if pvec[r3]:
                p3 = by_residue[r3]
                check = p1 * (p1 + p2 + p3) % qv
                if check != m:
                    raise InconsistencyError("witness reconstruction failed")
                return CongruenceWitness(primes=(p1, p2, p3), check=check)
    raise InconsistencyError("positive count but no witness found")


@dataclass(frozen=True)
class GsumCount:
    """Solution count of g(p1)+...+g(pk) = m (mod q) over primes <= N."""

    value: int
    brute: int | None
    main_term: float
    delta: float
    primes_used: int


def gsum_histogram(q, a, b, k, n, table):
    """The k-fold additive convolution of the distribution of g(p) mod q
    over primes p <= N with p not dividing q; exact integer vector."""
    mod = _as_mod(q)
    a, b = _as_int(a), _as_int(b)
    if math.gcd(a * b, mod.q) != 1:
        raise DomainError("need gcd(ab, q) = 1")
    if k < 1:
        raise DomainError("need k >= 1")
    if n > table.limit:
        raise DomainError("N exceeds the table limit")
    qv = mod.q
    ps = table.primes_upto(n)
    ps = ps[np.gcd(ps % qv, qv) == 1]
    gv = _g_of_primes(mod, a, b, ps)
    base = np.bincount(gv, minlength=qv).astype(np.int64)
    result = np.zeros(qv, dtype=np.int64)
    result[0] = 1
    e = k
    while e:
        if e & 1:
            result = _exact_cyclic_convolve(result, base, qv)
        e >>= 1
        if e:
            base = _exact_cyclic_convolve(base, base, qv)
    return result, int(ps.size)


def _g_of_primes(mod, a, b, ps):
    qv = mod.q
    if qv < 2**31 and ps.size:
        pm = ps % qv
        from ._backend import impl

        inv = np.asarray(impl().batch_inverse(pm, qv), dtype=np.int64)
        return (a % qv * inv + b % qv * pm) % qv
    return np.asarray(
        [(a * pow(int(p), -1, qv) + b * int(p)) % qv for p in ps.tolist()],
        dtype=np.int64,
    )


_BRUTE_GSUM_PI = 20
_BRUTE_GSUM_K = 4


def count_gsum(q, a, b, k, m, n, table):
    """Exact I_k(N) for the k-fold congruence via repeated-squaring
    convolution; brute k-fold enumeration runs alongside at small sizes."""
    mod = _as_mod(q)
    m = _as_int(m) % mod.q
    hist, used = gsum_histogram(mod, a, b, k, n, table)
    value = int(hist[m])
    brute = None
    if used <= _BRUTE_GSUM_PI and k <= _BRUTE_GSUM_K:
        brute = _count_gsum_brute(mod, _as_int(a), _as_int(b), k, m, n, table)
        if brute != value:
            raise InconsistencyError(
                f"gsum count mismatch: convolution {value} != brute {brute}"
            )
    main = used**k / mod.q
    delta = (value - main) / main if main > 0 else math.nan
    return GsumCount(value=value, brute=brute, main_term=main, delta=delta,
                     primes_used=used)


def _count_gsum_brute(mod, a, b, k, m, n, table):
    qv = mod.q
    ps = table.primes_upto(n)
    ps = ps[np.gcd(ps % qv, qv) == 1]
    gv = np.asarray(_g_of_primes(mod, a, b, ps), dtype=np.int64)
    acc = np.asarray([0], dtype=np.int64)
    for _ in range(k):
        acc = (acc[:, None] + gv[None, :]).ravel() % qv
    return int(np.count_nonzero(acc == m))


def find_gsum_witness(q, a, b, k, m, n, table):
    """A verified tuple (p1, ..., pk) with g(p1)+...+g(pk) = m (mod q), or
    NOT_FOUND; deterministic descent through the partial convolutions."""
    mod = _as_mod(q)
    a, b = _as_int(a), _as_int(b)
    m = _as_int(m) % mod.q
    qv = mod.q
    ps = table.primes_upto(n)
    ps = [int(p) for p in ps[np.gcd(ps % qv, qv) == 1]]
    if not ps:
        return NOT_FOUND
    gv = _g_of_primes(mod, a, b, np.asarray(ps, dtype=np.int64))
    base = np.bincount(gv, minlength=qv).astype(np.int64)
    partial = [None, base]
    for _ in range(2, k + 1):
        partial.append(_exact_cyclic_convolve(partial[-1], base, qv))
    if int(partial[k][m]) == 0:
        return NOT_FOUND
    gl = gv.tolist()
    chosen = []
    t = m
    for level in range(k, 1, -1):
        for p, g in zip(ps, gl):
            if partial[level - 1][(t - g) % qv] > 0:
                chosen.append(p)
                t = (t - g) % qv
                break
        else:
            raise InconsistencyError("descent found no continuation")
    for p, g in zip(ps, gl):
        if g == t:
            chosen.append(p)
            break
    else:
        raise InconsistencyError("descent failed at the base level")
    check = sum(
        (a * pow(p, -1, qv) + b * p) % qv for p in chosen
    ) % qv
    if check != m:
        raise InconsistencyError("gsum witness verification failed")
    return CongruenceWitness(primes=tuple(chosen), check=check)


def find_witness(q, m, n, table, k=None, a=None, b=None):
    """Dispatch: triple-product witness when k is None, else k-fold g-sum."""
    if k is None:
        return find_triple_witness(q, m, n, table)
    return find_gsum_witness(q, a, b, k, m, n, table)
