import math

import numpy as np
import pytest

import ksums
from ksums.errors import DomainError
from ksums.vaughan import REGIME_LOW, REGIME_MAIN, REGIME_TAIL


def test_coeff_a_examples():
    assert ksums.coeff_a(2, 3) == pytest.approx(math.log(2), abs=1e-15)
    assert ksums.coeff_a(4, 3) == pytest.approx(-math.log(2), abs=1e-15)
    assert ksums.coeff_a(6, 3) == pytest.approx(-math.log(6), abs=1e-15)
    assert ksums.coeff_a(1, 3) == 0.0


def test_coeff_b_examples():
    assert ksums.coeff_b(6, 3) == -1
    assert ksums.coeff_b(4, 3) == 0
    # full Moebius sum vanishes for m > 1
    for m in (2, 6, 12, 30, 36, 97):
        assert ksums.coeff_b(m, m) == 0
    assert ksums.coeff_b(1, 5) == 1


def test_coefficient_of_examples():
    assert ksums.coefficient_of(5, 3, 100) == pytest.approx(math.log(5), abs=1e-12)
    assert ksums.coefficient_of(6, 3, 100) == pytest.approx(0.0, abs=1e-12)
    assert ksums.coefficient_of(9, 3, 100) == pytest.approx(math.log(3), abs=1e-12)


def test_coefficient_identity_small(table_small):
    t = table_small
    v, x = 10.0, 3000
    for n in range(11, x + 1):
        c = ksums.coefficient_of(n, v, x)
        assert abs(c - float(t.mangoldt[n])) <= 1e-9 * (1 + math.log(n)), n


def test_choose_params_examples():
    q = 10**6
    x78 = round(q**0.875)
    p = ksums.choose_params(q, x78)
    assert p.regime == REGIME_MAIN
    assert p.d == pytest.approx(q ** (2 / 35) * x78 ** (32 / 35), rel=1e-12)
    assert p.v == pytest.approx(p.d ** (1 / 3), rel=1e-12)
    assert p.v == pytest.approx(51.8, rel=1e-2)

    x34 = round(q**0.75)
    p2 = ksums.choose_params(q, x34)
    assert p2.regime == REGIME_LOW
    assert p2.d == pytest.approx(q ** (3 / 28) * x34 ** (6 / 7), rel=1e-12)

    xt = (q / 2) ** 1.5
    p3 = ksums.choose_params(q, xt)
    assert p3.regime == REGIME_TAIL
    assert p3.v == pytest.approx(2 * xt / q, rel=1e-12)
    assert xt / p3.v == pytest.approx(q / 2, rel=1e-12)


def test_choose_params_postconditions_random():
    rng = np.random.default_rng(31)
    for _ in range(200):
        q = float(10 ** rng.uniform(2.2, 11))
        lo, hi = q**0.75, (q / 2) ** 1.5
        x = float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))
        p = ksums.choose_params(q, x)
        assert p.v > 1.0
        assert p.v < math.sqrt(x)
        assert x / p.v <= (q / 2) * (1 + 1e-9)


def test_regime_caps_cover_their_windows():
    from ksums.vaughan import low_regime_cap, main_regime_cap

    for q in (6, 100, 10**4, 10**9, 2**55):
        # the low regime ends at q^(7/8), always below its own validity cap
        assert q ** (7 / 8) <= low_regime_cap(q) * (1 + 1e-12)
        # the main regime cap is where X/V meets q/2 exactly
        x = main_regime_cap(q)
        p = ksums.choose_params(q, x)
        assert x / p.v <= (q / 2) * (1 + 1e-9)


def test_choose_params_domain():
    with pytest.raises(DomainError):
        ksums.choose_params(10**6, 10**3)
    with pytest.raises(DomainError):
        ksums.choose_params(10**6, 10**10)


def _mk(q, a, b, x):
    return ksums.SumSpec(q=ksums.factorize(q), a=a, b=b, x=x, weight=ksums.WEIGHT_MANGOLDT)


def test_decompose_identity_and_remainder(table_small):
    t = table_small
    spec = _mk(101, 1, 1, 500)
    params = ksums.VaughanParams(v=5.0, d=125.0, regime="manual")
    dec = ksums.decompose(spec, params, t)
    lhs = dec.total.value
    rhs = dec.s1.value - dec.s2.value - dec.s3.value - dec.s4.value + dec.remainder.value
    assert lhs == pytest.approx(rhs, abs=1e-12)  # identity by construction
    ref = ksums.remainder_reference(spec, params, t)
    tol = dec.remainder.err + ref.err + 1e-9
    assert abs(dec.remainder.value - ref.value) <= tol


def test_decompose_s4_empty_when_x_below_v_squared(table_small):
    spec = _mk(97, 1, 1, 25)
    params = ksums.VaughanParams(v=5.0, d=125.0, regime="manual")
    dec = ksums.decompose(spec, params, table_small)
    assert dec.s4.terms == 0 and dec.s4.value == 0
    ref = ksums.remainder_reference(spec, params, table_small)
    assert abs(dec.remainder.value - ref.value) <= dec.remainder.err + ref.err + 1e-9


def test_decompose_with_auto_params(table_small):
    q = 211
    x = 800  # inside [q^(3/4), (q/2)^(3/2)] = [55.5, 1083]
    params = ksums.choose_params(q, x)
    dec = ksums.decompose(_mk(q, 2, 3, x), params, table_small)
    spec = _mk(q, 2, 3, x)
    ref = ksums.remainder_reference(spec, params, table_small)
    assert abs(dec.remainder.value - ref.value) <= dec.remainder.err + ref.err + 1e-9


def test_decompose_components_match_direct_enumeration(table_small):
    # each of the four sums against a direct double loop with fsum
    import cmath

    q, a, b, x, v = 101, 3, 2, 200, 5.0
    t = table_small

    def eq(u):
        return cmath.exp(2j * math.pi * (u % q) / q)

    def term(m, n):
        return eq(a * pow(m * n, -1, q) + b * m * n)

    def fsum_c(zs):
        zs = list(zs)
        return complex(math.fsum(z.real for z in zs), math.fsum(z.imag for z in zs))

    from ksums.arith import mangoldt_of, mu_of

    vf = int(v)
    s1 = fsum_c(
        mu_of(m) * math.log(n) * term(m, n)
        for m in range(1, vf + 1)
        if math.gcd(m, q) == 1 and mu_of(m)
        for n in range(1, x // m + 1)
        if math.gcd(n, q) == 1
    )

    def a_m(m):
        return ksums.coeff_a(m, v)

    s2 = fsum_c(
        a_m(m) * term(m, n)
        for m in range(1, vf + 1)
        if math.gcd(m, q) == 1 and a_m(m)
        for n in range(1, x // m + 1)
        if math.gcd(n, q) == 1
    )
    s3 = fsum_c(
        a_m(m) * term(m, n)
        for m in range(vf + 1, int(v * v) + 1)
        if math.gcd(m, q) == 1 and a_m(m)
        for n in range(1, x // m + 1)
        if math.gcd(n, q) == 1
    )
    s4 = fsum_c(
        ksums.coeff_b(m, v) * mangoldt_of(n) * term(m, n)
        for m in range(vf + 1, x + 1)
        if m <= x / v and math.gcd(m, q) == 1 and ksums.coeff_b(m, v)
        for n in range(vf + 1, x // m + 1)
        if n > v and math.gcd(n, q) == 1 and mangoldt_of(n)
    )

    spec = _mk(q, a, b, x)
    params = ksums.VaughanParams(v=v, d=v**3, regime="manual")
    dec = ksums.decompose(spec, params, t)
    for got, ref in ((dec.s1, s1), (dec.s2, s2), (dec.s3, s3), (dec.s4, s4)):
        assert abs(got.value - ref) <= got.err + 1e-10


def test_decompose_even_modulus_auto_params():
    # power-of-two modulus exercises the heavy coprimality filtering
    q = 2**16
    x = 10**5
    t = ksums.sieve(x)
    params = ksums.choose_params(q, x)
    assert params.regime == REGIME_MAIN
    spec = _mk(q, 3, 5, x)
    dec = ksums.decompose(spec, params, t)
    ref = ksums.remainder_reference(spec, params, t)
    assert abs(dec.remainder.value - ref.value) <= dec.remainder.err + ref.err + 1e-9
    # every inner variable was coprime to q, so all terms are odd integers
    assert dec.total.terms == sum(
        1 for n in range(3, x + 1, 2) if float(t.mangoldt[n]) > 0
    )


def test_decompose_rejects_bad_params(table_small):
    spec = _mk(101, 1, 1, 500)
    bad = ksums.VaughanParams(v=50.0, d=1.0, regime=REGIME_MAIN)  # V >= sqrt(X)
    with pytest.raises(DomainError, match="sqrt"):
        ksums.decompose(spec, bad, table_small)
    bad2 = ksums.VaughanParams(v=1.5, d=1.0, regime=REGIME_MAIN)  # X/V > q/2
    with pytest.raises(DomainError, match="q/2"):
        ksums.decompose(spec, bad2, table_small)


def test_decompose_requires_coprime(table_small):
    with pytest.raises(DomainError):
        ksums.decompose(
            _mk(10, 5, 1, 100),
            ksums.VaughanParams(v=4.0, d=64.0, regime="manual"),
            table_small,
        )
