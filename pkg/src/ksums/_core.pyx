# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: compensated phase accumulation, batched modular
inversion and trig tables.

Contract shared with the pure twin (ksums._pure): identical operation order,
identical libm calls, 128-bit intermediates for modular products.  The
extension is compiled with -fno-fast-math -ffp-contract=off so results are
bit-identical to the fallback for moduli below 2**53.

Every block function returns a raw partial ``(re, im, sumabs, terms)``; error
bounds and chunk merging live in the Python layer.
"""

from libc.math cimport cos, sin, log, fabs

import math

import numpy as np

ctypedef long long i64

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef double TWO_PI = 6.283185307179586

_EMPTY_F = np.empty(0, dtype=np.float64)
_EMPTY_I = np.empty(0, dtype=np.int64)


cdef inline i64 _mulmod(i64 x, i64 y, i64 q) nogil:
    return <i64>((<i128>x * <i128>y) % q)


cdef inline i64 _invmod(i64 n, i64 q) nogil:
    # inverse of n mod q in [1, q), 0 when gcd(n, q) != 1; requires 0 <= n < q
    cdef i64 a = n, b = q, u = 1, v = 0, t, w
    while b != 0:
        t = a / b
        w = a - t * b
        a = b
        b = w
        w = u - t * v
        u = v
        v = w
    if a != 1:
        return 0
    u = u % q
    if u < 0:
        u += q
    return u


def invmod_or_zero(q, n):
    """Inverse of n mod q, or 0 when not invertible (diagnostic helper)."""
    cdef i64 qq = q
    cdef i64 nn = n % q
    return _invmod(nn, qq)


def sum_terms_block(q, a, b, ns, ws, inv, cos_t, sin_t):
    """Sum w(n)*e_q(a*nbar + b*n) over an explicit block of integers.

    Terms with gcd(n, q) > 1 are skipped and not counted.  a, b must already
    be reduced to [0, q).  ws is a float64 array aligned with ns or None for
    unit weights; inv is a length-q inverse table (0 marks non-units) or
    None; cos_t/sin_t are length-q phase tables or None.
    """
    cdef i64 qq = q, aa = a, bb = b
    cdef const i64[::1] nv = ns
    cdef bint has_w = ws is not None
    cdef bint has_inv = inv is not None
    cdef bint has_t = cos_t is not None
    cdef const double[::1] wv = ws if has_w else _EMPTY_F
    cdef const i64[::1] iv = inv if has_inv else _EMPTY_I
    cdef const double[::1] cv = cos_t if has_t else _EMPTY_F
    cdef const double[::1] sv = sin_t if has_t else _EMPTY_F
    cdef Py_ssize_t i, k = nv.shape[0]
    cdef double sre = 0.0, sim = 0.0, cre = 0.0, cim = 0.0, sab = 0.0
    cdef double w = 1.0, tq, ph, cc, ss, y, t
    cdef i64 n, nm, nb, r, terms = 0
    with nogil:
        for i in range(k):
            n = nv[i]
            nm = n % qq
            if has_inv:
                nb = iv[nm]
            else:
                nb = _invmod(nm, qq)
            if nb == 0:
                continue
            r = (_mulmod(aa, nb, qq) + _mulmod(bb, nm, qq)) % qq
            if has_t:
                cc = cv[r]
                ss = sv[r]
            else:
                tq = (<double>r) / (<double>qq)
                ph = TWO_PI * tq
                cc = cos(ph)
                ss = sin(ph)
            if has_w:
                w = wv[i]
            y = w * cc - cre
            t = sre + y
            cre = (t - sre) - y
            sre = t
            y = w * ss - cim
            t = sim + y
            cim = (t - sim) - y
            sim = t
            sab += fabs(w)
            terms += 1
    return sre, sim, sab, terms


def sum_range_block(q, a, b, start, stop, weight_mode, inv, cos_t, sin_t):
    """Sum w(n)*e_q(a*nbar + b*n) for n in [start, stop), gcd(n, q) = 1.

    weight_mode 0 is unit weight, 1 is ln(n).
    """
    cdef i64 qq = q, aa = a, bb = b
    cdef i64 lo = start, hi = stop
    cdef int mode = weight_mode
    cdef bint has_inv = inv is not None
    cdef bint has_t = cos_t is not None
    cdef const i64[::1] iv = inv if has_inv else _EMPTY_I
    cdef const double[::1] cv = cos_t if has_t else _EMPTY_F
    cdef const double[::1] sv = sin_t if has_t else _EMPTY_F
    cdef double sre = 0.0, sim = 0.0, cre = 0.0, cim = 0.0, sab = 0.0
    cdef double w = 1.0, tq, ph, cc, ss, y, t
    cdef i64 n, nm, nb, r, terms = 0
    with nogil:
        for n in range(lo, hi):
            nm = n % qq
            if has_inv:
                nb = iv[nm]
            else:
                nb = _invmod(nm, qq)
            if nb == 0:
                continue
            r = (_mulmod(aa, nb, qq) + _mulmod(bb, nm, qq)) % qq
            if has_t:
                cc = cv[r]
                ss = sv[r]
            else:
                tq = (<double>r) / (<double>qq)
                ph = TWO_PI * tq
                cc = cos(ph)
                ss = sin(ph)
            if mode == 1:
                w = log(<double>n)
            y = w * cc - cre
            t = sre + y
            cre = (t - sre) - y
            sre = t
            y = w * ss - cim
            t = sim + y
            cim = (t - sim) - y
            sim = t
            sab += fabs(w)
            terms += 1
    return sre, sim, sab, terms


def sum_phases_block(q, rs, ws, cos_t, sin_t):
    """Sum w*e_q(r) over a block of pre-reduced residues r in [0, q)."""
    cdef i64 qq = q
    cdef const i64[::1] rv = rs
    cdef bint has_w = ws is not None
    cdef bint has_t = cos_t is not None
    cdef const double[::1] wv = ws if has_w else _EMPTY_F
    cdef const double[::1] cv = cos_t if has_t else _EMPTY_F
    cdef const double[::1] sv = sin_t if has_t else _EMPTY_F
    cdef Py_ssize_t i, k = rv.shape[0]
    cdef double sre = 0.0, sim = 0.0, cre = 0.0, cim = 0.0, sab = 0.0
    cdef double w = 1.0, tq, ph, cc, ss, y, t
    cdef i64 r
    with nogil:
        for i in range(k):
            r = rv[i]
            if has_t:
                cc = cv[r]
                ss = sv[r]
            else:
                tq = (<double>r) / (<double>qq)
                ph = TWO_PI * tq
                cc = cos(ph)
                ss = sin(ph)
            if has_w:
                w = wv[i]
            y = w * cc - cre
            t = sre + y
            cre = (t - sre) - y
            sre = t
            y = w * ss - cim
            t = sim + y
            cim = (t - sim) - y
            sim = t
            sab += fabs(w)
    return sre, sim, sab, <i64>k


def phase_tables(q):
    """cos/sin tables of e_q: entry r holds cos/sin(2*pi*(r/q))."""
    cdef i64 qq = q
    cos_a = np.empty(qq, dtype=np.float64)
    sin_a = np.empty(qq, dtype=np.float64)
    cdef double[::1] cv = cos_a
    cdef double[::1] sv = sin_a
    cdef i64 r
    cdef double tq, ph
    with nogil:
        for r in range(qq):
            tq = (<double>r) / (<double>qq)
            ph = TWO_PI * tq
            cv[r] = cos(ph)
            sv[r] = sin(ph)
    return cos_a, sin_a


def batch_inverse(ns, q):
    """Inverses mod q of every entry, via one inversion and O(len) products.

    Raises ValueError carrying the first non-invertible index.
    """
    cdef i64 qq = q
    cdef const i64[::1] nv = ns
    cdef Py_ssize_t i, k = nv.shape[0]
    out_a = np.empty(k, dtype=np.int64)
    red_a = np.empty(k, dtype=np.int64)
    pre_a = np.empty(k, dtype=np.int64)
    cdef i64[::1] out = out_a
    cdef i64[::1] red = red_a
    cdef i64[::1] pre = pre_a
    cdef i64 running = 1, v, inv_run
    if k == 0:
        return out_a
    with nogil:
        for i in range(k):
            v = nv[i] % qq
            if v < 0:
                v += qq
            red[i] = v
            running = _mulmod(running, v, qq)
    inv_run = _invmod(running, qq)
    if inv_run == 0:
        for i in range(k):
            if math.gcd(int(red[i]), int(qq)) != 1:
                raise ValueError(str(i))
        raise ValueError("0")  # unreachable for q >= 2
    with nogil:
        running = 1
        for i in range(k):
            running = _mulmod(running, red[i], qq)
            pre[i] = running
        for i in range(k - 1, -1, -1):
            if i > 0:
                out[i] = _mulmod(inv_run, pre[i - 1], qq)
            else:
                out[i] = inv_run
            inv_run = _mulmod(inv_run, red[i], qq)
    return out_a
