"""Pure-Python twin of the compiled kernels in ksums._core.

Selected at import when the extension is missing (or forced with
KSUMS_PURE=1).  Slow but exact: every arithmetic step mirrors the compiled
code in the same order, calling the same libm through the math module, so
results are bit-identical for moduli below 2**53.
"""

import math

import numpy as np

TWO_PI = 6.283185307179586


def _invmod(n, q):
    # inverse of n mod q in [1, q), 0 when gcd(n, q) != 1; requires 0 <= n < q
    a, b, u, v = n, q, 1, 0
    while b:
        t = a // b
        a, b = b, a - t * b
        u, v = v, u - t * v
    if a != 1:
        return 0
    return u % q


def invmod_or_zero(q, n):
    """Inverse of n mod q, or 0 when not invertible (diagnostic helper)."""
    return _invmod(n % q, q)


def sum_terms_block(q, a, b, ns, ws, inv, cos_t, sin_t):
    """Sum w(n)*e_q(a*nbar + b*n) over an explicit block of integers.

    Same contract as the compiled kernel: a, b reduced to [0, q); inv is a
    length-q table with 0 marking non-units, or None; cos_t/sin_t phase
    tables (lists) or None; ws aligned float weights or None.
    """
    cos_ = math.cos
    sin_ = math.sin
    nlist = ns.tolist() if isinstance(ns, np.ndarray) else list(ns)
    wlist = None
    if ws is not None:
        wlist = ws.tolist() if isinstance(ws, np.ndarray) else list(ws)
    sre = sim = cre = cim = sab = 0.0
    terms = 0
    w = 1.0
    for i, n in enumerate(nlist):
        nm = n % q
        nb = inv[nm] if inv is not None else _invmod(nm, q)
        if nb == 0:
            continue
        r = (a * nb + b * nm) % q
        if cos_t is not None:
            cc = cos_t[r]
            ss = sin_t[r]
        else:
            tq = r / q
            ph = TWO_PI * tq
            cc = cos_(ph)
            ss = sin_(ph)
        if wlist is not None:
            w = wlist[i]
        y = w * cc - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = w * ss - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
        sab += abs(w)
        terms += 1
    return sre, sim, sab, terms


def sum_range_block(q, a, b, start, stop, weight_mode, inv, cos_t, sin_t):
    """Sum w(n)*e_q(a*nbar + b*n) for n in [start, stop), gcd(n, q) = 1."""
    cos_ = math.cos
    sin_ = math.sin
    log_ = math.log
    sre = sim = cre = cim = sab = 0.0
    terms = 0
    w = 1.0
    for n in range(start, stop):
        nm = n % q
        nb = inv[nm] if inv is not None else _invmod(nm, q)
        if nb == 0:
            continue
        r = (a * nb + b * nm) % q
        if cos_t is not None:
            cc = cos_t[r]
            ss = sin_t[r]
        else:
            tq = r / q
            ph = TWO_PI * tq
            cc = cos_(ph)
            ss = sin_(ph)
        if weight_mode == 1:
            w = log_(n)
        y = w * cc - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = w * ss - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
        sab += abs(w)
        terms += 1
    return sre, sim, sab, terms


def sum_phases_block(q, rs, ws, cos_t, sin_t):
    """Sum w*e_q(r) over a block of pre-reduced residues r in [0, q)."""
    cos_ = math.cos
    sin_ = math.sin
    rlist = rs.tolist() if isinstance(rs, np.ndarray) else list(rs)
    wlist = None
    if ws is not None:
        wlist = ws.tolist() if isinstance(ws, np.ndarray) else list(ws)
    sre = sim = cre = cim = sab = 0.0
    w = 1.0
    for i, r in enumerate(rlist):
        if cos_t is not None:
            cc = cos_t[r]
            ss = sin_t[r]
        else:
            tq = r / q
            ph = TWO_PI * tq
            cc = cos_(ph)
            ss = sin_(ph)
        if wlist is not None:
            w = wlist[i]
        y = w * cc - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = w * ss - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
        sab += abs(w)
    return sre, sim, sab, len(rlist)


def phase_tables(q):
    """cos/sin tables of e_q as Python lists (fast to index from the loops)."""
    cos_ = math.cos
    sin_ = math.sin
    cos_t = [0.0] * q
    sin_t = [0.0] * q
    for r in range(q):
        tq = r / q
        ph = TWO_PI * tq
        cos_t[r] = cos_(ph)
        sin_t[r] = sin_(ph)
    return cos_t, sin_t


def batch_inverse(ns, q):
    """Inverses mod q of every entry, via one inversion and O(len) products.

    Raises ValueError carrying the first non-invertible index.
    """
    nlist = ns.tolist() if isinstance(ns, np.ndarray) else list(ns)
    k = len(nlist)
    out = np.empty(k, dtype=np.int64)
    if k == 0:
        return out
    red = [n % q for n in nlist]
    running = 1
    for v in red:
        running = running * v % q
    inv_run = _invmod(running, q)
    if inv_run == 0:
        for i, v in enumerate(red):
            if math.gcd(v, q) != 1:
                raise ValueError(str(i))
        raise ValueError("0")  # unreachable for q >= 2
    pre = [0] * k
    running = 1
    for i, v in enumerate(red):
        running = running * v % q
        pre[i] = running
    for i in range(k - 1, -1, -1):
        out[i] = inv_run * pre[i - 1] % q if i > 0 else inv_run
        inv_run = inv_run * red[i] % q
    return out
