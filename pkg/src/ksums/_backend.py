"""Backend selection and shared kernel plumbing.

The compiled extension (ksums._core) is preferred when importable; the pure
twin (ksums._pure) is the fallback.  KSUMS_PURE=1 forces the fallback,
set_backend() switches at runtime (used by the benchmark and the
equivalence tests).

Also owns the per-modulus caches (inverse tables, phase tables), the chunk
planner and the deterministic worker pool.  Chunks are fixed index ranges of
width 2**16; partials are merged pairwise in ascending chunk order, so
results do not depend on the worker count.
"""

import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pure

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

BLOCK = 1 << 16
# Above this modulus, per-term inversion/trig beats table memory.
TABLE_LIMIT = 1 << 21

_active = _pure if (_core is None or os.environ.get("KSUMS_PURE") == "1") else _core


def impl():
    return _active


def active_name():
    return "compiled" if _active is _core else "pure"


def has_compiled():
    return _core is not None


def set_backend(name):
    """Select 'compiled', 'pure' or 'auto'.  Returns the active name."""
    global _active
    if name == "pure":
        _active = _pure
    elif name == "compiled":
        if _core is None:
            raise RuntimeError("compiled backend is not available")
        _active = _core
    elif name == "auto":
        _active = _pure if (_core is None or os.environ.get("KSUMS_PURE") == "1") else _core
    else:
        raise ValueError(f"unknown backend {name!r}")
    return active_name()


def worker_count():
    """Workers for block-parallel sums, from KSUMS_WORKERS (default: all CPUs)."""
    raw = os.environ.get("KSUMS_WORKERS", "")
    if raw.strip():
        try:
            w = int(raw)
        except ValueError:
            w = 1
        return max(1, w)
    return os.cpu_count() or 1


def map_ordered(fn, items, parallel=True):
    """Apply fn across items, in parallel when configured; order preserved.

    parallel=False keeps the call serial regardless of the worker setting
    (used when per-item work is too small to amortize pool dispatch).
    """
    items = list(items)
    w = worker_count()
    if not parallel or w <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(w, len(items))) as ex:
        return list(ex.map(fn, items))


class _LRU(OrderedDict):
    def __init__(self, cap):
        super().__init__()
        self.cap = cap

    def put(self, key, value):
        self[key] = value
        self.move_to_end(key)
        while len(self) > self.cap:
            self.popitem(last=False)


_phase_cache = _LRU(8)
_inv_cache = _LRU(8)


def phase_tables(q):
    """Cached cos/sin tables of e_q for the active backend, or (None, None)."""
    if q > TABLE_LIMIT:
        return None, None
    key = (q, active_name())
    hit = _phase_cache.get(key)
    if hit is None:
        hit = _active.phase_tables(q)
        _phase_cache.put(key, hit)
    return hit


def inverse_table(q, prime_divisors):
    """Cached length-q inverse table; entry r holds r^(-1) mod q or 0.

    prime_divisors: the distinct primes dividing q (marks non-units fast).
    """
    if q > TABLE_LIMIT:
        return None
    key = (q, active_name())
    hit = _inv_cache.get(key)
    if hit is not None:
        return hit
    mask = np.ones(q, dtype=bool)
    mask[0] = False
    for p in prime_divisors:
        mask[::p] = False
    units = np.flatnonzero(mask).astype(np.int64)
    tab = np.zeros(q, dtype=np.int64)
    if units.size:
        tab[units] = _active.batch_inverse(units, q)
    out = tab.tolist() if _active is _pure else tab
    _inv_cache.put(key, out)
    return out


def clear_caches():
    _phase_cache.clear()
    _inv_cache.clear()
