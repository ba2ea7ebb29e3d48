#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure-Python fallback.

Times the hot paths (complete sums, Mangoldt-weighted sums, batched modular
inversion, a four-sum decomposition) under both backends and checks that the
results agree bit for bit.

Usage:
    python3 benchmarks/bench_backends.py [--quick]
"""

import argparse
import pathlib
import sys
import time

_src = pathlib.Path(__file__).resolve().parent.parent / "src"
if str(_src) not in sys.path:
    try:
        import ksums  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))

import numpy as np

import ksums
from ksums import _backend
from ksums.vaughan import choose_params


def timed(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def workloads(quick):
    q_sweep = 600 if quick else 1500
    x_lambda = 10**5 if quick else 10**6
    table = ksums.sieve(x_lambda)
    mod = ksums.factorize(10007)
    spec = ksums.SumSpec(q=mod, a=1, b=1, x=x_lambda, weight=ksums.WEIGHT_MANGOLDT)

    def complete_sweep():
        acc = 0.0
        for q in range(2, q_sweep + 1):
            acc += ksums.complete_sum(1, 1, q).re
        return acc

    def lambda_big():
        return ksums.lambda_sum(spec, table)

    def batch_inv():
        m = ksums.factorize(999983)
        ns = np.arange(1, 200_001, dtype=np.int64)
        return _backend.impl().batch_inverse(ns, m.q)[-1]

    def vaughan():
        x = 40_000
        params = choose_params(10007.0, x) if not quick else ksums.VaughanParams(
            v=12.0, d=1728.0, regime="manual"
        )
        sp = ksums.SumSpec(q=mod, a=1, b=1, x=x, weight=ksums.WEIGHT_MANGOLDT)
        return ksums.decompose(sp, params, table).remainder

    return {
        f"complete sums q<= {q_sweep}": complete_sweep,
        f"mangoldt sum X = {x_lambda:.0e}": lambda_big,
        "batch inverse 2e5 values": batch_inv,
        "four-sum decomposition X = 4e4": vaughan,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()

    if not ksums.has_compiled():
        print("compiled backend unavailable; nothing to compare")
        return 1

    print(f"{'workload':<34} {'compiled':>10} {'pure':>10} {'speedup':>9}  agree")
    print("-" * 75)
    for name, fn in workloads(args.quick).items():
        ksums.set_backend("compiled")
        _backend.clear_caches()
        ref, t_c = timed(fn)
        ksums.set_backend("pure")
        _backend.clear_caches()
        alt, t_p = timed(fn, repeat=1)
        ksums.set_backend("auto")
        if hasattr(ref, "re"):
            agree = (ref.re, ref.im, ref.err, ref.terms) == (alt.re, alt.im, alt.err, alt.terms)
        elif isinstance(ref, float):
            agree = ref == alt
        else:
            agree = int(ref) == int(alt)
        print(f"{name:<34} {t_c:>9.3f}s {t_p:>9.3f}s {t_p / t_c:>8.1f}x  {'yes' if agree else 'NO'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
