#!/usr/bin/env python3
"""Benchmark the compiled sweep kernels against the numpy fallback.

Run:  python benchmarks/bench_kernels.py [--events 2e6] [--repeats 3]

Both backends must produce identical outputs; this script verifies that
while timing realistic correlator workloads (coincidence histogram over
+-5 ns at 8 ps bins, and a heralding-window membership mask).
"""

import argparse
import time

import numpy as np

from pairlink import _sweep_numpy

try:
    from pairlink import _sweepcore
except ImportError:
    _sweepcore = None


def timed(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return np.asarray(result), best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--events", type=float, default=2e6)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    n = int(args.events)
    rng = np.random.default_rng(1)
    span_ps = n * 1e4  # ~100 Mcps-equivalent density
    a = np.sort(rng.random(n) * span_ps)
    b = np.sort(rng.random(int(1.2 * n)) * span_ps)

    workloads = [
        ("count_lags (+-5 ns, 8 ps bins)", "count_lags", (a, b, -5000.0, 8.0, 1250)),
        ("match_mask (1.2 ns window)", "match_mask", (a, b, -600.0, 600.0)),
    ]

    print(f"{n:,} x {int(1.2 * n):,} events, best of {args.repeats}\n")
    print(f"{'workload':<34} {'numpy':>10} {'cython':>10} {'speedup':>8}")
    for label, name, call_args in workloads:
        ref, t_numpy = timed(getattr(_sweep_numpy, name), *call_args, repeats=args.repeats)
        if _sweepcore is None:
            print(f"{label:<34} {t_numpy:>9.3f}s {'n/a':>10} {'':>8}")
            continue
        got, t_cython = timed(getattr(_sweepcore, name), *call_args, repeats=args.repeats)
        assert np.array_equal(ref, got), f"backend mismatch in {name}"
        print(
            f"{label:<34} {t_numpy:>9.3f}s {t_cython:>9.3f}s {t_numpy / t_cython:>7.1f}x"
        )
    if _sweepcore is None:
        print("\ncompiled backend not built; run `pip install -e .` with a C compiler")


if __name__ == "__main__":
    main()
