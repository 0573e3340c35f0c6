"""Benchmark the compiled extension against the pure-numpy fallback.

Times the three hot kernels on both backends, then one end-to-end coupled
run with each backend injected.  Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import dbmlab._kernels as kernels
from dbmlab._kernels import fallback

try:
    from dbmlab._kernels import _core
except ImportError:
    _core = None


def _time(fn, *args, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    print(f"active backend: {kernels.BACKEND}")
    header = f"{'kernel':34s} {'N':>6s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(0)
    for n in (250, 500, 1000, 2000):
        x = np.sort(rng.standard_normal(n))
        y = np.sort(rng.standard_normal(n))
        xhat = x + 0.01 * rng.standard_normal(n)
        cases = [
            ("dbm_drift", (x,)),
            ("dbm_drift_regularized", (x, xhat, 1e-6)),
            ("coupled_coefficient_matrix", (x, y, 0.0)),
        ]
        for name, args in cases:
            t_np = _time(getattr(fallback, name), *args)
            if _core is not None:
                t_c = _time(getattr(_core, name), *args)
                print(f"{name:34s} {n:6d} {t_np*1e3:9.3f}ms {t_c*1e3:9.3f}ms {t_np/t_c:7.1f}x")
            else:
                print(f"{name:34s} {n:6d} {t_np*1e3:9.3f}ms {'n/a':>10s} {'':>8s}")


def bench_end_to_end(n=500, t_end=0.25):
    from dbmlab.dynamics import run_coupled

    rng = np.random.default_rng(1)
    x0 = np.sort(rng.standard_normal(n))
    y0 = np.sort(rng.standard_normal(n))
    results = {}
    backends = {"numpy": fallback}
    if _core is not None:
        backends["compiled"] = _core
    for label, impl in backends.items():
        saved = (kernels.dbm_drift, kernels.dbm_drift_regularized,
                 kernels.coupled_coefficient_matrix)
        kernels.dbm_drift = impl.dbm_drift
        kernels.dbm_drift_regularized = impl.dbm_drift_regularized
        kernels.coupled_coefficient_matrix = impl.coupled_coefficient_matrix
        try:
            t0 = time.perf_counter()
            run_coupled(x0, y0, t_end, 0.2 / n, np.random.default_rng(2))
            results[label] = time.perf_counter() - t0
        finally:
            (kernels.dbm_drift, kernels.dbm_drift_regularized,
             kernels.coupled_coefficient_matrix) = saved
    print(f"\ncoupled run N={n}, t={t_end}, dt=0.2/N:")
    for label, seconds in results.items():
        print(f"  {label:9s} {seconds:7.2f}s")
    if len(results) == 2:
        print(f"  speedup   {results['numpy'] / results['compiled']:6.1f}x")


if __name__ == "__main__":
    bench_kernels()
    bench_end_to_end()
