"""Compare the compiled and pure-Python X-state rate kernels.

Run with ``python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]``.
"""

import argparse
import time

import numpy as np

from wlike import kernels
from wlike.protocols import find_threshold_D


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    a, b, d = (rng.uniform(0, 5, args.n) for _ in range(3))
    c = b * rng.uniform(0, 1, args.n)
    eps = [round(0.01 * i, 2) for i in range(101)]

    print(f"backends available: {', '.join(kernels.BACKENDS)}")
    print(f"{'backend':8s} {'kernel ' + str(args.n):>18s} {'filter threshold N=3':>22s}")
    results = {}
    for backend in kernels.BACKENDS:
        tk = best_of(lambda: kernels.xstate_dw(a, b, c, d, backend=backend), args.repeat)
        tt = best_of(
            lambda: find_threshold_D("filter", range(2, 6001), N=3, eps=eps, backend=backend),
            args.repeat,
        )
        results[backend] = (tk, tt)
        print(f"{backend:8s} {tk * 1e3:16.1f}ms {tt * 1e3:20.1f}ms")
    if len(results) == 2:
        (pk, pt), (ck, ct) = results["python"], results["cython"]
        print(f"speedup: kernel {pk / ck:.2f}x, threshold scan {pt / ct:.2f}x")


if __name__ == "__main__":
    main()
