"""Compare the numba and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 8 12 16] [--repeat 5]

Both backends are importable side by side, so one process times both.
Numba compile time is excluded by a warm-up call.
"""
import argparse
import time

import numpy as np

from qaoa_conjecture import kernels
from qaoa_conjecture.graphs import GraphModel, generate


def _best_time(fn, repeat):
    fn()  # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeat, depth):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>4}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}")
    for n in sizes:
        g = generate(GraphModel("regular", {"d": 3}), n, seed=n)
        eu, ev = g.edge_arrays
        cost = kernels.cost_diagonal_numpy(n, eu, ev)
        gammas = rng.uniform(0, np.pi, depth)
        betas = rng.uniform(0, np.pi / 2, depth)
        cases = [
            ("cost_diagonal", lambda: kernels.cost_diagonal_numpy(n, eu, ev),
             lambda: kernels.cost_diagonal_numba(n, eu, ev)),
            ("qaoa_value", lambda: kernels.qaoa_value_numpy(cost, n, gammas, betas),
             lambda: kernels.qaoa_value_numba(cost, n, gammas, betas)),
        ]
        if n <= 20:
            cases.append(("maxcut", lambda: kernels.maxcut_numpy(n, eu, ev),
                          lambda: kernels.maxcut_numba(n, eu, ev)))
        for name, f_np, f_nb in cases:
            t_np = _best_time(f_np, repeat)
            t_nb = _best_time(f_nb, repeat)
            print(f"{name:<14}{n:>4}{t_np * 1e3:>14.3f}{t_nb * 1e3:>14.3f}{t_np / t_nb:>10.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 12, 16, 18])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--depth", type=int, default=2)
    args = ap.parse_args()
    bench(args.sizes, args.repeat, args.depth)


if __name__ == "__main__":
    main()
