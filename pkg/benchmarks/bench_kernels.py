"""Time the numba kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.  The first numba call
(compilation, or a cache load) is timed separately and excluded from the
steady-state numbers.
"""

import argparse
import time

import numpy as np

from ordifun.basis import make_bspline_basis
from ordifun.kernels import _numba, _numpy


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(size):
    gen = np.random.default_rng(0)
    spec = make_bspline_basis(10, (0.0, 100.0))
    knots = np.asarray(spec.knots)
    t = np.sort(gen.uniform(0.0, 100.0, size))
    counters = np.arange(size, dtype=np.uint64)
    p = gen.uniform(1e-12, 1 - 1e-12, size)
    points = gen.normal(size=(size, 2))
    centers = gen.normal(size=(9, 2))
    return {
        "bspline_design": lambda mod: mod.bspline_design(knots, 4, t, 0),
        "bspline_design d2": lambda mod: mod.bspline_design(knots, 4, t, 2),
        "splitmix_bits": lambda mod: mod.splitmix_bits(np.uint64(12345), counters),
        "inverse_normal": lambda mod: mod.inverse_normal(p),
        "nearest_rows": lambda mod: mod.nearest_rows(points, centers),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args()

    print(f"size={args.size}, best of {args.repeat}")
    print(f"{'kernel':<20}{'first numba':>14}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name, run in cases(args.size).items():
        start = time.perf_counter()
        fast = run(_numba)
        first = time.perf_counter() - start
        slow = run(_numpy)
        if not np.allclose(fast, slow, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        t_jit = best_of(lambda: run(_numba), args.repeat)
        t_np = best_of(lambda: run(_numpy), args.repeat)
        print(f"{name:<20}{first * 1e3:>12.1f}ms{t_jit * 1e3:>10.2f}ms{t_np * 1e3:>10.2f}ms{t_np / t_jit:>9.1f}x")


if __name__ == "__main__":
    main()
