#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python mirror.

Times the four hot kernels on corpus-sized inputs and prints one table row
per (kernel, size); the last column is the speedup of the compiled backend.

Usage:
    python benchmarks/bench_backends.py [--sizes 32 128 512] [--repeat 20]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from tws import backend  # noqa: E402

RATIOS = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
EMPTY = np.zeros(0)


def random_inputs(rng, n, natoms=4):
    edges = np.sort(rng.choice(np.arange(0, 64 * n), size=2 * n, replace=False)) / (
        8.0 * n
    )
    sl = np.ascontiguousarray(edges[0::2])
    sr = np.ascontiguousarray(edges[1::2])
    w = np.ascontiguousarray(rng.integers(1, 200, n) / 16.0)
    ax = np.ascontiguousarray(
        np.sort(rng.choice(np.arange(1, 60 * n), natoms, replace=False)) / (8.0 * n)
        + 2.0**-20
    )
    am = np.ascontiguousarray(rng.integers(1, 50, natoms) / 16.0)
    return sl, sr, w, ax, am


def timeit(fn, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 128, 512])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    impls = backend.implementations()
    if "compiled" not in impls:
        print("compiled kernels not built; run `python setup.py build_ext --inplace`")
        return 1
    comp, pure = impls["compiled"], impls["python"]
    rng = np.random.default_rng(0)

    print(f"active backend: {backend.BACKEND}")
    print(f"{'kernel':<22}{'segments':>9}{'compiled':>12}{'python':>12}{'speedup':>9}")
    for n in args.sizes:
        sl, sr, w, ax, am = random_inputs(rng, n)
        x = float(0.5 * (sl[0] + sr[-1]))
        cases = {
            "trunc_value": lambda impl: impl.trunc_value(
                sl, sr, w, ax, am, x, 0.05, 0.1, 2.0
            ),
            "sup_search (ppd 6)": lambda impl: impl.sup_search(
                sl, sr, w, ax, am, x, 1e-3, 8.0, 25, RATIOS, 10, EMPTY, True
            ),
            "maximal_value": lambda impl: impl.maximal_value(sl, sr, w, ax, am, x),
            "power_tail": lambda impl: impl.power_tail_segments(
                sl, sr, w, x, 0.5, 2.0, 1e-9
            ),
        }
        for name, fn in cases.items():
            tc = timeit(lambda: fn(comp), args.repeat)
            tp = timeit(lambda: fn(pure), max(1, args.repeat // 4))
            print(
                f"{name:<22}{n:>9}{tc * 1e3:>10.3f}ms{tp * 1e3:>10.3f}ms"
                f"{tp / tc:>8.1f}x"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
