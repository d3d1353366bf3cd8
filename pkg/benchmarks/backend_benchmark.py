#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy fallback.

Times the three hot kernels (exponential sampling, loss-factor transform,
payoff grid scan) on both backends and prints a comparison table.  The two
backends produce bit-identical output (asserted here on a small slice), so
the only difference that matters is speed.

Usage: python benchmarks/backend_benchmark.py [--samples N] [--grid N] [--repeats K]
"""

import argparse
import math
import time

import numpy as np

from cyins import _backend


def _best_of(repeats, fn):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=10_000_000,
                        help="sample count for the fill kernels")
    parser.add_argument("--grid", type=int, default=2001,
                        help="grid resolution per axis for the payoff scan")
    parser.add_argument("--repeats", type=int, default=3,
                        help="repetitions; the best time is reported")
    args = parser.parse_args()

    names = _backend.available_backends()
    if "compiled" not in names:
        print("compiled backend not built; benchmarking the fallback alone")

    risk = math.log(2.0)
    grid = np.linspace(1e-6, 1.0, args.grid)
    buf = np.empty(args.samples)

    cases = {
        "fill_losses": lambda kern: kern.fill_losses(buf, 42, 0, risk),
        "fill_loss_factors": lambda kern: kern.fill_loss_factors(buf, 42, 0, risk, 0.5),
        "saddle_scan": lambda kern: kern.saddle_scan(grid, grid, 0.5, 1.0, 1.0),
    }

    check = np.empty(100_000)
    reference = None
    for name in names:
        kern = _backend._BACKENDS[name]
        kern.fill_loss_factors(check, 7, 0, risk, 0.5)
        bits = check.view(np.uint64).copy()
        if reference is None:
            reference = bits
        else:
            assert np.array_equal(reference, bits), "backends disagree bit-for-bit"

    timings = {case: {} for case in cases}
    for name in names:
        kern = _backend._BACKENDS[name]
        for case, fn in cases.items():
            timings[case][name] = _best_of(args.repeats, lambda: fn(kern))

    width = max(len(c) for c in cases) + 2
    header = f"{'kernel'.ljust(width)}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(f"samples={args.samples:,}  grid={args.grid}x{args.grid}  repeats={args.repeats}")
    print(header)
    for case in cases:
        row = case.ljust(width)
        for name in names:
            row += f"{timings[case][name] * 1e3:>12.1f}ms"
        if len(names) == 2:
            row += f"{timings[case]['python'] / timings[case]['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
