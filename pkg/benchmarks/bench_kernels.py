"""Compare the compiled and NumPy kernels on simulator-shaped inputs.

    python benchmarks/bench_kernels.py [--rows N] [--terms M] [--repeat R]

Also checks that both backends return bitwise-identical results.
"""

import argparse
import timeit

import numpy as np

from rwtail import _kernels_py

try:
    from rwtail import _kernels
except ImportError:  # extension not built
    _kernels = None


def make_inputs(rows, terms, seed=0):
    rng = np.random.default_rng(seed)
    theta = np.where(rng.random((rows, terms)) < 0.3, 0.0, rng.lognormal(size=(rows, terms)))
    x = rng.pareto(0.7, size=(rows, terms)) * rng.choice([-1.0, 1.0], size=(rows, terms), p=[0.2, 0.8])
    return np.ascontiguousarray(theta), np.ascontiguousarray(x)


def bench(label, fn, args, repeat):
    t = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
    print(f"  {label:<8} {t * 1e3:9.2f} ms")
    return t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=1 << 18)
    ap.add_argument("--terms", type=int, default=16)
    ap.add_argument("--levels", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    theta, x = make_inputs(args.rows, args.terms)
    sample = np.ascontiguousarray(np.abs(x).ravel()[: args.rows])
    levels = np.geomspace(1.0, 1e4, args.levels)

    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels is not None else [])
    if _kernels is None:
        print("compiled extension not available; timing the NumPy fallback only")

    print(f"accumulate_series  rows={args.rows} terms={args.terms}")
    times = {name: bench(name, mod.accumulate_series, (theta, x), args.repeat) for name, mod in backends}
    if len(times) == 2:
        print(f"  speedup  {times['python'] / times['cython']:9.2f}x")
        a = _kernels_py.accumulate_series(theta, x)
        b = _kernels.accumulate_series(theta, x)
        print("  bitwise identical:", all(np.array_equal(u, v) for u, v in zip(a, b)))

    print(f"exceedance_counts  n={sample.size} levels={levels.size}")
    times = {name: bench(name, mod.exceedance_counts, (sample, levels), args.repeat) for name, mod in backends}
    if len(times) == 2:
        print(f"  speedup  {times['python'] / times['cython']:9.2f}x")
        same = np.array_equal(_kernels_py.exceedance_counts(sample, levels), _kernels.exceedance_counts(sample, levels))
        print("  identical:", same)


if __name__ == "__main__":
    main()
