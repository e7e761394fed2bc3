"""Compare the compiled kernels against the pure Python fallback.

    python benchmarks/bench_kernels.py [--sizes 1024 16384 65536] [--repeat 3]

Each kernel is run on identical inputs under both backends; outputs are
checked for equality before timings are reported.
"""
import argparse
import timeit

import numpy as np

from qcutstack import _kernels_py as py

try:
    from qcutstack import _kernels as cy
except ImportError:
    cy = None


def inputs(n, rng):
    perm = rng.permutation(n).astype(np.int64)
    orbit = rng.permutation(n)[: max(n // 4, 1)].astype(np.int64)
    free = np.zeros(n, dtype=np.uint8)
    free[rng.choice(n, size=n // 3, replace=False)] = 1
    sources = np.flatnonzero(free == 0)[: n // 3].astype(np.int64)
    targets = rng.uniform(0, n, size=sources.shape[0])
    return {
        "cycle_decompose": (perm,),
        "orbit_gauge": (orbit, n),
        "greedy_nearest": (sources, targets, free),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1024, 16384, 65536])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not available; timing the Python fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16} {'N':>7} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for n in args.sizes:
        for name, arg in inputs(n, rng).items():
            fp = getattr(py, name)
            tp = min(timeit.repeat(lambda: fp(*arg), number=1, repeat=args.repeat))
            if cy is None:
                print(f"{name:<16} {n:>7} {tp * 1e3:>12.2f} {'-':>12} {'-':>8}")
                continue
            fc = getattr(cy, name)
            if not same(fp(*arg), fc(*arg)):
                raise SystemExit(f"backend mismatch in {name} at N={n}")
            tc = min(timeit.repeat(lambda: fc(*arg), number=1, repeat=args.repeat))
            print(f"{name:<16} {n:>7} {tp * 1e3:>12.2f} {tc * 1e3:>12.3f} {tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
