"""Compare the compiled and numpy implementations of the elementwise kernels.

    python benchmarks/bench_kernels.py [--n 1000] [--views 3] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mvksc import _pykernels

try:
    from mvksc import _ckernels
except ImportError:
    _ckernels = None


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--views", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.n
    Y = rng.standard_normal((n, n))
    Cs = rng.standard_normal((n, n)) * (rng.random((n, n)) > 0.5)
    A = rng.standard_normal((args.views, n, n))
    GQ = rng.random((n, n))
    cases = {
        "prox_double_l1": ("prox_double_l1_matrix", (Y, Cs, 0.3, 0.1)),
        "consensus_l1": ("consensus_l1_matrix", (A, GQ, 1.0)),
    }
    print(f"n={n} views={args.views} (best of {args.repeat})")
    print(f"{'kernel':<16}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for label, (name, fargs) in cases.items():
        t_py = bench(getattr(_pykernels, name), fargs, args.repeat)
        if _ckernels is None:
            print(f"{label:<16}{t_py:12.4f}{'n/a':>12}{'':>10}")
            continue
        t_c = bench(getattr(_ckernels, name), fargs, args.repeat)
        same = np.array_equal(getattr(_ckernels, name)(*fargs), getattr(_pykernels, name)(*fargs))
        print(f"{label:<16}{t_py:12.4f}{t_c:12.4f}{t_py / t_c:9.1f}x" + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
