"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from outlierlab import _kernels_py, kernels
from outlierlab.sampler import SeedSpec, sample_erdos_renyi

try:
    from outlierlab import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    m = sample_erdos_renyi(args.n, args.c * math.log(args.n) / args.n, SeedSpec(0)).csr
    x = SeedSpec(1).generator().standard_normal(args.n)
    small = sample_erdos_renyi(60, 0.08, SeedSpec(2)).csr
    cases = {
        "matvec": lambda impl: kernels.matvec(m, x, impl=impl),
        "row_norms_sq": lambda impl: kernels.row_norms_sq(m, impl=impl),
        "closed_walks(6)": lambda impl: kernels.closed_walks(small, 6, impl=impl),
    }
    print(f"n={args.n} nnz={m.nnz} compiled={'yes' if _compiled else 'no'}")
    print(f"{'kernel':<16} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for name, fn in cases.items():
        t_py = best_of(lambda: fn(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:<16} {t_py:10.4f} {'-':>11} {'-':>8}")
            continue
        t_c = best_of(lambda: fn(_compiled), args.repeat)
        np.testing.assert_allclose(np.asarray(fn(_compiled), dtype=float), np.asarray(fn(_kernels_py), dtype=float))
        print(f"{name:<16} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
