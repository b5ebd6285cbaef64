"""Compiled vs pure-Python Sturm bisection on assembled operators.

    python benchmarks/bench_kernels.py [--sizes 2000 8000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from poincare_gap import _fallback
from poincare_gap import spectral as sp
from poincare_gap.models import make_cauchy

try:
    from poincare_gap import _kernels
except ImportError:
    _kernels = None


def second_eigenvalue(kernels, t):
    lo, hi = sp._gershgorin(t)
    diag = np.ascontiguousarray(t.diagonal)
    offsq = np.ascontiguousarray(t.off_diagonal ** 2)
    return kernels.bisect_eigenvalue(diag, offsq, 1, lo, hi, 1e-12 * t.norm(), sp._pivmin(t))


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        value = fn()
        times.append(time.perf_counter() - start)
    return min(times), value


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[2000, 8000])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    model = make_cauchy(2.0)
    s = sp.default_s_radius(model)
    print(f"{'n':>7} {'compiled s':>11} {'python s':>10} {'speed-up':>9} {'|diff|':>9}")
    for n in args.sizes:
        t = sp.assemble(model, sp.build_grid_s(model, -s, s, n))
        py_time, py_val = best_time(lambda: second_eigenvalue(_fallback, t), args.repeat)
        if _kernels is None:
            print(f"{n:>7} {'n/a':>11} {py_time:>10.4f} {'n/a':>9} {'n/a':>9}")
            continue
        c_time, c_val = best_time(lambda: second_eigenvalue(_kernels, t), args.repeat)
        print(f"{n:>7} {c_time:>11.4f} {py_time:>10.4f} {py_time / c_time:>8.1f}x "
              f"{abs(c_val - py_val):>9.1e}")


if __name__ == "__main__":
    main()
