"""Compiled versus pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat N]

Each row is the best of N runs; the last column is the speed-up of the
compiled extension.  Both backends produce identical results, checked here
before timing.
"""

import argparse
import importlib
import timeit

import numpy as np

from sagnacbell import _kernels_py


def cases(k):
    rng = np.random.default_rng(0)
    means = np.concatenate([rng.uniform(0, 30, 50_000), rng.uniform(30, 5000, 50_000)])
    omega = np.linspace(0, 7, 40)
    y = 1000 * np.cos(1.015 * omega - 0.21) ** 2 + 100
    w = 1.0 / y
    scales = np.linspace(0.1, 5.0, 2000)
    p = np.array([1000.0, 1.015, -0.21, 100.0])
    big = np.linspace(0, 7, 200_000)
    return {
        "poisson_array, 1e5 means": lambda: k.poisson_array(means, 1, 0),
        "fringe_eval, 40 points": lambda: k.fringe_eval(1, p, omega),
        "fringe_eval, 2e5 points": lambda: k.fringe_eval(1, p, big),
        "periodogram, 2000 x 40": lambda: k.periodogram(omega, y, w, scales),
    }


def check_equal(py, cy):
    a, b = cases(py), cases(cy)
    for name in a:
        ra, rb = a[name](), b[name]()
        if isinstance(ra, tuple):
            ok = all(np.array_equal(x, z) for x, z in zip(ra, rb))
        elif name.startswith("periodogram"):
            ok = np.allclose(ra, rb, rtol=1e-12, atol=1e-9 * np.abs(ra).max())
        else:
            ok = np.array_equal(ra, rb)
        if not ok:
            raise SystemExit(f"backends disagree on {name}")


def best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 10
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        cy = importlib.import_module("sagnacbell._kernels")
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    check_equal(_kernels_py, cy)
    py_cases, cy_cases = cases(_kernels_py), cases(cy)
    print(f"{'kernel':<28}{'python':>12}{'cython':>12}{'speed-up':>10}")
    for name in py_cases:
        tp, tc = best(py_cases[name], args.repeat), best(cy_cases[name], args.repeat)
        print(f"{name:<28}{tp * 1e3:>10.3f}ms{tc * 1e3:>10.3f}ms{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
