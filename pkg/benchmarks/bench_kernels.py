"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

Numba compile time is excluded by one warm-up call per kernel.  Both
backends are asserted to agree before anything is timed.
"""

import argparse
import time

import numpy as np

from merocone import _kernels
from merocone.cones import LatticeCone
from merocone.germs import Germ
from merocone.locality import coprime_naturals, disjoint_powerset


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def agree(a, b):
    if a is None or b is None or isinstance(a, tuple):
        return a == b
    return np.allclose(a, b)


def cases():
    for S, label in ((coprime_naturals(64), "coprime(64)"), (disjoint_powerset("abcdef"), "powerset(6)")):
        R, P = S.matrices()
        for kind in ("locality", "partial", "strong", "transitive"):
            yield f"scan {kind:<10} {label}", (lambda b, k=kind, R=R, P=P: _kernels.scan(k, R, P, b))

    f = (Germ.polar(1, [(1, 0), (1, 1), (0, 1)]) + Germ.polar(1, [(1, 2), (1, 1)])).reduce()
    args = f.compiled()
    pts = np.random.default_rng(0).normal(size=(20000, 2))
    yield "eval_germ 20k points", (lambda b: _kernels.eval_germ(pts, *args, backend=b)[0])

    c = LatticeCone([(1, 0), (1, 3)])
    A = np.array([[1.0, 0.0], [-1 / 3, 1 / 3]])
    basis = np.array([[float(x) for x in r] for r in c.lattice])
    yield "lattice_sum N=200", (lambda b: _kernels.lattice_sum(basis, A, np.array([-0.3, -0.7]), 200, False, b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or MEROCONE_NO_NUMBA set); timing numpy only")
    print(f"{'kernel':<34}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, fn in cases():
        ref = fn("numpy")
        t_np = best_of(lambda: fn("numpy"), args.repeat)
        if _kernels.HAVE_NUMBA:
            got = fn("numba")
            assert agree(ref, got), name
            t_nb = best_of(lambda: fn("numba"), args.repeat)
            print(f"{name:<34}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}")
        else:
            print(f"{name:<34}{1e3 * t_np:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
