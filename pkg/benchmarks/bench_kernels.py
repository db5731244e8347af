"""Compare the compiled and numpy Jacobi kernels.

    python benchmarks/bench_kernels.py [--n 20000] [--p 10 13] [--repeat 3]

Times ``jacobi_eigh_batch`` on stacks of random SPD matrices shaped like
the pipeline's covariance features, checks the two backends agree, and
prints a LAPACK ``eigh`` timing for reference.
"""
import argparse
import time

import numpy as np

from riemann_ids._backend import available_backends
from riemann_ids.linalg import EIG_TOL, MAX_SWEEPS


def spd_stack(n, p, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(n, p, 4))
    c = x @ np.swapaxes(x, 1, 2) / 3
    tr = np.trace(c, axis1=1, axis2=2)[:, None, None]
    return np.ascontiguousarray(0.9 * c + 0.1 * tr / p * np.eye(p))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--p", type=int, nargs="+", default=[10, 13])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; timing the numpy fallback only")
    print(f"{'p':>3} {'n':>7} {'backend':>8} {'seconds':>9} {'speedup':>8}")
    for p in args.p:
        mats = spd_stack(args.n, p)
        results = {}
        for name, mod in backends.items():
            t, out = best_of(lambda: mod.jacobi_eigh_batch(mats.copy(), EIG_TOL, MAX_SWEEPS), args.repeat)
            results[name] = (t, out)
        t_lapack, _ = best_of(lambda: np.linalg.eigh(mats), args.repeat)
        base = results["numpy"][0]
        for name, (t, _) in results.items():
            print(f"{p:>3} {args.n:>7} {name:>8} {t:>9.3f} {base / t:>7.1f}x")
        print(f"{p:>3} {args.n:>7} {'lapack':>8} {t_lapack:>9.3f} {base / t_lapack:>7.1f}x")
        if "cython" in results:
            a, b = results["cython"][1], results["numpy"][1]
            same = all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))
            print(f"    backends bit-identical: {same}")


if __name__ == "__main__":
    main()
