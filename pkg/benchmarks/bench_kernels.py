"""Compare the numba and numpy kernel backends on representative workloads.

Usage: python benchmarks/bench_kernels.py [--triples N] [--fields M] [--repeat R]
"""
import argparse
import math
import time

import numpy as np

from dualconn import _kernels


def _best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _triples(n, g):
    xm = np.sqrt(g.exponential(size=n) / (math.pi * 1.47e-5))
    x1 = np.sqrt(g.exponential(size=n) / (math.pi * 7.35e-5))
    x2 = np.sqrt(g.exponential(size=n) / (math.pi * 7.35e-5))
    return xm, x1, x2


def _bank(m, g, intensity=8.82e-5, r_cut=1683.0):
    counts = g.poisson(intensity * math.pi * r_cut**2, m)
    total = int(counts.sum())
    return counts, 1.0 - g.random(total), g.standard_exponential(total), r_cut * r_cut


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--triples", type=int, default=2_000_000)
    ap.add_argument("--fields", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    g = np.random.default_rng(0)
    root_eta = 10**0.325

    t = _triples(args.triples, g)
    counts, u, h, r2 = _bank(args.fields, g)
    excl = g.uniform(0, 1e4, args.fields)

    cases = [
        ("classify", lambda: _kernels.classify_codes_numpy(*t, root_eta),
         lambda: _kernels.classify_codes_numba(*t, root_eta), args.triples),
        ("interference", lambda: _kernels.aggregate_interference_numpy(counts, u, h, r2, 2.0),
         lambda: _kernels.aggregate_interference_numba(counts, u, h, r2, 2.0), args.fields),
        ("interference+excl", lambda: _kernels.aggregate_interference_numpy(counts, u, h, r2, 2.0, excl),
         lambda: _kernels.aggregate_interference_numba(counts, u, h, r2, 2.0, excl), args.fields),
    ]
    print(f"active backend: {_kernels.BACKEND}; interferers per field ~ {counts.mean():.0f}")
    print(f"{'kernel':<20}{'items':>10}{'numpy s':>11}{'numba s':>11}{'speedup':>9}  match")
    for name, np_fn, nb_fn, items in cases:
        t_np, a = _best_of(np_fn, args.repeat)
        if not _kernels.HAVE_NUMBA:
            print(f"{name:<20}{items:>10}{t_np:>11.4f}{'n/a':>11}{'n/a':>9}  -")
            continue
        nb_fn()  # compile outside the timing
        t_nb, b = _best_of(nb_fn, args.repeat)
        same = np.array_equal(a, b) if a.dtype.kind == "i" else np.allclose(a, b, rtol=1e-12)
        print(f"{name:<20}{items:>10}{t_np:>11.4f}{t_nb:>11.4f}{t_np / t_nb:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
