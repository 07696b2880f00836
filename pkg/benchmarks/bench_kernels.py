"""Compiled kernel vs numpy fallback on the sum-pmf hot path.

Times ``sum_pmf`` (and the Poisson-MRF pgf) for chains and random trees of
growing size with each available backend, checks that both give the same
pmf, and prints one row per case.

    python benchmarks/bench_kernels.py [--sizes 100 1000 10000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from treeising import distribution, pgf
from treeising.model import MeanParamIsing
from treeising.poisson import MpmrfModel, mpmrf_sum_pgf
from treeising.tree import chain, random_tree


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def models(sizes, seed):
    rng = np.random.default_rng(seed)
    for d in sizes:
        yield f"chain d={d}", MeanParamIsing.on(chain(d), 0.01, 0.7)
        yield f"random d={d}", MeanParamIsing.on(random_tree(d, rng), 0.01, 0.7)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 4000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    backends = pgf.available_backends()
    print(f"backends: {', '.join(backends)} (default {pgf.BACKEND})")
    header = f"{'case':<18}{'n':>8}" + "".join(f"{b + ' [s]':>16}" for b in backends) + f"{'speedup':>10}{'max diff':>12}"
    print(header)
    for name, m in models(args.sizes, args.seed):
        pgf.plan(m)  # exclude schedule construction
        n = distribution.default_n(m.d)
        times, pmfs = {}, {}
        for b in backends:
            times[b], p = best_of(lambda: distribution.sum_pmf(m, backend=b), args.repeat)
            pmfs[b] = p.values
        diff = max(float(np.abs(pmfs[b] - pmfs[backends[0]]).max()) for b in backends)
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{name:<18}{n:>8}" + "".join(f"{times[b]:>16.4f}" for b in backends) + f"{speed:>10.1f}{diff:>12.1e}")

    print()
    print("poisson-MRF sum pgf, 4097 nodes")
    nodes = np.exp(-2j * np.pi * np.arange(4097) / 8192)
    for d in args.sizes:
        mp = MpmrfModel.on(chain(d), 0.01, 0.7)
        row = f"{'chain d=' + str(d):<18}{4097:>8}"
        vals = []
        for b in backends:
            t, v = best_of(lambda: mpmrf_sum_pgf(mp, nodes, backend=b), args.repeat)
            vals.append(v)
            row += f"{t:>16.4f}"
        print(row + f"{'':>10}{max(float(np.abs(v - vals[0]).max()) for v in vals):>12.1e}")


if __name__ == "__main__":
    main()
