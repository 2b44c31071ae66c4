#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure numpy/python fallback.

Run after building the extension (pip install -e .):

    python benchmarks/bench_kernels.py [--quick]

Reports wall time for single-source BFS, all-pairs BFS, and the exact
four-point scan on random sparse graphs, per backend.
"""

import argparse
import time

import numpy as np

from bundlekit._kernels import available_backends
from bundlekit.graph import Graph


def sparse_graph(n, extra, seed=0):
    rng = np.random.default_rng(seed)
    edges = [(i, (i + 1) % n) for i in range(n)]
    seen = set()
    while len(seen) < extra:
        u, v = rng.integers(0, n, 2)
        if u != v:
            seen.add((min(int(u), int(v)), max(int(u), int(v))))
    return Graph.from_edges(edges + sorted(seen), n=n)


def timeit(fn, repeat=1):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.time()
        fn()
        best = min(best, time.time() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="small sizes only")
    args = ap.parse_args()

    backends = available_backends()
    if len(backends) < 2:
        print("note: compiled backend not built; run pip install -e .")
    sizes_ap = [(2000, 4000)] if args.quick else [(2000, 4000),
                                                  (20000, 40000)]
    sizes_4pt = [120] if args.quick else [120, 300]

    print(f"{'task':<28} " + " ".join(f"{nm:>12}" for nm in backends))
    for n, extra in sizes_ap:
        g = sparse_graph(n, extra)
        row = []
        for name, impl in backends.items():
            out = np.zeros((n, n), dtype=np.int16)
            srcs = np.arange(n if name == "c" or n <= 2000 else 200)
            t = timeit(lambda: impl.bfs_many_int16(g.indptr, g.indices,
                                                   srcs, out))
            scale = n / len(srcs)
            row.append(t * scale)
        print(f"{'all-pairs bfs n=' + str(n):<28} "
              + " ".join(f"{t:>11.2f}s" for t in row))
        row = []
        for name, impl in backends.items():
            t = timeit(lambda: impl.bfs_row(g.indptr, g.indices, 0),
                       repeat=3)
            row.append(t * 1000)
        print(f"{'single bfs n=' + str(n):<28} "
              + " ".join(f"{t:>10.2f}ms" for t in row))
    for n in sizes_4pt:
        g = sparse_graph(n, 2 * n, seed=1)
        D = np.ascontiguousarray(g.oracle.all_pairs(), dtype=np.int32)
        row = []
        vals = []
        for name, impl in backends.items():
            t = timeit(lambda: vals.append(impl.four_point_delta2(D)))
            row.append(t)
        print(f"{'four-point n=' + str(n):<28} "
              + " ".join(f"{t:>11.2f}s" for t in row))
        assert len({v[0] for v in vals}) == 1, "backends disagree!"
    print("\nbackends agree on all computed values")


if __name__ == "__main__":
    main()
