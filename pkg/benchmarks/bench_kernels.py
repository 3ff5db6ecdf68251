"""Time each hot kernel under both backends.

    python benchmarks/bench_kernels.py [--d 14] [--repeat 3]
"""

import argparse
import time

import numpy as np

from cubeperc import kernels
from cubeperc.components import label_components
from cubeperc.graph import ComponentGraph
from cubeperc.percolation import PercolationSample, canonical_edges


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(d):
    s = PercolationSample.make(d, 2.0, 1)
    args = s.kernel_args()
    lower, coord = canonical_edges(d)
    idx = (lower * d + coord).astype(np.uint64)
    lab = label_components(s)
    g = ComponentGraph.from_sample(s, lab.giant_vertices())
    inv = 1.0 / (2.0 * g.degrees)
    mu = np.zeros((g.m, 8))
    mu[np.arange(8), np.arange(8)] = 1.0
    src = np.arange(32, dtype=np.int32)
    root = int(g.vertices[0])
    return {
        "edge_draws (all edges)": lambda: kernels.edge_draws(s.seed, idx),
        "label_components": lambda: kernels.label_components(*args),
        "explore (giant)": lambda: kernels.explore(*args, root, 0),
        "oracle_distance 0->1": lambda: kernels.oracle_distance(*args, 0, (1 << d) - 1, 5 * d),
        "eccentricities x32": lambda: kernels.eccentricities(g.indptr, g.indices, src),
        "lazy_step x100 (8 starts)": lambda: [kernels.lazy_step(g.indptr, g.indices, inv, mu) for _ in range(100)],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available()
    results = {}
    for b in backends:
        kernels.use(b)
        for name, fn in cases(args.d).items():
            results.setdefault(name, {})[b] = best_of(fn, args.repeat)
    print(f"d={args.d}, best of {args.repeat}, seconds")
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, row in results.items():
        line = f"{name:28s}" + "".join(f"{row[b]:12.4f}" for b in backends)
        if len(backends) > 1:
            line += f"{row['python'] / row['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
