"""Benchmark the compiled split-search kernel against the numpy fallback.

Times best_split on sorted random inputs across sample counts and class
counts, checks that both backends return identical results, and times a
whole tree fit through each kernel.

    python3 benchmarks/bench_split.py [--reps 7] [--sizes 1000 10000 100000]
"""

import argparse
import time

import numpy as np

from costboost import _kernels
from costboost.costs import CostMatrix, extend_cost_matrix
from costboost.dataset import Dataset
from costboost.tree import fit_cost_tree


def make_case(rng, n, k):
    values = np.sort(rng.normal(size=n))
    weights = rng.uniform(0.0, 1.0, size=n)
    weights /= weights.sum()
    costs = np.ascontiguousarray(weights[:, None] * rng.uniform(0.2, 3.0, size=(n, k)))
    return values, weights, costs


def best_of(fn, reps):
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_kernels(backends, sizes, class_counts, reps):
    rng = np.random.default_rng(0)
    print(f"{'n':>8} {'K':>3}", *(f"{name:>12}" for name, _ in backends), f"{'speedup':>9}")
    for n in sizes:
        for k in class_counts:
            values, weights, costs = make_case(rng, n, k)
            results, timings = [], []
            for _name, kernel in backends:
                results.append(kernel.best_split(values, weights, costs, 1e-6))
                timings.append(
                    best_of(lambda kern=kernel: kern.best_split(values, weights, costs, 1e-6), reps)
                )
            assert all(r == results[0] for r in results), "backends disagree"
            row = [f"{t * 1e3:10.3f}ms" for t in timings]
            speedup = timings[0] / timings[-1] if len(timings) > 1 else 1.0
            print(f"{n:>8} {k:>3}", *row, f"{speedup:8.1f}x")


def bench_tree_fit(backends, reps):
    rng = np.random.default_rng(1)
    n, k, d = 20000, 5, 8
    labels = rng.integers(1, k + 1, size=n)
    centers = rng.normal(size=(k, d))
    data = Dataset(
        feature_names=[f"x{i}" for i in range(d)],
        features=centers[labels - 1] + rng.normal(size=(n, d)),
        labels=labels,
        k=k,
    )
    entries = rng.uniform(0.2, 2.0, size=(k, k))
    np.fill_diagonal(entries, 0.0)
    a = extend_cost_matrix(CostMatrix(entries)).a
    weights = np.full(n, 1.0 / n)
    print(f"\ntree fit (n={n}, K={k}, D={d}, depth 6):")
    trees = {}
    for name, kernel in backends:
        t = best_of(
            lambda kern=kernel: fit_cost_tree(data, weights, a, 6, kernel=kern), reps
        )
        trees[name] = fit_cost_tree(data, weights, a, 6, kernel=kernel).to_dict()
        print(f"  {name:>9}: {t * 1e3:9.1f}ms")
    first = next(iter(trees.values()))
    assert all(t == first for t in trees.values()), "backends grew different trees"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=7)
    parser.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    parser.add_argument("--classes", type=int, nargs="+", default=[3, 10])
    args = parser.parse_args()

    backends = [("python", _kernels.backend("python"))]
    try:
        backends.append(("compiled", _kernels.backend("compiled")))
    except ImportError:
        print("compiled kernel not built; benchmarking the fallback alone")

    bench_kernels(backends, args.sizes, args.classes, args.reps)
    bench_tree_fit(backends, args.reps)


if __name__ == "__main__":
    main()
