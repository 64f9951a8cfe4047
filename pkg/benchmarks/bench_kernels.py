"""Timing comparison of the compiled and NumPy kernel backends.

Run:  python benchmarks/bench_kernels.py [--repeat 5]

Covers each hot kernel at working sizes plus one end-to-end pipeline
(generate a moving-maximum path, block maxima, threshold count) that
mirrors the extremal-index sweep.
"""

import argparse
import time

import numpy as np

from extclust import kernels
from extclust.models import ModelSpec, generate
from extclust.empirics import BlockScheme
from extclust.clusters import estimate_theta


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_backend(mod, repeat):
    rng = np.random.default_rng(0)
    z = rng.random(1_000_000)
    z2 = np.ascontiguousarray(rng.random(200_000))
    c = np.array([0.3, 1.0, 0.7])
    poly1 = np.ascontiguousarray(np.cumsum(rng.random((1000, 2)), axis=0))
    poly2 = np.ascontiguousarray(np.cumsum(rng.random((1000, 2)), axis=0))
    a = rng.standard_normal((800, 800))
    a = a + a.T
    b = rng.standard_normal((800, 800))
    b = b + b.T
    perms = np.stack([rng.permutation(800) for _ in range(20)]).astype(np.int64)

    rows = {}
    rows["ar1_path (1e6)"] = best_of(lambda: mod.ar1_path(z, 0.7), repeat)
    rows["moving_max_path (1e6, m=2)"] = best_of(lambda: mod.moving_max_path(z, c), repeat)
    rows["block_maxima (1e6, r=317)"] = best_of(lambda: mod.block_maxima(z, 317), repeat)
    rows["running_max (2e5)"] = best_of(lambda: mod.running_max(z2), repeat)
    rows["frechet_distance (1000x1000)"] = best_of(lambda: mod.frechet_distance(poly1, poly2), repeat)
    rows["dcov_permutation_stats (800^2 x 20)"] = best_of(
        lambda: mod.dcov_permutation_stats(a, b, perms), repeat
    )
    return rows


def bench_pipeline(repeat):
    from dataclasses import replace

    spec = ModelSpec(kind="moving-maximum", alpha=1.0, c=(1.0, 1.0), seed=1)
    scheme = BlockScheme.for_length(100_000)

    def sweep():
        paths = [generate(replace(spec, seed=r), 100_000) for r in range(40)]
        estimate_theta(paths, scheme)

    return best_of(sweep, repeat)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = kernels.available_backends()
    results = {name: bench_backend(kernels.backend_module(name), args.repeat) for name in backends}

    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for key in results[backends[0]]:
        line = f"{key:<{width}}  " + "  ".join(f"{results[b][key] * 1e3:8.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"  {results[backends[1]][key] / results[backends[0]][key]:7.1f}x"
        print(line)
    print(f"\nactive backend: {kernels.BACKEND}")
    print(f"theta sweep, 40 paths of n=1e5 (active backend): {bench_pipeline(args.repeat) * 1e3:.0f}ms")


if __name__ == "__main__":
    main()
