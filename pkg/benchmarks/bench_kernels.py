"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-``repeat`` wall times and the speed-up for Herglotz synthesis
and the annulus reduction on the default 512 x 512 grid.
"""
import argparse
import math
import time

import numpy as np

from ifsmap import kernels
from ifsmap.grid import make_grid
from ifsmap.herglotz import make_density, quadrature_for_eps
from ifsmap.norms import dyadic_decomposition


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    g = make_grid(2, math.pi, 512)
    d = make_density(0.05, np.eye(2), quadrature_for_eps(2, 0.05, 64))
    nodes, coeffs = d.support()
    rng = np.random.default_rng(0)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    dec = dyadic_decomposition(g)
    return {
        f"herglotz_sum ({len(coeffs)} nodes)": lambda: kernels.herglotz_sum(g.axis, 64.0, nodes, coeffs),
        "annulus_reduce": lambda: kernels.annulus_reduce(f, dec.labels, dec.nbins),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    previous = kernels.BACKEND
    results = {}
    try:
        for b in backends:
            kernels.use_backend(b)
            for name, fn in cases().items():
                results[name, b] = best_of(fn, args.repeat)
    finally:
        kernels.use_backend(previous)
    names = sorted({k[0] for k in results})
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + "   speed-up")
    for name in names:
        row = "".join(f"{results[name, b] * 1e3:10.2f}ms" for b in backends)
        speed = ""
        if "compiled" in backends:
            speed = f"{results[name, 'python'] / results[name, 'compiled']:9.1f}x"
        print(f"{name:34s}{row}   {speed}")


if __name__ == "__main__":
    main()
