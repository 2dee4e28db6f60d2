"""Compare the compiled kernels against the pure-Python fallback.

Times the four hot kernels on realistic workloads (Crank-Nicolson heat
steps in 1-D and 2-D, the symmetrized 5-point stencil apply, and the
Jacobi-preconditioned CG solve) and prints a speedup table.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py
"""

import sys
import time

import numpy as np

from isoflow._kernels import fallback
from isoflow.geometry import flat_annulus_metric, perturbed_metric
from isoflow.radial_solver import annulus_problem, discretize
from isoflow.surface_solver import build_surface_grid

try:
    from isoflow._kernels import _core as core
except ImportError:
    core = None


def best_of(fn, repeats):
    """Smallest wall-clock time over `repeats` calls of fn()."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    """Yield (name, args_builder) pairs; each builder returns a no-arg
    callable per backend module."""
    disc = discretize(annulus_problem(), 2048)
    u0 = disc.centers * (disc.centers[-1] - disc.centers)

    def heat_1d(mod):
        return lambda: mod.cn_heat_1d(
            disc.dsym, disc.esym, disc.sqrt_theta, u0, disc.h, 1e-5, 2000,
            disc.left_dirichlet, disc.right_dirichlet)

    metric = perturbed_metric(flat_annulus_metric(), 0.1, 2)
    big = build_surface_grid(metric, 512, 256)
    rng = np.random.default_rng(0)
    w = rng.standard_normal((big.nr, big.nphi))

    def apply_2d(mod):
        def run():
            for _ in range(200):
                mod.apply_sym_2d(big.diag, big.cr, big.cp, w)
        return run

    mid = build_surface_grid(metric, 256, 128)
    rhs = mid.sqrt_theta.copy()
    w0 = np.zeros_like(rhs)

    def pcg(mod):
        return lambda: mod.pcg_sym_2d(mid.diag, mid.cr, mid.cp, 0.0, 1.0,
                                      rhs, w0, 1e-10, 50000)

    small = build_surface_grid(metric, 128, 64)
    ones = np.ones((small.nr, small.nphi))

    def heat_2d(mod):
        return lambda: mod.cn_heat_2d(
            small.diag, small.cr, small.cp, small.sqrt_theta, ones,
            small.h_r, 1e-3, 100, small.metric.dirichlet_min,
            small.metric.dirichlet_max, 1e-10, 50000)

    yield "cn_heat_1d   (n=2048, 2000 steps)", heat_1d
    yield "apply_sym_2d (512x256, 200 calls)", apply_2d
    yield "pcg_sym_2d   (256x128 solve)", pcg
    yield "cn_heat_2d   (128x64, 100 steps)", heat_2d


def main():
    if core is None:
        print("compiled kernels are not available; nothing to compare",
              file=sys.stderr)
        return 1
    header = f"{'kernel':38s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, builder in workloads():
        t_core = best_of(builder(core), 3)
        t_py = best_of(builder(fallback), 3)
        print(f"{name:38s} {t_core:9.4f}s {t_py:9.4f}s {t_py / t_core:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
