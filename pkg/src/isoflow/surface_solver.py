"""Solvers on revolution surfaces dr^2 + theta(r, phi)^2 dphi^2.

The Laplace-Beltrami operator in conservative form,

    L f = -(1/theta) [ d_r(theta d_r f) + d_phi((1/theta) d_phi f) ],

is discretized on a tensor grid (cell-centered in r, periodic in phi) with
face-evaluated coefficients, so it is self-adjoint in the measure
theta h_r h_phi and reduces to -(1/theta) d_r(theta d_r f)
- (1/theta^2) d^2_phi f when theta is radial. Dirichlet rings use ghost
reflection; a non-Dirichlet r-end is a zero-flux face (excised pole).

The radialization A averages over rings with weight theta; on radial
metrics the weights per ring are equal and an unweighted mean is used, so
radial functions are exact fixed points and [L, A] vanishes identically.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .geometry import RevolutionMetric
from .radial_solver import FluxTrace


@dataclass(frozen=True)
class SurfaceGrid:
    """Tensor grid with the conservative stencil of the surface Laplacian."""

    metric: RevolutionMetric
    nr: int
    nphi: int
    h_r: float
    h_phi: float
    r: np.ndarray
    phi: np.ndarray
    theta: np.ndarray       # (nr, nphi) at nodes
    ar: np.ndarray          # (nr+1, nphi) theta/h_r^2 at r-faces, bc-adjusted
    ap: np.ndarray          # (nr, nphi) 1/(theta h_phi^2) at phi-faces j -> j+1
    diag: np.ndarray        # symmetrized stencil for the kernels
    cr: np.ndarray
    cp: np.ndarray
    sqrt_theta: np.ndarray

    @property
    def cell_measure(self) -> np.ndarray:
        return self.theta * self.h_r * self.h_phi

    def total_measure(self) -> float:
        return float(np.sum(self.cell_measure))


def build_surface_grid(metric: RevolutionMetric, nr: int, nphi: int) -> SurfaceGrid:
    """Assemble the stencil on nr x nphi cells."""
    if nr < 4 or nphi < 4:
        raise ValueError("need at least 4 cells per direction")
    h_r = (metric.r_max - metric.r_min) / nr
    h_phi = 2.0 * math.pi / nphi
    r = metric.r_min + h_r * (np.arange(nr) + 0.5)
    phi = h_phi * np.arange(nphi)
    rfaces = metric.r_min + h_r * np.arange(nr + 1)
    pfaces = phi + 0.5 * h_phi

    theta = metric.theta2d(r[:, None], phi[None, :])
    theta_rf = metric.theta2d(rfaces[:, None], phi[None, :])
    theta_pf = metric.theta2d(r[:, None], pfaces[None, :])
    if not (np.all(theta > 0) and np.all(theta_pf > 0)):
        raise ValueError("theta must be positive on the grid")

    ar = theta_rf / h_r**2
    if not metric.dirichlet_min:
        ar[0, :] = 0.0
    if not metric.dirichlet_max:
        ar[-1, :] = 0.0
    ap = 1.0 / (theta_pf * h_phi**2)

    diag = ar[1:, :] + ar[:-1, :] + ap + np.roll(ap, 1, axis=1)
    if metric.dirichlet_min:
        diag[0, :] += ar[0, :]
    if metric.dirichlet_max:
        diag[-1, :] += ar[-1, :]
    diag /= theta
    cr = ar[1:-1, :] / np.sqrt(theta[:-1, :] * theta[1:, :])
    cp = ap / np.sqrt(theta * np.roll(theta, -1, axis=1))
    return SurfaceGrid(metric=metric, nr=nr, nphi=nphi, h_r=h_r, h_phi=h_phi,
                       r=r, phi=phi, theta=theta, ar=ar, ap=ap, diag=diag,
                       cr=cr, cp=cp, sqrt_theta=np.sqrt(theta))


@dataclass(frozen=True)
class SurfaceField:
    grid: SurfaceGrid
    values: np.ndarray


def laplace_beltrami_apply(grid: SurfaceGrid, f) -> np.ndarray:
    """L f at every cell (ghost reflection at Dirichlet rings)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.nr, grid.nphi):
        raise ValueError("field has wrong shape")
    w = grid.sqrt_theta * f
    out = _kernels.apply_sym_2d(grid.diag, grid.cr, grid.cp, w)
    return out / grid.sqrt_theta


def _ring_mean(f: np.ndarray) -> np.ndarray:
    """Mean over axis 1 by successive pairwise halving.

    Each stage averages adjacent pairs with an exact *0.5, so fields that are
    already constant along a ring are reproduced bit for bit whenever the
    ring size is a power of two.
    """
    m = f
    while m.shape[1] > 1 and m.shape[1] % 2 == 0:
        m = 0.5 * (m[:, ::2] + m[:, 1::2])
    if m.shape[1] > 1:
        m = np.mean(m, axis=1, keepdims=True)
    return m[:, 0]


def radialize(grid: SurfaceGrid, f) -> np.ndarray:
    """Ring average with weight theta (exact pairwise mean on radial metrics,
    where the ring weights are equal)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.nr, grid.nphi):
        raise ValueError("field has wrong shape")
    if grid.metric.is_radial:
        avg = _ring_mean(f)
    else:
        avg = np.sum(f * grid.theta, axis=1) / np.sum(grid.theta, axis=1)
    return np.repeat(avg[:, None], grid.nphi, axis=1)


@dataclass(frozen=True)
class CommutationResult:
    """Sup norm of [L, A] f = L(A f) - A(L f)."""

    residual: float
    field: np.ndarray


def commutation_residual(grid: SurfaceGrid, f) -> CommutationResult:
    """Commutator of the Laplacian with the radialization on a test field."""
    f = np.asarray(f, dtype=float)
    lhs = laplace_beltrami_apply(grid, radialize(grid, f))
    rhs = radialize(grid, laplace_beltrami_apply(grid, f))
    field = lhs - rhs
    return CommutationResult(residual=float(np.max(np.abs(field))), field=field)


@dataclass(frozen=True)
class LevelIdentityResult:
    """Discrete check of d/dr (ring integral of f) = ring integral of
    (d_r f - f * Lrho), with Lrho = -d_r theta / theta."""

    r: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: float


def level_derivative_check(grid: SurfaceGrid, f) -> LevelIdentityResult:
    """Compare the r-derivative of ring integrals with the coarea identity
    at interior rings (central differences in r)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.nr, grid.nphi):
        raise ValueError("field has wrong shape")
    ring = np.sum(f * grid.theta, axis=1) * grid.h_phi
    lhs = (ring[2:] - ring[:-2]) / (2.0 * grid.h_r)
    df = (f[2:, :] - f[:-2, :]) / (2.0 * grid.h_r)
    dtheta = (grid.theta[2:, :] - grid.theta[:-2, :]) / (2.0 * grid.h_r)
    lrho = -dtheta / grid.theta[1:-1, :]
    rhs = np.sum((df - f[1:-1, :] * lrho) * grid.theta[1:-1, :], axis=1) * grid.h_phi
    return LevelIdentityResult(r=grid.r[1:-1], lhs=lhs, rhs=rhs,
                               residual=float(np.max(np.abs(lhs - rhs))))


def _flux_boundary(grid: SurfaceGrid) -> tuple:
    return tuple(lbl for lbl, on in (("r_min", grid.metric.dirichlet_min),
                                     ("r_max", grid.metric.dirichlet_max)) if on)


def solve_heat_2d(grid: SurfaceGrid, T: float, dt: Optional[float] = None,
                  u0=None, cg_tol: float = 1e-10):
    """Crank-Nicolson heat flow on the surface from u0 (default 1).

    Implicit solves use Jacobi-preconditioned CG on the symmetrized form,
    warm-started from the previous step. Returns (SurfaceField at T,
    FluxTrace with the Nphi per-angle samples of each Dirichlet ring).
    """
    if T <= 0:
        raise ValueError("final time must be positive")
    if dt is None:
        dt = T / 2000.0
    nsteps = max(1, int(round(T / dt)))
    dt = T / nsteps
    if u0 is None:
        u0 = np.ones((grid.nr, grid.nphi))
    else:
        u0 = np.asarray(u0, dtype=float)
        if u0.shape != (grid.nr, grid.nphi):
            raise ValueError("u0 has wrong shape")
    u, flux = _kernels.cn_heat_2d(grid.diag, grid.cr, grid.cp, grid.sqrt_theta,
                                  u0, grid.h_r, dt, nsteps,
                                  grid.metric.dirichlet_min, grid.metric.dirichlet_max,
                                  cg_tol, 100 * grid.nr * grid.nphi)
    times = dt * np.arange(1, nsteps + 1)
    return (SurfaceField(grid, u),
            FluxTrace(times=times, samples=flux, boundary=_flux_boundary(grid)))


@dataclass(frozen=True)
class ExitTime2DResult:
    """Mean exit time on the surface with the overdetermined-boundary data.

    serrin_deviation is max - min of the inward normal derivative over all
    Dirichlet boundary samples (all rings pooled); argmax_r is the radius of
    the cell where the exit time peaks.
    """

    field: SurfaceField
    serrin_deviation: float
    argmax_r: float
    boundary_flux: dict
    iterations: int


def exit_time_2d(grid: SurfaceGrid, cg_tol: float = 1e-10) -> ExitTime2DResult:
    """Solve L v = 1 with v = 0 on the Dirichlet rings (PCG, Jacobi)."""
    rhs = grid.sqrt_theta.copy()
    w0 = np.zeros_like(rhs)
    w, iters = _kernels.pcg_sym_2d(grid.diag, grid.cr, grid.cp, 0.0, 1.0,
                                   rhs, w0, cg_tol, 100 * grid.nr * grid.nphi)
    v = w / grid.sqrt_theta
    h = grid.h_r
    flux = {}
    if grid.metric.dirichlet_min:
        flux["r_min"] = (9.0 * v[0, :] - v[1, :]) / (3.0 * h)
    if grid.metric.dirichlet_max:
        flux["r_max"] = (9.0 * v[-1, :] - v[-2, :]) / (3.0 * h)
    pooled = np.concatenate(list(flux.values()))
    imax = np.unravel_index(int(np.argmax(v)), v.shape)
    return ExitTime2DResult(field=SurfaceField(grid, v),
                            serrin_deviation=float(pooled.max() - pooled.min()),
                            argmax_r=float(grid.r[imax[0]]),
                            boundary_flux=flux, iterations=iters)
