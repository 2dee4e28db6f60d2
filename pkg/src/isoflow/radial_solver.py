"""Weighted 1-D problems on an interval: heat flow, exit time, spectrum.

The reduced operator is the geometer's weighted Laplacian
L u = -(1/theta) (theta u')' = -u'' + eta u', discretized by a conservative
cell-centered finite-volume stencil

    (L u)_i = -(1/(theta_i h^2)) [theta_{i+1/2}(u_{i+1}-u_i)
                                  - theta_{i-1/2}(u_i - u_{i-1})].

Dirichlet ends use ghost reflection (ghost = -u_1, face value 0); a
weighted-Neumann or singular-regular end sets the outer face flux to zero
(at a vanishing end the face weight vanishes with the density). The
similarity diag(sqrt(theta_i)) makes the matrix symmetric tridiagonal.

Boundary flux extraction uses the one-sided rule (9 u_1 - u_2)/(3h), which
is exact for quadratics vanishing at the face.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .geometry import TWO_SIDED_SOUL, VANISHING, TubeProfile, leading_coefficient

DIRICHLET = "dirichlet"
WEIGHTED_NEUMANN = "weighted_neumann"
SINGULAR_REGULAR = "singular_regular"

_BC = (DIRICHLET, WEIGHTED_NEUMANN, SINGULAR_REGULAR)


@dataclass(frozen=True)
class WeightedIntervalProblem:
    """Weighted interval [x0, x1] with density `weight` and end conditions.

    For a singular-regular end the fitted leading term
    weight ~ focal_coeff * (x1 - x)^focal_order feeds the endpoint-exact
    quadrature of the exit-time integrals.
    """

    label: str
    x0: float
    x1: float
    weight: Callable
    bc0: str
    bc1: str
    weight_prime: Optional[Callable] = None
    focal_order: Optional[int] = None
    focal_coeff: Optional[float] = None

    def __post_init__(self):
        if not self.x0 < self.x1:
            raise ValueError("need x0 < x1")
        if self.bc0 not in _BC or self.bc1 not in _BC:
            raise ValueError(f"boundary kinds must be one of {_BC}")
        if self.bc0 == SINGULAR_REGULAR:
            raise ValueError("singular end is only supported at x1")
        if self.bc1 == SINGULAR_REGULAR and (
                self.focal_order is None or self.focal_coeff is None):
            raise ValueError("singular-regular end needs focal_order and focal_coeff")

    @property
    def length(self) -> float:
        return self.x1 - self.x0

    def weight_derivative(self, x):
        if self.weight_prime is not None:
            return np.asarray(self.weight_prime(x), dtype=float)
        h = self.length * 1e-5
        return (np.asarray(self.weight(x + h)) - np.asarray(self.weight(x - h))) / (2 * h)


def problem_from_profile(profile: TubeProfile) -> WeightedIntervalProblem:
    """Reduce a tube profile to its weighted interval: Dirichlet at the
    boundary rho = 0, natural condition at the focal end rho = R."""
    if profile.focal.kind == VANISHING:
        d = profile.focal.order
        return WeightedIntervalProblem(
            label=profile.label, x0=0.0, x1=profile.radius, weight=profile.theta,
            weight_prime=profile.theta_prime, bc0=DIRICHLET, bc1=SINGULAR_REGULAR,
            focal_order=d, focal_coeff=leading_coefficient(profile, d))
    return WeightedIntervalProblem(
        label=profile.label, x0=0.0, x1=profile.radius, weight=profile.theta,
        weight_prime=profile.theta_prime, bc0=DIRICHLET, bc1=WEIGHTED_NEUMANN)


def interval_problem(length: float = 2.0) -> WeightedIntervalProblem:
    """Unweighted interval [0, L], Dirichlet at both ends."""
    return WeightedIntervalProblem(
        label="interval-2d", x0=0.0, x1=float(length),
        weight=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        weight_prime=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        bc0=DIRICHLET, bc1=DIRICHLET)


def annulus_problem(r0: float = 1.0, r1: float = 2.0) -> WeightedIntervalProblem:
    """Planar annulus reduced to [r0, r1] with weight x, Dirichlet both ends."""
    if r0 <= 0:
        raise ValueError("inner radius must be positive")
    return WeightedIntervalProblem(
        label="annulus", x0=float(r0), x1=float(r1),
        weight=lambda x: np.asarray(x, dtype=float),
        weight_prime=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        bc0=DIRICHLET, bc1=DIRICHLET)


# ---------------------------------------------------------------------------
# discretization


@dataclass(frozen=True)
class Discretization:
    """Cell-centered finite-volume grid with the symmetrized operator."""

    problem: WeightedIntervalProblem
    n: int
    h: float
    centers: np.ndarray
    theta_c: np.ndarray
    sqrt_theta: np.ndarray
    dsym: np.ndarray
    esym: np.ndarray

    @property
    def left_dirichlet(self) -> bool:
        return self.problem.bc0 == DIRICHLET

    @property
    def right_dirichlet(self) -> bool:
        return self.problem.bc1 == DIRICHLET

    def apply(self, u):
        """L u on cell values (unsymmetrized), for consistency checks."""
        w = self.sqrt_theta * np.asarray(u, dtype=float)
        out = self.dsym * w
        out[:-1] += self.esym * w[1:]
        out[1:] += self.esym * w[:-1]
        return out / self.sqrt_theta


def discretize(problem: WeightedIntervalProblem, n: int) -> Discretization:
    """Assemble the conservative stencil on n cells.

    Dirichlet faces contribute 2*theta_face/(theta_i h^2) to the diagonal
    (ghost = -u_1, so the unweighted boundary diagonal is 3/h^2); a
    non-Dirichlet outer face carries zero flux.
    """
    if n < 4:
        raise ValueError("need at least 4 cells")
    h = problem.length / n
    faces = problem.x0 + h * np.arange(n + 1)
    centers = faces[:-1] + 0.5 * h
    theta_c = np.asarray(problem.weight(centers), dtype=float)
    theta_f = np.asarray(problem.weight(faces), dtype=float)
    if not np.all(theta_c > 0.0):
        raise ValueError("weight must be positive at cell centers")
    if not np.all(theta_f[1:-1] > 0.0):
        raise ValueError("weight must be positive at interior faces")

    # face conductances a_j = theta_{j+1/2}/h^2, j = 0..n (ends per bc)
    a = theta_f / h**2
    if problem.bc0 != DIRICHLET:
        a[0] = 0.0
    if problem.bc1 != DIRICHLET:
        a[-1] = 0.0
    dsym = np.empty(n)
    dsym[:] = a[:-1] + a[1:]
    if problem.bc0 == DIRICHLET:
        dsym[0] = 2.0 * a[0] + a[1]
    if problem.bc1 == DIRICHLET:
        dsym[-1] = a[-2] + 2.0 * a[-1]
    dsym /= theta_c
    esym = -a[1:-1] / np.sqrt(theta_c[:-1] * theta_c[1:])
    return Discretization(problem=problem, n=n, h=h, centers=centers,
                          theta_c=theta_c, sqrt_theta=np.sqrt(theta_c),
                          dsym=dsym, esym=esym)


@dataclass(frozen=True)
class RadialField:
    """Cell values on a radial grid."""

    grid: Discretization
    values: np.ndarray


@dataclass(frozen=True)
class FluxTrace:
    """Inward-normal boundary derivative samples over time.

    samples[m, b] is the flux at time times[m] at boundary sample b; for the
    1-D solver the samples are the Dirichlet ends (x0 first), for the 2-D
    solver the per-angle samples of each Dirichlet ring.
    """

    times: np.ndarray
    samples: np.ndarray
    boundary: tuple

    def spread(self) -> np.ndarray:
        """max - min over boundary samples at each recorded time."""
        return self.samples.max(axis=1) - self.samples.min(axis=1)

    def at_time(self, t: float) -> np.ndarray:
        m = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[m] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} not on the recorded grid")
        return self.samples[m]


def solve_radial_heat(disc: Discretization, T: float, dt: Optional[float] = None,
                      u0=None):
    """Crank-Nicolson heat flow du/dt = -L u from u0 (default 1) to time T.

    Returns (RadialField at T, FluxTrace at every step). Flux is recorded at
    each Dirichlet end at t = dt, 2 dt, ..., T.
    """
    if T <= 0:
        raise ValueError("final time must be positive")
    if dt is None:
        dt = T / 2000.0
    if dt > disc.problem.length**2 / 4.0:
        raise ValueError("time step too large for the interval (dt > L^2/4)")
    nsteps = max(1, int(round(T / dt)))
    dt = T / nsteps
    if u0 is None:
        u0 = np.ones(disc.n)
    elif callable(u0):
        u0 = np.asarray(u0(disc.centers), dtype=float)
    else:
        u0 = np.asarray(u0, dtype=float)
        if u0.shape != (disc.n,):
            raise ValueError("u0 has wrong shape")

    u, flux = _kernels.cn_heat_1d(disc.dsym, disc.esym, disc.sqrt_theta, u0,
                                  disc.h, dt, nsteps,
                                  disc.left_dirichlet, disc.right_dirichlet)
    ends = tuple(lbl for lbl, on in (("x0", disc.left_dirichlet),
                                     ("x1", disc.right_dirichlet)) if on)
    times = dt * np.arange(1, nsteps + 1)
    return RadialField(disc, u), FluxTrace(times=times, samples=flux, boundary=ends)


# ---------------------------------------------------------------------------
# exit time


_GL_NODES, _GL_WEIGHTS = leggauss(16)


def _gl_integrate(fn, lo, hi):
    """16-point Gauss-Legendre of fn over [lo, hi] (arrays broadcast over lo/hi)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[..., None] + half[..., None] * _GL_NODES
    return half * np.sum(_GL_WEIGHTS * fn(nodes), axis=-1)


class _ExitQuadrature:
    """Nested quadrature for psi'(s) = (int_s^x1 theta)/theta(s).

    Composite 16-point Gauss-Legendre per cell; on the last cell of a
    singular-regular problem theta is replaced by its fitted leading term
    c (x1 - s)^d, for which the tail integral is analytic.
    """

    def __init__(self, problem: WeightedIntervalProblem, cells: int = 512):
        if problem.bc1 == DIRICHLET:
            raise ValueError("quadrature route requires a natural end at x1")
        self.p = problem
        self.q = cells
        self.edges = np.linspace(problem.x0, problem.x1, cells + 1)
        self.singular = problem.bc1 == SINGULAR_REGULAR
        cell_int = _gl_integrate(self._theta, self.edges[:-1], self.edges[1:])
        if self.singular:
            c, d = problem.focal_coeff, problem.focal_order
            cell_int[-1] = c * (problem.x1 - self.edges[-2])**(d + 1) / (d + 1)
        # suffix[j] = int_{e_j}^{x1} theta
        self.suffix = np.concatenate([np.cumsum(cell_int[::-1])[::-1], [0.0]])
        self._prefix = None

    def _theta(self, s):
        th = np.asarray(self.p.weight(s), dtype=float)
        if self.singular:
            inside = s >= self.edges[-2]
            if np.any(inside):
                c, d = self.p.focal_coeff, self.p.focal_order
                th = np.where(inside, c * np.maximum(self.p.x1 - s, 0.0)**d, th)
        return th

    def tail(self, s):
        """int_s^{x1} theta, endpoint-exact at a singular end."""
        s = np.asarray(s, dtype=float)
        j = np.minimum((np.searchsorted(self.edges, s, side="right") - 1), self.q - 1)
        out = self.suffix[j + 1] + _gl_integrate(self._theta, s, self.edges[j + 1])
        if self.singular:
            c, d = self.p.focal_coeff, self.p.focal_order
            inside = s >= self.edges[-2]
            out = np.where(inside, c * np.maximum(self.p.x1 - s, 0.0)**(d + 1) / (d + 1), out)
        return out

    def psi_prime(self, s):
        return self.tail(s) / self._theta(np.asarray(s, dtype=float))

    def psi(self, targets):
        """psi(t) = int_{x0}^t psi', via per-cell quadrature plus a partial cell."""
        if self._prefix is None:
            cell = _gl_integrate(self.psi_prime, self.edges[:-1], self.edges[1:])
            self._prefix = np.concatenate([[0.0], np.cumsum(cell)])
        t = np.asarray(targets, dtype=float)
        j = np.minimum((np.searchsorted(self.edges, t, side="right") - 1), self.q - 1)
        return self._prefix[j] + _gl_integrate(self.psi_prime, self.edges[j], t)


@dataclass(frozen=True)
class ExitTimeResult:
    """Mean exit time psi with boundary data.

    boundary_derivatives holds the inward-normal derivative at each Dirichlet
    end; psi_end is the maximal value (at the far end for tube profiles).
    """

    field: RadialField
    psi_end: float
    boundary_derivatives: dict


def solve_exit_time(problem: WeightedIntervalProblem, n: int = 512) -> ExitTimeResult:
    """Solve the mean exit time problem L psi = 1, psi = 0 on Dirichlet ends.

    Tube problems (natural end at x1) integrate the closed form
    psi'(s) = (int_s^x1 theta)/theta(s); two-Dirichlet problems solve the
    discrete system directly.
    """
    disc = discretize(problem, n)
    if problem.bc1 != DIRICHLET:
        quad = _ExitQuadrature(problem, cells=max(n, 64))
        values = quad.psi(disc.centers)
        psi_end = float(quad.psi(problem.x1))
        deriv = {"x0": float(quad.psi_prime(problem.x0))}
        return ExitTimeResult(field=RadialField(disc, values), psi_end=psi_end,
                              boundary_derivatives=deriv)

    # direct ODE integration: (theta v')(x) = B - int_{x0}^x theta, with the
    # constant B fixed by v(x1) = 0
    edges = np.linspace(problem.x0, problem.x1, max(n, 64) + 1)
    theta = lambda s: np.asarray(problem.weight(s), dtype=float)  # noqa: E731
    cell_theta = _gl_integrate(theta, edges[:-1], edges[1:])
    prefix_theta = np.concatenate([[0.0], np.cumsum(cell_theta)])

    def accumulated(s):
        s = np.asarray(s, dtype=float)
        j = np.minimum(np.searchsorted(edges, s, side="right") - 1, len(edges) - 2)
        return prefix_theta[j] + _gl_integrate(theta, edges[j], s)

    int_inv = np.sum(_gl_integrate(lambda s: 1.0 / theta(s), edges[:-1], edges[1:]))
    int_acc = np.sum(_gl_integrate(lambda s: accumulated(s) / theta(s),
                                   edges[:-1], edges[1:]))
    B = int_acc / int_inv

    def v_prime(s):
        return (B - accumulated(s)) / theta(s)

    cell_v = _gl_integrate(v_prime, edges[:-1], edges[1:])
    prefix_v = np.concatenate([[0.0], np.cumsum(cell_v)])

    def v_of(t):
        t = np.asarray(t, dtype=float)
        j = np.minimum(np.searchsorted(edges, t, side="right") - 1, len(edges) - 2)
        return prefix_v[j] + _gl_integrate(v_prime, edges[j], t)

    v = v_of(disc.centers)
    total = prefix_theta[-1]
    deriv = {"x0": float(B / theta(problem.x0)),
             "x1": float((total - B) / theta(problem.x1))}
    return ExitTimeResult(field=RadialField(disc, v), psi_end=float(np.max(v)),
                          boundary_derivatives=deriv)


@dataclass(frozen=True)
class CurvatureLimitResult:
    """Richardson-extrapolated limit of psi'' at the focal end.

    For theta ~ c (x1 - x)^d the limit is -1/(d+1); samples hold psi'' at
    offsets x1 - {eps, 2 eps, 4 eps}.
    """

    value: float
    offsets: np.ndarray
    samples: np.ndarray


def exit_time_curvature_limit(problem: WeightedIntervalProblem,
                              eps: Optional[float] = None) -> CurvatureLimitResult:
    """Limit of psi''(x) as x -> x1 via the identity psi'' = eta psi' - 1.

    Evaluated at three nested offsets and Richardson-extrapolated to zero
    offset (quadratic through the samples, first-order error assumed).
    """
    if problem.bc1 == DIRICHLET:
        raise ValueError("curvature limit requires a natural end at x1")
    L = problem.length
    eps = L / 64.0 if eps is None else float(eps)
    if not 0.0 < 4.0 * eps < L:
        raise ValueError("offsets must stay inside the interval")
    offsets = np.array([eps, 2.0 * eps, 4.0 * eps])
    quad = _ExitQuadrature(problem)
    x = problem.x1 - offsets
    th = np.asarray(problem.weight(x), dtype=float)
    eta = -problem.weight_derivative(x) / th
    samples = eta * quad.psi_prime(x) - 1.0
    # quadratic through (offsets, samples) evaluated at 0
    value = float(np.polyfit(offsets, samples, 2)[-1])
    return CurvatureLimitResult(value=value, offsets=offsets, samples=samples)


# ---------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest Dirichlet eigenvalues with boundary flux witnesses.

    modes[k] is L2(theta)-normalized; boundary_flux[k] holds the inward
    derivative at each Dirichlet end (order x0, x1).
    """

    lambdas: np.ndarray
    modes: np.ndarray
    boundary_flux: np.ndarray
    boundary: tuple
    simple: bool


def radial_dirichlet_spectrum(disc: Discretization, k: int) -> SpectrumResult:
    """Lowest k eigenvalues of the discrete weighted Laplacian.

    Bisection (Sturm sequences) on the symmetric tridiagonal form, then
    inverse iteration for the eigenvectors; warns when a gap falls below
    1e-10 (witness signs are then convention-dependent).
    """
    if not 1 <= k <= disc.n:
        raise ValueError("need 1 <= k <= number of cells")
    lam, vec = eigh_tridiagonal(disc.dsym, disc.esym, select="i",
                                select_range=(0, k - 1), lapack_driver="stebz",
                                tol=0.0)
    modes = (vec / disc.sqrt_theta[:, None]).T / math.sqrt(disc.h)
    h = disc.h
    ends = []
    flux = []
    if disc.left_dirichlet:
        ends.append("x0")
        flux.append((9.0 * modes[:, 0] - modes[:, 1]) / (3.0 * h))
    if disc.right_dirichlet:
        ends.append("x1")
        flux.append((9.0 * modes[:, -1] - modes[:, -2]) / (3.0 * h))
    flux = np.stack(flux, axis=1) if flux else np.zeros((k, 0))

    # sign convention: positive flux at the first Dirichlet end
    for i in range(k):
        s = flux[i, 0] if flux.shape[1] else modes[i, 0]
        if s < 0:
            modes[i] *= -1.0
            flux[i] *= -1.0

    gaps = np.diff(lam)
    simple = bool(np.all(gaps > 1e-10)) if k > 1 else True
    if not simple:
        warnings.warn("near-degenerate eigenvalues: flux witnesses are "
                      "basis-dependent", stacklevel=2)
    return SpectrumResult(lambdas=lam, modes=modes, boundary_flux=flux,
                          boundary=tuple(ends), simple=simple)
