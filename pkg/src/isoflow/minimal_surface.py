"""Free-boundary surfaces in the unit ball and the harmonic-domain check.

For a surface with boundary on the unit sphere, the position potential
f = (1 - |x|^2)/4 satisfies Delta f = 1 (geometer's sign) exactly when the
surface is minimal, and the inward conormal derivative on the boundary is
1/2 exactly when the surface meets the sphere orthogonally. Both are
verified discretely on orthogonal revolution-type charts; a spherical cap
patch that is neither minimal nor orthogonal serves as the negative
control.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class ParametricSurface:
    """Orthogonal chart (u, v) -> R^3 with F = 0 and E, G functions of u.

    v runs over [0, 2 pi) periodically. free_min/free_max flag which u-ends
    lie on the unit sphere (free boundary); a non-free end must be a chart
    pole where the area weight sqrt(E G) vanishes.
    """

    label: str
    u0: float
    u1: float
    E: Callable
    G: Callable
    chart: Callable          # chart(u, v) -> array (..., 3)
    chart_u: Callable        # analytic d(chart)/du, same shape
    free_min: bool
    free_max: bool

    def __post_init__(self):
        if not self.u0 < self.u1:
            raise ValueError("need u0 < u1")
        u = np.linspace(self.u0, self.u1, 129)[1:-1]
        if not np.all(np.asarray(self.E(u), dtype=float) > 0):
            raise ValueError("E must be positive inside the chart")
        if not np.all(np.asarray(self.G(u), dtype=float) > 0):
            raise ValueError("immersion requires E G > 0 inside the chart")
        for end, free in ((self.u0, self.free_min), (self.u1, self.free_max)):
            x = np.asarray(self.chart(end, np.linspace(0, 2 * math.pi, 17)))
            radii = np.linalg.norm(x, axis=-1)
            if free:
                if np.max(np.abs(radii - 1.0)) > 1e-10:
                    raise ValueError("free boundary must lie on the unit sphere")
            else:
                w = math.sqrt(float(self.E(end)) * abs(float(self.G(end))))
                if w > 1e-12:
                    raise ValueError("a non-free end must be a chart pole")

    def weight(self, u):
        return np.sqrt(np.asarray(self.E(u), dtype=float)
                       * np.asarray(self.G(u), dtype=float))


def make_flat_disk() -> ParametricSurface:
    """Equatorial unit disk in polar coordinates (minimal, orthogonal)."""
    def chart(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([u * np.cos(v), u * np.sin(v), np.zeros_like(u)], axis=-1)

    def chart_u(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([np.cos(v), np.sin(v), np.zeros_like(u)], axis=-1)

    return ParametricSurface(label="flat-disk", u0=0.0, u1=1.0,
                             E=lambda u: np.ones_like(np.asarray(u, float)),
                             G=lambda u: np.asarray(u, float) ** 2,
                             chart=chart, chart_u=chart_u,
                             free_min=False, free_max=True)


def make_critical_catenoid() -> ParametricSurface:
    """Catenoid scaled so both boundary circles lie on the unit sphere and
    meet it orthogonally; the scale comes from the root of t tanh t = 1."""
    t0 = brentq(lambda t: t * math.tanh(t) - 1.0, 1.0, 1.5, xtol=1e-15)
    a = 1.0 / (t0 * math.cosh(t0))

    def chart(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return a * np.stack([np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v), u],
                            axis=-1)

    def chart_u(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return a * np.stack([np.sinh(u) * np.cos(v), np.sinh(u) * np.sin(v),
                             np.ones_like(u)], axis=-1)

    conf = lambda u: a ** 2 * np.cosh(np.asarray(u, float)) ** 2
    return ParametricSurface(label="critical-catenoid", u0=-t0, u1=t0,
                             E=conf, G=conf, chart=chart, chart_u=chart_u,
                             free_min=True, free_max=True)


def make_spherical_cap_control(rho: float = 0.7, height: float = 0.5) -> ParametricSurface:
    """Spherical cap patch with boundary on the unit sphere: a surface that
    is neither minimal nor orthogonal to the sphere (negative control)."""
    cos_ub = (rho ** 2 + height ** 2 - 1.0) / (2.0 * height * rho)
    if not -1.0 < cos_ub < 1.0:
        raise ValueError("cap does not reach the unit sphere")
    ub = math.acos(cos_ub)

    def chart(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([rho * np.sin(u) * np.cos(v), rho * np.sin(u) * np.sin(v),
                         height - rho * np.cos(u)], axis=-1)

    def chart_u(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return rho * np.stack([np.cos(u) * np.cos(v), np.cos(u) * np.sin(v),
                               np.sin(u)], axis=-1)

    return ParametricSurface(label="cap-control", u0=0.0, u1=ub,
                             E=lambda u: np.full_like(np.asarray(u, float), rho ** 2),
                             G=lambda u: (rho * np.sin(np.asarray(u, float))) ** 2,
                             chart=chart, chart_u=chart_u,
                             free_min=False, free_max=True)


def position_potential(surface: ParametricSurface, u, v) -> np.ndarray:
    """f = (1 - |x|^2)/4, the potential whose Laplacian tests minimality."""
    x = np.asarray(surface.chart(u, v))
    return (1.0 - np.sum(x * x, axis=-1)) / 4.0


@dataclass(frozen=True)
class HarmonicIdentityResult:
    """Residuals of Delta f = 1 (interior) and inward df/dnu = 1/2 (free
    boundary), plus the conormal-vs-position angle at each free end."""

    nu: int
    nv: int
    h_u: float
    interior_residual: float
    boundary_residual: float
    boundary_flux: dict
    orthogonality_angle: dict


def harmonic_identity_check(surface: ParametricSurface, nu: int, nv: int = 64) -> HarmonicIdentityResult:
    """Evaluate both harmonic-domain residuals on an nu x nv grid.

    The Laplacian uses the conservative orthogonal-chart stencil with weight
    sqrt(E G); interior means cells whose full stencil lies in the chart
    (cells at a free end are skipped, a pole face carries zero weight). The
    boundary derivative uses the one-sided second-order formula, valid since
    f vanishes on the free boundary.
    """
    if nu < 8 or nv < 4:
        raise ValueError("grid too coarse")
    h_u = (surface.u1 - surface.u0) / nu
    h_v = 2.0 * math.pi / nv
    u = surface.u0 + h_u * (np.arange(nu) + 0.5)
    v = h_v * np.arange(nv)
    ufaces = surface.u0 + h_u * np.arange(nu + 1)

    f = position_potential(surface, u[:, None], v[None, :])
    W = surface.weight(u)
    au = np.zeros(nu + 1)
    au[1:-1] = (surface.weight(ufaces[1:-1])
                / np.asarray(surface.E(ufaces[1:-1]), dtype=float)) / h_u ** 2
    av = (W / np.asarray(surface.G(u), dtype=float)) / h_v ** 2

    flux_u = np.zeros((nu + 1, nv))
    flux_u[1:-1] = au[1:-1, None] * (f[1:] - f[:-1])
    lap = -(flux_u[1:] - flux_u[:-1]) / W[:, None]
    lap -= (av / W)[:, None] * (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1))

    lo = 1 if surface.free_min else 0
    hi = nu - 1 if surface.free_max else nu
    interior = float(np.max(np.abs(lap[lo:hi] - 1.0)))

    flux = {}
    angle = {}
    if surface.free_min:
        flux["u_min"] = ((9.0 * f[0] - f[1]) / (3.0 * h_u)
                         / math.sqrt(float(surface.E(surface.u0))))
        angle["u_min"] = _conormal_angle(surface, surface.u0, outward=-1.0)
    if surface.free_max:
        flux["u_max"] = ((9.0 * f[-1] - f[-2]) / (3.0 * h_u)
                         / math.sqrt(float(surface.E(surface.u1))))
        angle["u_max"] = _conormal_angle(surface, surface.u1, outward=+1.0)
    boundary = float(max(np.max(np.abs(fl - 0.5)) for fl in flux.values()))
    return HarmonicIdentityResult(nu=nu, nv=nv, h_u=h_u,
                                  interior_residual=interior,
                                  boundary_residual=boundary,
                                  boundary_flux=flux,
                                  orthogonality_angle=angle)


def _conormal_angle(surface: ParametricSurface, u_end: float, outward: float) -> float:
    """Angle between the outward unit conormal and the position vector."""
    v = 0.0
    x = np.asarray(surface.chart(u_end, v), dtype=float)
    xu = outward * np.asarray(surface.chart_u(u_end, v), dtype=float)
    c = float(np.dot(x, xu) / (np.linalg.norm(x) * np.linalg.norm(xu)))
    return math.acos(min(1.0, max(-1.0, c)))


def mean_curvature_residual(surface: ParametricSurface, nu: int, nv: int = 64) -> float:
    """max |H| sampled at interior nodes, H from grid-spacing central
    differences of the chart (second fundamental form over 2 sqrt(E G))."""
    h_u = (surface.u1 - surface.u0) / nu
    h_v = 2.0 * math.pi / nv
    u = surface.u0 + h_u * (np.arange(1, nu) )
    v = h_v * np.arange(nv)
    uu, vv = np.meshgrid(u, v, indexing="ij")

    x = np.asarray(surface.chart(uu, vv))
    xu = (np.asarray(surface.chart(uu + h_u, vv)) - np.asarray(surface.chart(uu - h_u, vv))) / (2 * h_u)
    xv = (np.asarray(surface.chart(uu, vv + h_v)) - np.asarray(surface.chart(uu, vv - h_v))) / (2 * h_v)
    xuu = (np.asarray(surface.chart(uu + h_u, vv)) - 2 * x + np.asarray(surface.chart(uu - h_u, vv))) / h_u ** 2
    xvv = (np.asarray(surface.chart(uu, vv + h_v)) - 2 * x + np.asarray(surface.chart(uu, vv - h_v))) / h_v ** 2

    nrm = np.cross(xu, xv)
    nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
    E = np.sum(xu * xu, axis=-1)
    G = np.sum(xv * xv, axis=-1)
    e = np.sum(xuu * nrm, axis=-1)
    g = np.sum(xvv * nrm, axis=-1)
    H = (e * G + g * E) / (2.0 * E * G)
    return float(np.max(np.abs(H)))


def gauss_curvature(surface: ParametricSurface, u) -> np.ndarray:
    """Gauss curvature from the orthogonal-chart form K = -(G_u/(2W))_u / W
    evaluated with small central differences of the analytic E, G."""
    u = np.asarray(u, dtype=float)
    d = 1e-4 * max(1.0, surface.u1 - surface.u0)

    def gu_over_w(s):
        gp = np.asarray(surface.G(s + d), dtype=float)
        gm = np.asarray(surface.G(s - d), dtype=float)
        return (gp - gm) / (2 * d) / surface.weight(s)

    val = (gu_over_w(u + d) - gu_over_w(u - d)) / (2 * d)
    return -0.5 * val / surface.weight(u)
