"""Tube densities and revolution metrics.

Conventions: rho is the distance from the boundary, measured inward along
normal geodesics; the relative density theta(rho) of the equidistant at
distance rho is normalized so theta(0) = 1. The drift of the weighted
Laplacian is eta = -theta'/theta, which equals the Laplacian of the
distance function, i.e. -(n-1) times the mean curvature of the equidistant.

Near the far end R the density either vanishes to an integer order d
(the focal set is a lower-dimensional soul, theta ~ c (R - rho)^d) or stays
positive with even reflection across a two-sided soul of codimension one.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

VANISHING = "vanishing"
TWO_SIDED_SOUL = "two_sided_soul"


@dataclass(frozen=True)
class FocalType:
    """Behavior of theta at the far end: vanishing order d, or a two-sided soul."""

    kind: str
    order: Optional[int] = None

    @classmethod
    def vanishing(cls, order: int) -> "FocalType":
        if order < 1:
            raise ValueError("vanishing order must be a positive integer")
        return cls(VANISHING, order)

    @classmethod
    def two_sided_soul(cls) -> "FocalType":
        return cls(TWO_SIDED_SOUL, None)


@dataclass(frozen=True)
class TubeProfile:
    """Radial density profile of a tube of inner radius R.

    theta maps [0, R] -> (0, inf) with theta(0) = 1; theta_prime is the
    analytic derivative when available (central differences otherwise).
    """

    label: str
    dim: int
    radius: float
    theta: Callable
    focal: FocalType
    theta_prime: Optional[Callable] = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("inner radius must be positive")
        t0 = float(np.asarray(self.theta(0.0)))
        if abs(t0 - 1.0) > 1e-12:
            raise ValueError(f"theta(0) = {t0!r}, expected 1 (boundary normalization)")
        rho = np.linspace(0.0, self.radius, 513)[:-1]
        vals = np.asarray(self.theta(rho), dtype=float)
        if not np.all(vals > 0.0):
            raise ValueError("theta must be positive on [0, R)")
        t_end = float(np.asarray(self.theta(self.radius)))
        if self.focal.kind == TWO_SIDED_SOUL and t_end <= 0.0:
            raise ValueError("two-sided soul requires theta(R) > 0")
        if self.focal.kind == VANISHING and t_end > 1e-6:
            raise ValueError("vanishing focal type requires theta(R) ~ 0")

    def theta_derivative(self, rho):
        """theta'(rho), analytic if available, else central differences."""
        if self.theta_prime is not None:
            return np.asarray(self.theta_prime(rho), dtype=float)
        h = self.radius * 1e-5
        rho = np.asarray(rho, dtype=float)
        return (np.asarray(self.theta(rho + h)) - np.asarray(self.theta(rho - h))) / (2 * h)

    def eta(self, rho):
        """Drift eta = -theta'/theta; rejects points where theta vanishes."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0) or np.any(rho > self.radius):
            raise ValueError("rho outside [0, R]")
        if self.focal.kind == VANISHING and np.any(rho >= self.radius - 1e-14 * self.radius):
            raise ValueError("eta undefined at the vanishing focal end")
        th = np.asarray(self.theta(rho), dtype=float)
        return -self.theta_derivative(rho) / th


def profile_eta(profile: TubeProfile, rho):
    """Drift eta(rho) = -theta'/theta of a tube profile."""
    return profile.eta(rho)


# ---------------------------------------------------------------------------
# catalog profiles


def euclidean_ball(n: int, radius: float = 1.0) -> TubeProfile:
    """Ball of radius R in flat n-space: theta = (1 - rho/R)^(n-1).

    For n = 1 this is the interval with midpoint soul (theta = 1).
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    R = float(radius)
    if n == 1:
        return TubeProfile(
            label="interval", dim=1, radius=R,
            theta=lambda rho: np.ones_like(np.asarray(rho, dtype=float)),
            theta_prime=lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
            focal=FocalType.two_sided_soul(),
        )
    return TubeProfile(
        label="ball", dim=n, radius=R,
        theta=lambda rho: (1.0 - np.asarray(rho, dtype=float) / R) ** (n - 1),
        theta_prime=lambda rho: -(n - 1) / R
        * (1.0 - np.asarray(rho, dtype=float) / R) ** (n - 2),
        focal=FocalType.vanishing(n - 1),
    )


def spherical_cap(n: int, cap_radius: float) -> TubeProfile:
    """Geodesic ball of radius R0 in the round n-sphere.

    theta(rho) = (sin(R0 - rho)/sin R0)^(n-1); the focal point is the center.
    """
    if n < 2:
        raise ValueError("dimension must be >= 2")
    R0 = float(cap_radius)
    if not 0.0 < R0 < math.pi:
        raise ValueError("cap radius must lie in (0, pi)")
    s0 = math.sin(R0)
    return TubeProfile(
        label="cap", dim=n, radius=R0,
        theta=lambda rho: (np.sin(R0 - np.asarray(rho, dtype=float)) / s0) ** (n - 1),
        theta_prime=lambda rho: -(n - 1) / s0
        * (np.sin(R0 - np.asarray(rho, dtype=float)) / s0) ** (n - 2)
        * np.cos(R0 - np.asarray(rho, dtype=float)),
        focal=FocalType.vanishing(n - 1),
    )


def clifford_tube(radius: float) -> TubeProfile:
    """Tube of radius R < pi/4 about the minimal Clifford torus in the 3-sphere.

    One-sided density theta(rho) = cos(2(R - rho))/cos(2R); the soul is the
    torus itself (two-sided, theta'(R) = 0).
    """
    R = float(radius)
    if not 0.0 < R < math.pi / 4:
        raise ValueError("tube radius must lie in (0, pi/4)")
    c0 = math.cos(2 * R)
    return TubeProfile(
        label="clifford", dim=3, radius=R,
        theta=lambda rho: np.cos(2 * (R - np.asarray(rho, dtype=float))) / c0,
        theta_prime=lambda rho: 2 * np.sin(2 * (R - np.asarray(rho, dtype=float))) / c0,
        focal=FocalType.two_sided_soul(),
    )


def annulus_outward_profile(r_in: float = 1.0, r_out: float = 2.0) -> TubeProfile:
    """Outward side of the planar annulus [r_in, r_out] about its middle circle.

    Measured from the outer boundary: theta(rho) = (r_out - rho)/r_out on
    [0, (r_out - r_in)/2]. The middle circle is not a geodesic, so the soul
    expansion has a nonzero linear term (2/(r_in + r_out) per unit distance).
    """
    if not 0.0 < r_in < r_out:
        raise ValueError("need 0 < r_in < r_out")
    R = (r_out - r_in) / 2.0
    return TubeProfile(
        label="annulus", dim=2, radius=R,
        theta=lambda rho: (r_out - np.asarray(rho, dtype=float)) / r_out,
        theta_prime=lambda rho: np.full_like(np.asarray(rho, dtype=float), -1.0 / r_out),
        focal=FocalType.two_sided_soul(),
    )


# ---------------------------------------------------------------------------
# focal order and soul expansion


@dataclass(frozen=True)
class FocalOrderFit:
    """Least-squares fit theta ~ coeff * (R - rho)^order near the far end."""

    order: float
    coeff: float
    residual: float
    window: float


def estimate_focal_order(profile: TubeProfile, window: Optional[float] = None,
                         samples: int = 32) -> FocalOrderFit:
    """Fit the vanishing order of theta by log-log regression near rho = R.

    Samples are log-spaced distances s = R - rho in [w/10, w], w = R/10 by
    default. For a two-sided soul the order is 0 and coeff = theta(R).
    """
    R = profile.radius
    w = R / 10.0 if window is None else float(window)
    if not 0.0 < w < R:
        raise ValueError("fit window must lie inside (0, R)")
    if samples < 4:
        raise ValueError("focal-order fit needs at least 4 samples")
    if profile.focal.kind == TWO_SIDED_SOUL:
        return FocalOrderFit(order=0.0, coeff=float(np.asarray(profile.theta(R))),
                             residual=0.0, window=w)
    s = np.geomspace(w / 10.0, w, samples)
    th = np.asarray(profile.theta(R - s), dtype=float)
    if not np.all(th > 0.0):
        raise ValueError("theta must be positive on the fit window")
    logs, logth = np.log(s), np.log(th)
    order, logc = np.polyfit(logs, logth, 1)
    resid = float(np.max(np.abs(logth - (order * logs + logc))))
    return FocalOrderFit(order=float(order), coeff=float(np.exp(logc)),
                         residual=resid, window=w)


def leading_coefficient(profile: TubeProfile, order: int,
                        window: Optional[float] = None, samples: int = 32) -> float:
    """Coefficient c in theta ~ c (R - rho)^order with the order pinned."""
    R = profile.radius
    w = R / 10.0 if window is None else float(window)
    s = np.geomspace(w / 10.0, w, samples)
    th = np.asarray(profile.theta(R - s), dtype=float)
    if not np.all(th > 0.0):
        raise ValueError("theta must be positive on the fit window")
    return float(np.exp(np.mean(np.log(th) - order * np.log(s))))


@dataclass(frozen=True)
class SoulExpansion:
    """Linear coefficient of the normalized density seen from the soul.

    theta_soul(s) = 1 + linear_coeff * s + O(s^2); the coefficient vanishes
    exactly when the soul is minimal.
    """

    linear_coeff: float
    constant: float
    order: int
    window: tuple = field(repr=False, default=(0.0, 0.0))


def soul_minimality_check(profile: TubeProfile, samples: int = 24) -> SoulExpansion:
    """Fit theta_soul(s) = theta(R - s), normalized by its leading term, to
    a quartic and return the linear coefficient (0 iff the soul is minimal).
    """
    R = profile.radius
    s = np.linspace(R * 1e-3, R * 2e-2, samples)
    if samples < 4:
        raise ValueError("soul expansion fit needs at least 4 samples")
    th = np.asarray(profile.theta(R - s), dtype=float)
    if not np.all(th > 0.0):
        raise ValueError("theta must be positive on the fit window")
    if profile.focal.kind == TWO_SIDED_SOUL:
        d = 0
        norm = float(np.asarray(profile.theta(R)))
    else:
        fit = estimate_focal_order(profile)
        d = int(round(fit.order))
        if abs(fit.order - d) > 0.2:
            raise ValueError(f"fitted focal order {fit.order:.3f} is not near an integer")
        norm = leading_coefficient(profile, d)
    theta_soul = th / (norm * s**d) if d else th / norm
    poly = np.polynomial.Polynomial.fit(s, theta_soul, deg=4).convert()
    return SoulExpansion(linear_coeff=float(poly.coef[1]), constant=float(poly.coef[0]),
                         order=d, window=(float(s[0]), float(s[-1])))


# ---------------------------------------------------------------------------
# revolution metrics dr^2 + theta(r, phi)^2 dphi^2


@dataclass(frozen=True)
class RevolutionMetric:
    """Abstract surface metric dr^2 + theta2d(r, phi)^2 dphi^2 on an r-interval.

    theta2d(r, phi) = theta0(r) * (1 + eps * cos(mode * phi) * bump(r)) with
    bump(r) = sin^2(pi (r - r_min)/(r_max - r_min)); eps = 0 is the radial case.
    dirichlet_min/max mark which r-ends carry the Dirichlet boundary; a
    non-Dirichlet end is a zero-flux face (excised pole or reflection side).
    """

    label: str
    theta0: Callable
    r_min: float
    r_max: float
    eps: float = 0.0
    mode: int = 0
    dirichlet_min: bool = True
    dirichlet_max: bool = True

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise ValueError("need r_min < r_max")
        if abs(self.eps) >= 1.0:
            raise ValueError("perturbation amplitude must satisfy |eps| < 1")
        if not (self.dirichlet_min or self.dirichlet_max):
            raise ValueError("at least one r-end must be a Dirichlet boundary")
        r = np.linspace(self.r_min, self.r_max, 257)
        if not np.all(np.asarray(self.theta0(r), dtype=float) > 0.0):
            raise ValueError("theta0 must be positive on [r_min, r_max]")
        phi = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
        if not np.all(self.theta2d(r[:, None], phi[None, :]) > 0.0):
            raise ValueError("theta2d must stay positive (reduce |eps|)")

    @property
    def is_radial(self) -> bool:
        return self.eps == 0.0

    def bump(self, r):
        arg = np.pi * (np.asarray(r, dtype=float) - self.r_min) / (self.r_max - self.r_min)
        return np.sin(arg) ** 2

    def theta2d(self, r, phi):
        base = np.asarray(self.theta0(r), dtype=float)
        if self.eps == 0.0:
            return np.broadcast_to(base, np.broadcast(base, np.asarray(phi)).shape).copy()
        return base * (1.0 + self.eps * np.cos(self.mode * np.asarray(phi)) * self.bump(r))


def make_revolution_metric(theta0: Callable, r_min: float, r_max: float,
                           eps: float = 0.0, mode: int = 0,
                           dirichlet=(True, True), label: str = "revolution") -> RevolutionMetric:
    """Build a (possibly perturbed) revolution metric with validation."""
    return RevolutionMetric(label=label, theta0=theta0, r_min=float(r_min),
                            r_max=float(r_max), eps=float(eps), mode=int(mode),
                            dirichlet_min=bool(dirichlet[0]), dirichlet_max=bool(dirichlet[1]))


def flat_annulus_metric(r0: float = 1.0, r1: float = 2.0) -> RevolutionMetric:
    """Flat annulus chart theta0(r) = r on [r0, r1], Dirichlet on both circles."""
    if r0 <= 0:
        raise ValueError("inner radius must be positive")
    return make_revolution_metric(lambda r: np.asarray(r, dtype=float), r0, r1,
                                  label="flat-annulus")


POLE_GAP = 1e-3


def cap_chart_metric(pole_gap: float = POLE_GAP) -> RevolutionMetric:
    """Hemisphere chart theta0(r) = sin r on [pole_gap, pi/2].

    The coordinate pole is excised at r = pole_gap with a zero-flux face;
    the Dirichlet boundary is the equator r = pi/2.
    """
    return make_revolution_metric(np.sin, pole_gap, math.pi / 2,
                                  dirichlet=(False, True), label="cap-chart")


def perturbed_metric(base: RevolutionMetric, eps: float, mode: int = 1) -> RevolutionMetric:
    """Angular perturbation of a radial metric; breaks the radial symmetry."""
    return RevolutionMetric(label=base.label + "-perturbed", theta0=base.theta0,
                            r_min=base.r_min, r_max=base.r_max, eps=float(eps),
                            mode=int(mode), dirichlet_min=base.dirichlet_min,
                            dirichlet_max=base.dirichlet_max)
