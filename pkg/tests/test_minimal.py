"""Tests for free-boundary surfaces and the harmonic-domain identities."""

import math

import numpy as np
import pytest

from isoflow.minimal_surface import (
    ParametricSurface,
    gauss_curvature,
    harmonic_identity_check,
    make_critical_catenoid,
    make_flat_disk,
    make_spherical_cap_control,
    mean_curvature_residual,
    position_potential,
)

CONTROL_FLUX = 0.25 * math.sqrt(1056.0) / 35.0


# ---------------------------------------------------------------------------
# construction


def test_critical_catenoid_scale():
    """The free-boundary catenoid solves t tanh t = 1; its waist scale is
    a = 1/(t cosh t)."""
    cat = make_critical_catenoid()
    t0 = cat.u1
    assert t0 * math.tanh(t0) == pytest.approx(1.0, abs=1e-14)
    assert cat.u0 == -t0
    assert cat.free_min and cat.free_max
    # both boundary circles sit on the unit sphere
    for u_end in (cat.u0, cat.u1):
        x = np.asarray(cat.chart(u_end, 0.7))
        assert float(np.sum(x * x)) == pytest.approx(1.0, abs=1e-12)


def test_flat_disk_chart():
    disk = make_flat_disk()
    assert (disk.free_min, disk.free_max) == (False, True)
    assert float(position_potential(disk, 0.0, 0.0)) == pytest.approx(0.25)
    assert float(position_potential(disk, 1.0, 0.3)) == pytest.approx(0.0, abs=1e-15)


def test_control_cap_reaches_the_sphere():
    ctl = make_spherical_cap_control()
    x = np.asarray(ctl.chart(ctl.u1, 1.1))
    assert float(np.sum(x * x)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError, match="does not reach"):
        make_spherical_cap_control(0.1, 0.1)


def test_surface_validation():
    one = lambda u: np.ones_like(np.asarray(u, dtype=float))  # noqa: E731
    line = lambda u, v: np.stack([np.asarray(u, dtype=float),  # noqa: E731
                                  np.zeros_like(np.asarray(u, dtype=float)),
                                  np.zeros_like(np.asarray(u, dtype=float))], axis=-1)
    dline = lambda u, v: np.stack([one(u), 0 * one(u), 0 * one(u)], axis=-1)  # noqa: E731
    with pytest.raises(ValueError, match="u0 < u1"):
        ParametricSurface("bad", 1.0, 0.0, one, one, line, dline, False, True)
    with pytest.raises(ValueError, match="E must be positive"):
        ParametricSurface("bad", 0.0, 1.0, lambda u: -one(u), one, line, dline,
                          False, True)
    # free end at u = 1 is on the sphere, so flip it: free end at u = 0 is not
    with pytest.raises(ValueError, match="unit sphere"):
        ParametricSurface("bad", 0.0, 1.0, one, one, line, dline, True, True)
    # non-free end must be a pole (vanishing weight), a line chart is not
    with pytest.raises(ValueError, match="chart pole"):
        ParametricSurface("bad", 0.5, 1.0, one, one, line, dline, False, True)


# ---------------------------------------------------------------------------
# harmonic-domain identities


def test_disk_identities_hold_at_roundoff():
    """Flat disk: f = (1 - r^2)/4 is a grid polynomial, everything is exact."""
    res = harmonic_identity_check(make_flat_disk(), 64, 32)
    assert res.interior_residual < 1e-9
    assert res.boundary_residual < 1e-12
    assert float(res.boundary_flux["u_max"].mean()) == pytest.approx(0.5, abs=1e-12)
    assert res.orthogonality_angle == {"u_max": 0.0}


def test_catenoid_identities_converge():
    """Critical catenoid: both residuals drop at second order."""
    cat = make_critical_catenoid()
    coarse = harmonic_identity_check(cat, 64, 32)
    fine = harmonic_identity_check(cat, 128, 32)
    assert fine.interior_residual == pytest.approx(9.840397e-05, rel=1e-4)
    assert coarse.interior_residual / fine.interior_residual > 3.5
    assert coarse.boundary_residual / fine.boundary_residual > 3.5
    for end in ("u_min", "u_max"):
        assert float(fine.boundary_flux[end].mean()) == pytest.approx(0.5, abs=1e-3)
    assert cat.label == "critical-catenoid"
    assert fine.orthogonality_angle == {"u_min": 0.0, "u_max": 0.0}


def test_control_cap_breaks_both_identities():
    """The spherical cap is neither minimal nor orthogonal: the interior
    residual stays order one and the boundary flux misses 1/2."""
    res = harmonic_identity_check(make_spherical_cap_control(), 128, 32)
    assert res.interior_residual == pytest.approx(1.2500606769722653, rel=1e-6)
    assert res.interior_residual > 1.2
    flux = float(res.boundary_flux["u_max"].mean())
    assert flux == pytest.approx(CONTROL_FLUX, abs=1e-4)
    assert res.orthogonality_angle["u_max"] == pytest.approx(1.0880304, abs=1e-3)


def test_harmonic_check_grid_validation():
    with pytest.raises(ValueError, match="too coarse"):
        harmonic_identity_check(make_flat_disk(), 7, 32)
    with pytest.raises(ValueError, match="too coarse"):
        harmonic_identity_check(make_flat_disk(), 64, 3)


# ---------------------------------------------------------------------------
# curvature cross-checks


def test_mean_curvature_disk_vanishes():
    assert mean_curvature_residual(make_flat_disk(), 64, 64) == 0.0


def test_mean_curvature_catenoid_converges():
    cat = make_critical_catenoid()
    coarse = mean_curvature_residual(cat, 128, 128)
    fine = mean_curvature_residual(cat, 256, 256)
    assert fine < 2e-4
    assert coarse / fine > 3.5


def test_mean_curvature_control_is_spherical():
    """|H| of a sphere of radius 0.7 is 1/0.7."""
    value = mean_curvature_residual(make_spherical_cap_control(), 128, 128)
    assert value == pytest.approx(1.0 / 0.7, rel=2e-3)


def test_gauss_curvature_values():
    u = np.linspace(0.1, 0.9, 5)
    assert float(np.max(np.abs(gauss_curvature(make_flat_disk(), u)))) < 1e-8
    ctl = make_spherical_cap_control()
    uc = np.linspace(0.05, ctl.u1 * 0.9, 5)
    np.testing.assert_allclose(gauss_curvature(ctl, uc), 1.0 / 0.49, rtol=1e-6)
    cat = make_critical_catenoid()
    ucat = np.linspace(cat.u0 * 0.5, cat.u1 * 0.5, 5)
    assert np.all(gauss_curvature(cat, ucat) < 0.0)
