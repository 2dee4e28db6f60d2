"""Tests for tube profiles, focal-order fits, and revolution metrics."""

import math

import numpy as np
import pytest

from isoflow.geometry import (
    FocalType,
    RevolutionMetric,
    TWO_SIDED_SOUL,
    VANISHING,
    annulus_outward_profile,
    cap_chart_metric,
    clifford_tube,
    estimate_focal_order,
    euclidean_ball,
    flat_annulus_metric,
    leading_coefficient,
    make_revolution_metric,
    perturbed_metric,
    profile_eta,
    soul_minimality_check,
    spherical_cap,
)


# ---------------------------------------------------------------------------
# catalog profiles


def test_catalog_normalization():
    """Every catalog profile has theta(0) = 1."""
    profiles = [
        euclidean_ball(1),
        euclidean_ball(3),
        spherical_cap(3, math.pi / 3),
        clifford_tube(0.6),
        annulus_outward_profile(),
    ]
    for p in profiles:
        assert float(p.theta(0.0)) == pytest.approx(1.0, abs=1e-15)


def test_ball_closed_forms():
    ball = euclidean_ball(3, 1.0)
    rho = np.linspace(0.0, 0.9, 10)
    np.testing.assert_allclose(ball.theta(rho), (1 - rho) ** 2, rtol=1e-14)
    np.testing.assert_allclose(ball.theta_derivative(rho), -2 * (1 - rho), rtol=1e-14)
    np.testing.assert_allclose(ball.eta(rho), 2 / (1 - rho), rtol=1e-13)
    assert ball.label == "ball"
    assert ball.focal.kind == VANISHING
    assert ball.focal.order == 2


def test_interval_profile():
    interval = euclidean_ball(1, 1.0)
    assert interval.label == "interval"
    assert interval.focal.kind == TWO_SIDED_SOUL
    rho = np.linspace(0.0, 1.0, 7)
    np.testing.assert_array_equal(interval.theta(rho), np.ones(7))
    np.testing.assert_array_equal(interval.eta(rho), np.zeros(7))


def test_cap_closed_form():
    cap = spherical_cap(3, math.pi / 3)
    rho = np.linspace(0.0, 1.0, 9)
    expected = (np.sin(math.pi / 3 - rho) / math.sin(math.pi / 3)) ** 2
    np.testing.assert_allclose(cap.theta(rho), expected, rtol=1e-14)
    # eta = 2 cot(R0 - rho)
    np.testing.assert_allclose(cap.eta(rho), 2 / np.tan(math.pi / 3 - rho), rtol=1e-12)


def test_clifford_soul_is_two_sided():
    tube = clifford_tube(0.6)
    assert tube.focal.kind == TWO_SIDED_SOUL
    # theta' vanishes at the soul, so the torus sits at a critical point
    assert float(tube.theta_derivative(0.6)) == pytest.approx(0.0, abs=1e-15)
    assert float(tube.theta(0.6)) == pytest.approx(1 / math.cos(1.2), rel=1e-14)


def test_annulus_outward_profile():
    ann = annulus_outward_profile(1.0, 2.0)
    assert ann.radius == pytest.approx(0.5)
    rho = np.linspace(0.0, 0.5, 6)
    np.testing.assert_allclose(ann.theta(rho), (2 - rho) / 2, rtol=1e-15)


def test_profile_eta_helper_matches_method():
    ball = euclidean_ball(3)
    rho = np.array([0.1, 0.4, 0.7])
    np.testing.assert_array_equal(profile_eta(ball, rho), ball.eta(rho))


@pytest.mark.parametrize("bad", [-0.1, 1.1])
def test_eta_rejects_points_outside_interval(bad):
    with pytest.raises(ValueError, match="outside"):
        euclidean_ball(3).eta(bad)


def test_eta_rejects_vanishing_end():
    with pytest.raises(ValueError, match="vanishing"):
        euclidean_ball(3).eta(1.0)
    # a two-sided soul keeps eta finite up to the far end
    assert np.isfinite(clifford_tube(0.6).eta(0.6))


# ---------------------------------------------------------------------------
# constructor validation


def test_catalog_parameter_validation():
    with pytest.raises(ValueError, match="dimension"):
        euclidean_ball(0)
    with pytest.raises(ValueError, match="dimension"):
        spherical_cap(1, 1.0)
    with pytest.raises(ValueError, match=r"\(0, pi\)"):
        spherical_cap(3, math.pi)
    with pytest.raises(ValueError, match=r"\(0, pi/4\)"):
        clifford_tube(0.9)
    with pytest.raises(ValueError, match="r_in < r_out"):
        annulus_outward_profile(2.0, 1.0)


def test_profile_requires_unit_boundary_density():
    with pytest.raises(ValueError, match="normalization"):
        TubeProfile = type(euclidean_ball(3))
        TubeProfile(label="bad", dim=2, radius=1.0,
                    theta=lambda rho: 2.0 * np.ones_like(np.asarray(rho, dtype=float)),
                    focal=FocalType.two_sided_soul())


def test_profile_requires_positive_density():
    TubeProfile = type(euclidean_ball(3))
    with pytest.raises(ValueError, match="positive"):
        TubeProfile(label="bad", dim=2, radius=1.0,
                    theta=lambda rho: 1.0 - 2.0 * np.asarray(rho, dtype=float),
                    focal=FocalType.vanishing(1))


def test_focal_kind_consistency():
    TubeProfile = type(euclidean_ball(3))
    # constant density cannot carry a vanishing focal type
    with pytest.raises(ValueError, match="theta\\(R\\) ~ 0"):
        TubeProfile(label="bad", dim=2, radius=1.0,
                    theta=lambda rho: np.ones_like(np.asarray(rho, dtype=float)),
                    focal=FocalType.vanishing(1))


def test_vanishing_order_must_be_positive():
    with pytest.raises(ValueError, match="positive integer"):
        FocalType.vanishing(0)


# ---------------------------------------------------------------------------
# focal order fit


def test_focal_order_ball_exact():
    """(1 - rho)^2 is an exact power law, so the fit recovers order 2."""
    fit = estimate_focal_order(euclidean_ball(3, 1.0))
    assert fit.order == pytest.approx(2.0, abs=1e-12)
    assert fit.coeff == pytest.approx(1.0, abs=1e-12)
    assert fit.residual < 1e-12


def test_focal_order_cap():
    """sin^2(R0 - rho) deviates from a pure power, order fit stays close."""
    fit = estimate_focal_order(spherical_cap(3, math.pi / 3))
    assert fit.order == pytest.approx(2.0, abs=5e-3)
    assert fit.coeff == pytest.approx(1 / math.sin(math.pi / 3) ** 2, rel=1e-2)


def test_focal_order_two_sided_souls():
    for profile in (clifford_tube(0.6), annulus_outward_profile()):
        fit = estimate_focal_order(profile)
        assert fit.order == 0.0
        assert fit.coeff == pytest.approx(float(profile.theta(profile.radius)))
    assert estimate_focal_order(annulus_outward_profile()).coeff == pytest.approx(0.75)


def test_focal_order_window_validation():
    ball = euclidean_ball(3)
    with pytest.raises(ValueError, match="window"):
        estimate_focal_order(ball, window=2.0)
    with pytest.raises(ValueError, match="samples"):
        estimate_focal_order(ball, samples=3)


def test_leading_coefficient_with_pinned_order():
    assert leading_coefficient(euclidean_ball(3, 1.0), 2) == pytest.approx(1.0, abs=1e-12)
    assert leading_coefficient(euclidean_ball(4, 2.0), 3) == pytest.approx(1 / 8, rel=1e-12)


# ---------------------------------------------------------------------------
# soul expansion


@pytest.mark.parametrize("profile", [
    euclidean_ball(3),
    spherical_cap(3, math.pi / 3),
    clifford_tube(0.6),
], ids=["ball", "cap", "clifford"])
def test_minimal_souls_have_no_linear_term(profile):
    expansion = soul_minimality_check(profile)
    assert abs(expansion.linear_coeff) < 1e-9
    # the constant term carries the normalization-fit bias for the cap
    assert expansion.constant == pytest.approx(1.0, abs=2e-3)


def test_annulus_soul_linear_term():
    """The middle circle of the annulus bends: coefficient 2/(r0 + r1)."""
    expansion = soul_minimality_check(annulus_outward_profile(1.0, 2.0))
    assert expansion.linear_coeff == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert expansion.order == 0


def test_soul_expansion_orders():
    assert soul_minimality_check(euclidean_ball(3)).order == 2
    assert soul_minimality_check(clifford_tube(0.6)).order == 0


def test_soul_expansion_sample_validation():
    with pytest.raises(ValueError, match="samples"):
        soul_minimality_check(euclidean_ball(3), samples=3)


# ---------------------------------------------------------------------------
# revolution metrics


def test_flat_annulus_metric():
    metric = flat_annulus_metric()
    assert metric.is_radial
    assert (metric.dirichlet_min, metric.dirichlet_max) == (True, True)
    r = np.linspace(1.0, 2.0, 5)
    np.testing.assert_array_equal(metric.theta0(r), r)


def test_cap_chart_metric():
    metric = cap_chart_metric()
    assert metric.r_min == pytest.approx(1e-3)
    assert metric.r_max == pytest.approx(math.pi / 2)
    # the excised pole is a zero-flux face, the equator is Dirichlet
    assert (metric.dirichlet_min, metric.dirichlet_max) == (False, True)


def test_radial_theta2d_is_column_constant():
    metric = flat_annulus_metric()
    r = np.linspace(1.0, 2.0, 8)[:, None]
    phi = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)[None, :]
    th = metric.theta2d(r, phi)
    assert th.shape == (8, 16)
    np.testing.assert_array_equal(th, np.repeat(th[:, :1], 16, axis=1))
    th[0, 0] = -1.0  # the returned array is a writable copy


def test_bump_vanishes_at_the_ends():
    metric = flat_annulus_metric()
    assert metric.bump(1.0) == pytest.approx(0.0, abs=1e-30)
    assert metric.bump(2.0) == pytest.approx(0.0, abs=1e-30)
    assert metric.bump(1.5) == pytest.approx(1.0)


def test_perturbed_metric():
    base = flat_annulus_metric()
    pert = perturbed_metric(base, eps=0.1, mode=2)
    assert not pert.is_radial
    assert pert.label == "flat-annulus-perturbed"
    # the bump kills the perturbation at the boundary rings
    assert float(pert.theta2d(1.0, 0.3)) == pytest.approx(1.0, abs=1e-15)
    mid = float(pert.theta2d(1.5, 0.0))
    assert mid == pytest.approx(1.5 * 1.1, rel=1e-14)


def test_revolution_metric_validation():
    with pytest.raises(ValueError, match="r_min < r_max"):
        make_revolution_metric(np.sin, 2.0, 1.0)
    with pytest.raises(ValueError, match="eps"):
        make_revolution_metric(lambda r: np.ones_like(r), 0.0, 1.0, eps=1.0)
    with pytest.raises(ValueError, match="Dirichlet"):
        make_revolution_metric(lambda r: np.ones_like(r), 0.0, 1.0,
                               dirichlet=(False, False))
    with pytest.raises(ValueError, match="positive"):
        make_revolution_metric(lambda r: np.cos(r), 0.0, 3.0)
    with pytest.raises(ValueError, match="inner radius"):
        flat_annulus_metric(0.0, 1.0)
