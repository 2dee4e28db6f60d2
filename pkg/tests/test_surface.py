"""Tests for the 2-D surface solver and the radialization operator."""

import math

import numpy as np
import pytest

from isoflow.geometry import cap_chart_metric, flat_annulus_metric, perturbed_metric
from isoflow.radial_solver import annulus_problem, discretize, solve_radial_heat
from isoflow.surface_solver import (
    build_surface_grid,
    commutation_residual,
    exit_time_2d,
    laplace_beltrami_apply,
    level_derivative_check,
    radialize,
    solve_heat_2d,
)

ANNULUS_C = 3.0 / (4.0 * math.log(2.0))


def ring_field(grid, values_r):
    """Broadcast a radial sample vector to the (nr, nphi) grid."""
    return np.repeat(np.asarray(values_r, dtype=float)[:, None], grid.nphi, axis=1)


# ---------------------------------------------------------------------------
# grid assembly


def test_flat_annulus_total_measure():
    """Midpoint quadrature integrates theta = r exactly: area 3 pi."""
    grid = build_surface_grid(flat_annulus_metric(), 32, 16)
    assert grid.total_measure() == pytest.approx(3 * math.pi, rel=1e-14)


def test_grid_size_validation():
    with pytest.raises(ValueError, match="at least 4"):
        build_surface_grid(flat_annulus_metric(), 3, 16)
    with pytest.raises(ValueError, match="at least 4"):
        build_surface_grid(flat_annulus_metric(), 16, 3)


def test_field_shape_validation():
    grid = build_surface_grid(flat_annulus_metric(), 8, 8)
    bad = np.ones((8, 7))
    with pytest.raises(ValueError, match="shape"):
        laplace_beltrami_apply(grid, bad)
    with pytest.raises(ValueError, match="shape"):
        radialize(grid, bad)
    with pytest.raises(ValueError, match="shape"):
        level_derivative_check(grid, bad)


# ---------------------------------------------------------------------------
# Laplacian consistency


def test_laplacian_flat_annulus_quadratic():
    """L(r^2) = -4 on the flat annulus, exact away from the Dirichlet rows."""
    grid = build_surface_grid(flat_annulus_metric(), 64, 16)
    lap = laplace_beltrami_apply(grid, ring_field(grid, grid.r**2))
    np.testing.assert_allclose(lap[1:-1], -4.0, atol=1e-10)


def test_laplacian_kills_constants_in_the_interior():
    grid = build_surface_grid(flat_annulus_metric(), 64, 16)
    lap = laplace_beltrami_apply(grid, np.ones((64, 16)))
    np.testing.assert_allclose(lap[1:-1], 0.0, atol=1e-11)
    # Dirichlet rows see the ghost reflection of the constant
    assert lap[0, 0] > 0 and lap[-1, 0] > 0


def test_laplacian_cap_chart_second_order():
    """On the hemisphere chart, L(cos r) = 2 cos r; O(h^2) convergence."""
    errors = {}
    for nr in (32, 64):
        grid = build_surface_grid(cap_chart_metric(), nr, 8)
        lap = laplace_beltrami_apply(grid, ring_field(grid, np.cos(grid.r)))
        target = 2 * np.cos(grid.r[1:-1])[:, None]
        errors[nr] = float(np.max(np.abs(lap[1:-1] - target)))
    assert errors[64] < 3e-4
    assert errors[32] / errors[64] > 3.5


def test_laplacian_self_adjoint_on_perturbed_metric():
    metric = perturbed_metric(cap_chart_metric(), 0.1, 1)
    grid = build_surface_grid(metric, 32, 16)
    rng = np.random.default_rng(3)
    u = rng.standard_normal((32, 16))
    v = rng.standard_normal((32, 16))
    m = grid.cell_measure
    lhs = float(np.sum(m * laplace_beltrami_apply(grid, u) * v))
    rhs = float(np.sum(m * u * laplace_beltrami_apply(grid, v)))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


# ---------------------------------------------------------------------------
# radialization


def test_radialize_fixes_radial_fields_bitwise():
    grid = build_surface_grid(flat_annulus_metric(), 16, 16)
    f = ring_field(grid, np.cos(grid.r))
    assert np.array_equal(radialize(grid, f), f)


def test_radialize_is_idempotent_bitwise():
    grid = build_surface_grid(flat_annulus_metric(), 16, 16)
    f = np.cos(grid.r)[:, None] + 0.3 * np.outer(np.sin(grid.r), np.cos(2 * grid.phi))
    once = radialize(grid, f)
    assert np.array_equal(radialize(grid, once), once)


def test_radialize_averages_out_pure_oscillation():
    grid = build_surface_grid(flat_annulus_metric(), 16, 16)
    f = np.ones((16, 1)) * np.sin(grid.phi)[None, :]
    np.testing.assert_allclose(radialize(grid, f), 0.0, atol=1e-15)


def test_radialize_extracts_the_radial_part():
    grid = build_surface_grid(flat_annulus_metric(), 16, 16)
    radial = np.cos(grid.r)[:, None] * np.ones((1, 16))
    f = radial + 0.3 * np.outer(np.sin(grid.r), np.cos(2 * grid.phi))
    np.testing.assert_allclose(radialize(grid, f), radial, atol=1e-15)


def test_radialize_preserves_weighted_integral():
    """Averaging against theta keeps the total integral, radial or not."""
    metric = perturbed_metric(flat_annulus_metric(), 0.2, 3)
    grid = build_surface_grid(metric, 16, 16)
    rng = np.random.default_rng(11)
    f = rng.standard_normal((16, 16))
    before = float(np.sum(f * grid.cell_measure))
    after = float(np.sum(radialize(grid, f) * grid.cell_measure))
    assert after == pytest.approx(before, rel=1e-12)


# ---------------------------------------------------------------------------
# commutation


def test_commutator_vanishes_exactly_on_radial_fields():
    grid = build_surface_grid(cap_chart_metric(), 32, 32)
    f = ring_field(grid, np.cos(grid.r))
    assert commutation_residual(grid, f).residual == 0.0


def test_commutator_stays_at_roundoff_on_radial_metrics():
    """Radial metric, arbitrary field: the stencil is column-constant, so
    averaging commutes with it up to accumulated roundoff."""
    for nr in (32, 64):
        grid = build_surface_grid(cap_chart_metric(), nr, nr)
        f = grid.r[:, None] * np.cos(grid.phi)[None, :]
        assert commutation_residual(grid, f).residual < 1e-10


def test_commutator_detects_broken_symmetry():
    metric = perturbed_metric(cap_chart_metric(), 0.1, 1)
    grid = build_surface_grid(metric, 64, 64)
    f = grid.r[:, None] * np.cos(grid.phi)[None, :]
    res = commutation_residual(grid, f)
    assert res.residual == pytest.approx(0.5924183288073639, rel=1e-6)
    assert res.field.shape == (64, 64)


# ---------------------------------------------------------------------------
# level-set derivative identity


def test_level_identity_flat_annulus_exact_cases():
    grid = build_surface_grid(flat_annulus_metric(), 32, 8)
    linear = ring_field(grid, grid.r)
    assert level_derivative_check(grid, linear).residual < 1e-12
    oscillation = np.ones((32, 1)) * np.cos(grid.phi)[None, :]
    assert level_derivative_check(grid, oscillation).residual < 1e-13


def test_level_identity_cap_chart_convergence():
    residuals = {}
    for nr in (32, 64):
        grid = build_surface_grid(cap_chart_metric(), nr, 8)
        f = ring_field(grid, np.cos(grid.r))
        residuals[nr] = level_derivative_check(grid, f).residual
    assert residuals[64] < 2e-3
    assert residuals[32] / residuals[64] > 3.5


def test_level_identity_reports_interior_rings():
    grid = build_surface_grid(flat_annulus_metric(), 16, 8)
    res = level_derivative_check(grid, np.ones((16, 8)))
    assert res.r.shape == (14,)
    np.testing.assert_array_equal(res.r, grid.r[1:-1])


# ---------------------------------------------------------------------------
# heat flow


def test_heat_2d_radial_flux_is_angle_constant():
    """Radial metric: per-ring flux samples agree bitwise at every step."""
    grid = build_surface_grid(cap_chart_metric(), 32, 8)
    field, flux = solve_heat_2d(grid, 0.01, dt=1e-3)
    assert flux.boundary == ("r_max",)
    assert float(flux.spread().max()) == 0.0
    assert np.array_equal(field.values, np.repeat(field.values[:, :1], 8, axis=1))


def test_heat_2d_argument_validation():
    grid = build_surface_grid(cap_chart_metric(), 8, 8)
    with pytest.raises(ValueError, match="final time"):
        solve_heat_2d(grid, -1.0)
    with pytest.raises(ValueError, match="shape"):
        solve_heat_2d(grid, 0.01, u0=np.ones((8, 7)))


def test_heat_2d_matches_1d_reduction():
    """Flat annulus: per-ring flux means agree with the weighted 1-D solve
    run at the same resolution and time step."""
    grid = build_surface_grid(flat_annulus_metric(), 128, 8)
    _, flux2 = solve_heat_2d(grid, 0.02, dt=1e-4)
    disc = discretize(annulus_problem(), 128)
    _, flux1 = solve_radial_heat(disc, 0.02, dt=1e-4)
    two_d = flux2.at_time(0.02)
    one_d = flux1.at_time(0.02)
    assert flux2.boundary == ("r_min", "r_max")
    assert float(two_d[:8].mean()) == pytest.approx(one_d[0], abs=1e-6)
    assert float(two_d[8:].mean()) == pytest.approx(one_d[1], abs=1e-6)
    # each ring is internally constant to the bit
    assert float(two_d[:8].max() - two_d[:8].min()) == 0.0
    assert float(two_d[8:].max() - two_d[8:].min()) == 0.0


# ---------------------------------------------------------------------------
# exit time


def test_exit_2d_cap_chart_serrin_exact():
    """Radial cap chart: the inward derivative is constant on the equator
    to the bit, and the exit time peaks at the pole ring."""
    grid = build_surface_grid(cap_chart_metric(), 64, 8)
    res = exit_time_2d(grid)
    assert res.serrin_deviation == 0.0
    assert res.argmax_r == grid.r[0]
    assert set(res.boundary_flux) == {"r_max"}
    assert res.iterations > 0


def test_exit_2d_flat_annulus_matches_closed_form():
    """Ring means approach the 1-D derivatives C - 1/2 and 1 - C/2; the
    argmax ring sits at the critical radius sqrt(2C)."""
    grid = build_surface_grid(flat_annulus_metric(), 128, 8)
    res = exit_time_2d(grid)
    inner = float(res.boundary_flux["r_min"].mean())
    outer = float(res.boundary_flux["r_max"].mean())
    assert inner == pytest.approx(ANNULUS_C - 0.5, abs=6e-3)
    assert outer == pytest.approx(1 - ANNULUS_C / 2, abs=6e-3)
    assert abs(res.argmax_r - math.sqrt(2 * ANNULUS_C)) < grid.h_r
    # pooled deviation across the two rings exposes the unequal derivatives
    assert res.serrin_deviation > 0.1
    # while each ring on its own is exactly constant
    for samples in res.boundary_flux.values():
        assert float(samples.max() - samples.min()) == 0.0


def test_exit_2d_perturbed_cap_violates_serrin():
    metric = perturbed_metric(cap_chart_metric(), 0.1, 1)
    grid = build_surface_grid(metric, 64, 64)
    res = exit_time_2d(grid)
    assert res.serrin_deviation == pytest.approx(0.08349892197995723, rel=1e-6)
    assert res.serrin_deviation > 0.0416
