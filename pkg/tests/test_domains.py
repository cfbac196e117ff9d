"""Geometry layer: domains, grids, boundary traces, nested resampling."""

import numpy as np
import pytest

from fraclane import (
    ConfigurationError,
    Domain,
    boundary_trace,
    build_grid,
    resample_nested,
)


# ---------------------------------------------------------------------------
# domains


def test_interval_basic_geometry():
    dom = Domain.interval(-1.0, 1.0)
    assert dom.dim == 1
    assert dom.volume == pytest.approx(2.0)
    assert dom.perimeter == pytest.approx(2.0)  # two endpoint "faces"
    assert dom.is_star_shaped_wrt_origin()


def test_offset_interval_not_star_shaped():
    assert not Domain.interval(0.5, 2.0).is_star_shaped_wrt_origin()
    assert Domain.interval(-0.25, 3.0).is_star_shaped_wrt_origin()


def test_rectangle_and_disk_geometry():
    rect = Domain.rectangle(2.0, 1.0)
    assert rect.dim == 2
    assert rect.volume == pytest.approx(2.0)
    assert rect.perimeter == pytest.approx(6.0)
    assert rect.is_star_shaped_wrt_origin()
    assert not Domain.rectangle(2.0, 1.0, center=(5.0, 0.0)).is_star_shaped_wrt_origin()

    disk = Domain.disk(1.5)
    assert disk.volume == pytest.approx(np.pi * 1.5 ** 2)
    assert disk.perimeter == pytest.approx(2 * np.pi * 1.5)
    assert Domain.disk(1.0, center=(0.5, 0.0)).is_star_shaped_wrt_origin()
    assert not Domain.disk(1.0, center=(2.0, 0.0)).is_star_shaped_wrt_origin()


def test_invalid_domains_rejected():
    with pytest.raises(ConfigurationError):
        Domain.interval(1.0, 1.0)
    with pytest.raises(ConfigurationError):
        Domain.disk(-2.0)
    with pytest.raises(ConfigurationError):
        Domain.rectangle(0.0, 1.0)


def test_contains_is_strict():
    dom = Domain.interval(-1.0, 1.0)
    pts = np.array([[-1.0], [-0.999], [0.0], [1.0], [1.5]])
    assert list(dom.contains(pts)) == [False, True, True, False, False]
    disk = Domain.disk(1.0)
    pts2 = np.array([[0.0, 0.0], [1.0, 0.0], [0.6, 0.6], [0.8, 0.0]])
    assert list(disk.contains(pts2)) == [True, False, True, True]


def test_boundary_distance_matches_hand_values():
    dom = Domain.interval(-1.0, 1.0)
    pts = np.array([[-0.875], [0.0], [0.6]])
    assert dom.boundary_distance(pts) == pytest.approx([0.125, 1.0, 0.4])

    disk = Domain.disk(2.0, center=(1.0, 0.0))
    pts2 = np.array([[1.0, 0.0], [2.0, 0.0]])
    assert disk.boundary_distance(pts2) == pytest.approx([2.0, 1.0])

    rect = Domain.rectangle(2.0, 1.0)
    pts3 = np.array([[0.0, 0.0], [0.9, 0.4], [-0.7, 0.1]])
    assert rect.boundary_distance(pts3) == pytest.approx([0.5, 0.1, 0.3])


# ---------------------------------------------------------------------------
# grids


def test_interval_grid_nodes_are_cell_centers():
    grid = build_grid(Domain.interval(-1.0, 1.0), 8)
    assert grid.h == (0.25,)
    expected = -1.0 + (np.arange(8) + 0.5) * 0.25
    assert grid.x[:, 0] == pytest.approx(expected)
    assert grid.d == pytest.approx(np.minimum(expected + 1.0, 1.0 - expected))
    assert grid.weights == pytest.approx(np.full(8, 0.25))
    assert grid.integrate(np.ones(8)) == pytest.approx(2.0)


def test_grid_below_minimum_resolution_rejected():
    with pytest.raises(ConfigurationError):
        build_grid(Domain.interval(-1.0, 1.0), 5)


def test_grid_interior_distance_positive():
    for dom in (Domain.interval(-1.0, 1.0), Domain.disk(1.0), Domain.rectangle(2.0, 1.0)):
        grid = build_grid(dom, 16)
        assert np.all(grid.d > 0)
        assert np.all(dom.contains(grid.x))


def test_disk_volume_error_shrinks_monotonically():
    errors = []
    for res in (16, 32, 64):
        grid = build_grid(Domain.disk(1.0), res)
        errors.append(abs(grid.weights.sum() - np.pi))
    assert errors[0] > errors[1] > errors[2]


def test_rectangle_cells_tile_exactly():
    grid = build_grid(Domain.rectangle(2.0, 1.0), 16)
    assert grid.weights.sum() == pytest.approx(2.0, rel=1e-12)
    assert grid.h == pytest.approx((0.125, 0.0625))


def test_grid_norms():
    grid = build_grid(Domain.interval(-1.0, 1.0), 32)
    u = np.ones(grid.n_nodes)
    assert grid.sup_norm(u) == 1.0
    assert grid.lr_norm(u, 2.0) == pytest.approx(np.sqrt(2.0))
    assert grid.lr_norm(-3.0 * u, 1.0) == pytest.approx(6.0)


# ---------------------------------------------------------------------------
# boundary traces


def test_interval_trace_is_two_endpoints():
    grid = build_grid(Domain.interval(-1.0, 1.0), 16)
    tr = boundary_trace(grid)
    assert sorted(tr.points[:, 0]) == pytest.approx([-1.0, 1.0])
    assert tr.weights == pytest.approx([1.0, 1.0])
    assert tr.x_dot_nu == pytest.approx([1.0, 1.0])
    assert not tr.corners_dropped


def test_disk_trace_weights_sum_to_perimeter():
    grid = build_grid(Domain.disk(1.0), 32)
    tr = boundary_trace(grid)
    assert tr.points.shape[0] >= 256
    assert tr.weights.sum() == pytest.approx(2 * np.pi, rel=1e-2)
    assert np.linalg.norm(tr.normals, axis=1) == pytest.approx(np.ones(len(tr.points)))
    assert tr.x_dot_nu == pytest.approx(np.ones(len(tr.points)))


def test_rectangle_trace_avoids_corners():
    grid = build_grid(Domain.rectangle(2.0, 1.0), 16)
    tr = boundary_trace(grid)
    assert tr.corners_dropped
    assert tr.weights.sum() == pytest.approx(6.0, rel=1e-12)
    corner_like = (np.abs(np.abs(tr.points[:, 0]) - 1.0) < 1e-12) & (
        np.abs(np.abs(tr.points[:, 1]) - 0.5) < 1e-12)
    assert not corner_like.any()
    assert np.all(tr.x_dot_nu > 0)  # centered rectangle is star-shaped


def test_offcenter_trace_x_dot_nu_sign():
    grid = build_grid(Domain.disk(1.0, center=(0.5, 0.0)), 16)
    tr = boundary_trace(grid)
    # star-shaped with respect to the origin, so x . nu stays positive
    assert grid.domain.is_star_shaped_wrt_origin()
    assert np.all(tr.x_dot_nu > 0)


# ---------------------------------------------------------------------------
# nested resampling


def test_resample_interval_round_trip_is_identity():
    coarse = build_grid(Domain.interval(-1.0, 1.0), 32)
    fine = build_grid(Domain.interval(-1.0, 1.0), 64)
    rng = np.random.default_rng(7)
    u = rng.uniform(0.5, 2.0, coarse.n_nodes)
    up = resample_nested(coarse, u, fine)
    assert up.shape == (fine.n_nodes,)
    assert np.max(up) == pytest.approx(np.max(u))
    assert np.all(up > 0)
    back = resample_nested(fine, up, coarse)
    assert back == pytest.approx(u, abs=1e-14)


def test_resample_disk_preserves_sign_and_bound():
    coarse = build_grid(Domain.disk(1.0), 16)
    fine = build_grid(Domain.disk(1.0), 32)
    u = 1.0 + coarse.d
    up = resample_nested(coarse, u, fine)
    assert np.all(up >= 0)
    assert np.max(up) <= np.max(u) + 1e-14
    down = resample_nested(fine, 1.0 + fine.d, coarse)
    assert np.all(down >= 0)
    assert np.max(down) <= np.max(1.0 + fine.d) + 1e-14
