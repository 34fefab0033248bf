import numpy as np
import pytest

from topostat import (GridSpec, InvalidCapError, InvalidInputError,
                      InvalidPersistenceError, PersistenceDiagram,
                      binning_vectorize, corner_mask, persistence_image,
                      transform_diagram, weight_value)
from topostat.images import pooled_grid

GRID = GridSpec((0.0, 2.0), (0.0, 2.0), (40, 40))


def test_grid_validation():
    with pytest.raises(InvalidInputError):
        GridSpec((1.0, 1.0), (0.0, 2.0), (40, 40))
    with pytest.raises(InvalidInputError):
        GridSpec((0.0, 2.0), (0.0, 2.0), (1, 40))


def test_grid_geometry():
    assert GRID.pixel_width() == pytest.approx(0.05)
    assert GRID.default_bandwidth() == pytest.approx(0.075)
    assert GRID.x_centers()[0] == pytest.approx(0.025)
    assert GRID.y_centers()[-1] == pytest.approx(1.975)


def test_transform_diagram():
    d = PersistenceDiagram([1], [0.3831], [1.7371])
    pts = transform_diagram(d, 1, inf_cap=10.0)
    assert pts[0] == pytest.approx([0.3831, 1.3540])

    d = PersistenceDiagram([0], [0.0], [np.inf])
    pts = transform_diagram(d, 0, inf_cap=2.0)
    assert pts[0] == pytest.approx([0.0, 2.0])

    assert transform_diagram(PersistenceDiagram([], [], []), 1, 1.0).shape == (0, 2)


def test_transform_invalid_cap():
    d = PersistenceDiagram([1, 1], [0.0, 0.0], [1.5, np.inf])
    with pytest.raises(InvalidCapError):
        transform_diagram(d, 1, inf_cap=1.0)
    with pytest.raises(InvalidCapError):
        transform_diagram(d, 1, inf_cap=np.inf)


def test_weight_values():
    assert weight_value("linear", 0.2, 0.0) == 0.0
    assert weight_value("constant", -3.0, 17.0) == 1.0
    assert weight_value("soft_arctan", 0.0, 4.0) == pytest.approx(0.7853981634)
    assert weight_value("hard_arctan", 0.0, 1.0) == pytest.approx(np.arctan(1.0))
    with pytest.raises(InvalidPersistenceError):
        weight_value("linear", 0.0, -0.1)
    with pytest.raises(InvalidInputError):
        weight_value("cubic", 0.0, 1.0)


def test_weight_bounds():
    v = np.linspace(0, 50, 101)
    soft = np.array([weight_value("soft_arctan", 0, x) for x in v])
    hard = np.array([weight_value("hard_arctan", 0, x) for x in v])
    assert np.all(np.diff(soft) >= 0) and np.all(soft <= np.pi / 2)
    assert np.all(hard <= v)


def test_image_empty():
    img = persistence_image([], GRID, "constant", 0.075)
    assert img.values.shape == (40, 40) and not img.values.any()


def test_image_unit_mass():
    img = persistence_image([(1.0, 1.0)], GRID, "constant", 0.075)
    assert img.values.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(img.values >= 0)


def test_image_additivity():
    one = persistence_image([(1.0, 1.0)], GRID, "constant", 0.075)
    two = persistence_image([(1.0, 1.0), (1.0, 1.0)], GRID, "constant", 0.075)
    assert np.allclose(two.values, 2.0 * one.values, atol=0)

    rng = np.random.default_rng(1)
    p1 = rng.uniform(0.2, 1.8, (3, 2))
    p2 = rng.uniform(0.2, 1.8, (4, 2))
    a = persistence_image(p1, GRID, "linear", 0.1).values
    b = persistence_image(p2, GRID, "linear", 0.1).values
    ab = persistence_image(np.vstack([p1, p2]), GRID, "linear", 0.1).values
    assert np.allclose(ab, a + b, atol=1e-15)


def test_image_mass_converges_to_weight():
    # grid covering (u +- 8h, v +- 8h) captures w(u, v) of total mass
    u, v, h = 0.7, 1.1, 0.05
    grid = GridSpec((u - 8 * h, u + 8 * h), (v - 8 * h, v + 8 * h), (32, 32))
    img = persistence_image([(u, v)], grid, "soft_arctan", h)
    assert img.values.sum() == pytest.approx(weight_value("soft_arctan", u, v), abs=1e-9)


def test_resolution_consistency_block_sum():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.2, 1.8, (5, 2))
    h = 0.075
    fine = persistence_image(pts, GridSpec((0, 2), (0, 2), (80, 80)), "constant", h)
    coarse = persistence_image(pts, GRID, "constant", h)
    block = fine.values.reshape(40, 2, 40, 2).sum(axis=(1, 3))
    assert np.allclose(block, coarse.values, atol=1e-9)


def test_image_orientation():
    # a high-persistence point lands at a high row index (ix birth, iy pers)
    img = persistence_image([(0.2, 1.8)], GRID, "constant", 0.05)
    iy, ix = np.unravel_index(np.argmax(img.values), img.values.shape)
    assert iy > 30 and ix < 10


def test_binning():
    grid = GridSpec((0.0, 1.0), (0.0, 1.0), (2, 2))
    img = binning_vectorize([(0.25, 0.25), (0.75, 0.75), (0.8, 0.9), (0.9, 0.6)], grid)
    assert img.values[0, 0] == 1 and img.values[1, 1] == 3
    assert img.dropped == 0
    # shared interior edge goes to the lower-index pixel
    img = binning_vectorize([(0.5, 0.25)], grid)
    assert img.values[0, 0] == 1
    # out-of-grid points are dropped and counted
    img = binning_vectorize([(2.0, 0.5), (0.5, 0.5)], grid)
    assert img.values.sum() == 1 and img.dropped == 1


def test_corner_mask():
    mask = corner_mask(GRID, cap=2.0)
    assert mask[39, 39]          # center (1.975, 1.975): 3.95 > 2
    assert not mask[0, 0]        # center (0.025, 0.025)
    assert not corner_mask(GRID, cap=1e9).any()
    lit = corner_mask(GRID, cap=2.0, mode="literal")
    assert lit[39, 0] and not lit[0, 39]  # keeps birth >= persistence
    with pytest.raises(InvalidInputError):
        corner_mask(GRID, cap=-1.0)


def test_pooled_grid():
    pts = [np.array([[0.5, 1.0]]), np.array([[1.5, 2.0]])]
    grid = pooled_grid(pts, (40, 40))
    assert grid.birth_range[0] <= 0.0 and grid.birth_range[1] >= 1.5
    assert grid.pers_range[0] == 0.0 and grid.pers_range[1] >= 2.0
    # negative births (SEDT data) extend the lower bound
    grid = pooled_grid([np.array([[-3.0, 1.0], [1.0, 2.0]])], (20, 20))
    assert grid.birth_range[0] < -3.0
    with pytest.raises(InvalidInputError):
        pooled_grid([np.empty((0, 2))], (20, 20))
