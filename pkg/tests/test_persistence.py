import numpy as np
import pytest

from topostat import (InvalidFiltrationError, PointCloud, betti_at,
                      build_cubical, build_rips, compute_persistence)
from topostat.filtration import Filtration

from oracles import betti_numbers, mst_edge_weights, oracle_diagram

FIVE_POINTS = [(0, 0), (1, 0), (1.3, 1), (0.4, 1.3), (-1.05, 1)]


@pytest.fixture(scope="module")
def five_point_diagram():
    f = build_rips(PointCloud(FIVE_POINTS), max_dim=2, max_scale=2.0)
    return compute_persistence(f, max_dim=1)


def test_five_point_dim1(five_point_diagram):
    loops = five_point_diagram.in_dimension(1)
    assert loops.shape == (1, 2)
    assert loops[0, 0] == pytest.approx(1.3601, abs=1e-4)
    assert loops[0, 1] == pytest.approx(1.4318, abs=1e-4)


def test_five_point_dim0_matches_mst(five_point_diagram):
    comps = five_point_diagram.in_dimension(0)
    deaths = np.sort(comps[:, 1])
    assert np.isinf(deaths[-1]) and np.count_nonzero(np.isinf(deaths)) == 1
    assert deaths[:-1] == pytest.approx([0.9487, 1.0, 1.0440, 1.4500], abs=1e-4)
    assert deaths[:-1] == pytest.approx(mst_edge_weights(FIVE_POINTS))


def test_single_vertex():
    f = build_rips(PointCloud([(0.0, 0.0)]), max_dim=1, max_scale=1.0)
    d = compute_persistence(f, max_dim=1)
    assert d.features() == [(0, 0.0, np.inf)]


def test_betti_at(five_point_diagram):
    assert betti_at(five_point_diagram, 0, 1.44) == 2
    assert betti_at(five_point_diagram, 1, 1.40) == 1
    assert betti_at(five_point_diagram, 5, 0.5) == 0


def test_zero_persistence_pairs_dropped():
    # duplicate points create cells entering at equal values; no feature
    # may have death == birth
    f = build_rips(PointCloud([(0, 0), (0, 0), (1, 0)]), max_dim=2, max_scale=2.0)
    d = compute_persistence(f, max_dim=1)
    finite = np.isfinite(d.deaths)
    assert np.all(d.deaths[finite] > d.births[finite])


def test_malformed_filtration_rejected():
    # edge referencing a later cell
    f = Filtration(dims=np.array([1, 0, 0], dtype=np.int8),
                   values=np.zeros(3),
                   boundary_ptr=np.array([0, 2, 2, 2]),
                   boundary_idx=np.array([1, 2]))
    with pytest.raises(InvalidFiltrationError):
        compute_persistence(f, max_dim=1)
    # decreasing values
    f = Filtration(dims=np.array([0, 0], dtype=np.int8),
                   values=np.array([1.0, 0.0]),
                   boundary_ptr=np.array([0, 0, 0]),
                   boundary_idx=np.array([], dtype=np.int64))
    with pytest.raises(InvalidFiltrationError):
        compute_persistence(f, max_dim=0)


def test_mst_property_random_clouds():
    rng = np.random.default_rng(21)
    for _ in range(5):
        pts = rng.uniform(size=(9, 2))
        f = build_rips(PointCloud(pts), max_dim=1, max_scale=3.0)
        d = compute_persistence(f, max_dim=0)
        deaths = np.sort(d.in_dimension(0)[:, 1])
        assert np.count_nonzero(np.isinf(deaths)) == 1
        assert deaths[:-1] == pytest.approx(mst_edge_weights(pts))


def test_rips_matches_persistent_betti_oracle():
    rng = np.random.default_rng(3)
    for _ in range(3):
        pts = rng.uniform(size=(6, 2))
        f = build_rips(PointCloud(pts), max_dim=2, max_scale=1.5)
        d = compute_persistence(f, max_dim=1)
        assert sorted(d.features()) == pytest.approx(oracle_diagram(f, 1))


def test_betti_at_matches_rank_oracle():
    rng = np.random.default_rng(17)
    for _ in range(3):
        pts = rng.uniform(size=(7, 2))
        f = build_rips(PointCloud(pts), max_dim=2, max_scale=2.0)
        d = compute_persistence(f, max_dim=2)
        for t in np.linspace(0.0, 1.5, 7):
            expect = betti_numbers(f, t, 2)
            got = [betti_at(d, k, t) for k in range(3)]
            assert got == expect, f"betti mismatch at t={t}"


def test_cubical_matches_persistent_betti_oracle():
    rng = np.random.default_rng(8)
    for _ in range(4):
        grid = rng.integers(0, 4, size=(4, 4)).astype(float)
        f = build_cubical(grid)
        d = compute_persistence(f, max_dim=1)
        assert sorted(d.features()) == pytest.approx(oracle_diagram(f, 1))
