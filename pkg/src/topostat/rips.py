"""Vietoris-Rips filtrations of Euclidean point clouds."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InvalidInputError
from .filtration import Filtration


class PointCloud:
    """Finite set of points in a common dimension d >= 1."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError("point cloud must be a non-empty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("non-finite coordinate in point cloud")
        self.points = pts

    def __len__(self):
        return len(self.points)

    def distance_matrix(self):
        return squareform(pdist(self.points)) if len(self) > 1 else np.zeros((1, 1))


@lru_cache(maxsize=8)
def _triples(n):
    return np.array(list(combinations(range(n), 3)), dtype=np.int64)


def build_rips(cloud: PointCloud, max_dim: int, max_scale: float) -> Filtration:
    """Rips filtration up to simplex dimension ``max_dim`` (1 or 2).

    A simplex enters at the maximum pairwise distance among its vertices
    (vertices at 0); simplices with any pairwise distance exceeding
    ``max_scale`` are omitted. Inclusion uses a closed threshold
    (distance <= max_scale). Cells are ordered by (value, dimension,
    lexicographic vertex ids).
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    if max_dim not in (1, 2):
        raise InvalidInputError("max_dim must be 1 or 2")
    if not (max_scale > 0):
        raise InvalidInputError("max_scale must be positive")

    n = len(cloud)
    dmat = cloud.distance_matrix()

    # vertices
    cell_dims = [np.zeros(n, dtype=np.int8)]
    cell_vals = [np.zeros(n)]
    vert_keys = [np.column_stack([np.arange(n), -np.ones((n, 2), dtype=np.int64)])]

    iu, ju = np.triu_indices(n, 1)
    evals = dmat[iu, ju]
    keep = evals <= max_scale
    ei, ej, evals = iu[keep], ju[keep], evals[keep]
    n_edges = len(ei)
    cell_dims.append(np.ones(n_edges, dtype=np.int8))
    cell_vals.append(evals)
    vert_keys.append(np.column_stack([ei, ej, -np.ones(n_edges, dtype=np.int64)]))

    tris = np.empty((0, 3), dtype=np.int64)
    tvals = np.empty(0)
    if max_dim == 2 and n >= 3:
        tris = _triples(n)
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        tvals = np.maximum(np.maximum(dmat[a, b], dmat[a, c]), dmat[b, c])
        keep = tvals <= max_scale
        tris, tvals = tris[keep], tvals[keep]
        cell_dims.append(np.full(len(tris), 2, dtype=np.int8))
        cell_vals.append(tvals)
        vert_keys.append(tris)

    dims = np.concatenate(cell_dims)
    values = np.concatenate(cell_vals)
    keys = np.vstack(vert_keys)

    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0], dims, values))
    dims, values, keys = dims[order], values[order], keys[order]

    # positions of vertices and edges in the sorted order, for boundary lookup
    pos = np.arange(len(dims))
    vert_pos = np.empty(n, dtype=np.int64)
    vsel = dims == 0
    vert_pos[keys[vsel, 0]] = pos[vsel]
    esel = dims == 1
    edge_pos = np.full(n * n, -1, dtype=np.int64)
    edge_pos[keys[esel, 0] * n + keys[esel, 1]] = pos[esel]

    bptr = np.zeros(len(dims) + 1, dtype=np.int64)
    bptr[1:] = np.cumsum(np.where(dims == 0, 0, np.where(dims == 1, 2, 3)))
    bidx = np.empty(bptr[-1], dtype=np.int64)

    eb = np.sort(np.column_stack([vert_pos[keys[esel, 0]], vert_pos[keys[esel, 1]]]), axis=1)
    bidx_view = bidx
    estarts = bptr[:-1][esel]
    bidx_view[estarts] = eb[:, 0]
    bidx_view[estarts + 1] = eb[:, 1]

    tsel = dims == 2
    if np.any(tsel):
        ta, tb, tc = keys[tsel, 0], keys[tsel, 1], keys[tsel, 2]
        tbnd = np.sort(
            np.column_stack(
                [edge_pos[ta * n + tb], edge_pos[ta * n + tc], edge_pos[tb * n + tc]]
            ),
            axis=1,
        )
        tstarts = bptr[:-1][tsel]
        bidx_view[tstarts] = tbnd[:, 0]
        bidx_view[tstarts + 1] = tbnd[:, 1]
        bidx_view[tstarts + 2] = tbnd[:, 2]

    return Filtration(
        dims=dims,
        values=values,
        boundary_ptr=bptr,
        boundary_idx=bidx,
        kind="rips",
        cell_ids=[tuple(int(v) for v in row if v >= 0) for row in keys],
    )
