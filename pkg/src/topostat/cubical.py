"""Binary volumes, the signed Euclidean distance transform, and sublevel
cubical filtrations of 2D/3D grids (vertex construction: voxels are the
vertices, every higher cube takes the max over its vertices)."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DegenerateVolumeError, InvalidInputError
from .filtration import Filtration


class BinaryVolume:
    """2D or 3D voxel grid of two phases: grain (True) and pore (False)."""

    def __init__(self, phase, resolution=None):
        phase = np.asarray(phase, dtype=bool)
        if phase.ndim not in (2, 3) or phase.size == 0:
            raise InvalidInputError("phase must be a non-empty 2D or 3D array")
        self.phase = phase
        self.extents = phase.shape
        self.resolution = resolution

    def invert(self):
        return BinaryVolume(~self.phase, resolution=self.resolution)

    def porosity(self):
        """Pore (background) fraction."""
        return 1.0 - float(self.phase.mean())


def sedt(volume: BinaryVolume) -> np.ndarray:
    """Signed Euclidean distance transform.

    Each voxel gets the exact center-to-center Euclidean distance (in
    voxel units) to the nearest voxel of the opposite phase, negative
    inside grains and positive inside pores.
    """
    if isinstance(volume, np.ndarray):
        volume = BinaryVolume(volume)
    g = volume.phase
    if g.all() or not g.any():
        raise DegenerateVolumeError("volume contains a single phase")
    # edt(mask) = distance from each nonzero voxel to the nearest zero voxel
    return ndimage.distance_transform_edt(~g) - ndimage.distance_transform_edt(g)


def _span_max(grid, axes):
    out = grid
    for ax in axes:
        lo = [slice(None)] * grid.ndim
        hi = [slice(None)] * grid.ndim
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        out = np.maximum(out[tuple(lo)], out[tuple(hi)])
    return out


def build_cubical(values) -> Filtration:
    """Sublevel cubical filtration of a 2D or 3D real-valued grid.

    Cells are ordered by (value, dimension, stable construction index).
    """
    grid = np.asarray(values, dtype=np.float64)
    if grid.size == 0:
        raise InvalidInputError("empty grid")
    if grid.ndim == 2:
        return _build_cubical_2d(grid)
    if grid.ndim == 3:
        return _build_cubical_3d(grid)
    raise InvalidInputError("grid must be 2D or 3D")


def _flat(shape, *idx):
    return np.ravel_multi_index(idx, shape)


def _build_cubical_2d(grid):
    n0, n1 = grid.shape
    V = n0 * n1

    cell_vals = [grid.ravel()]
    cell_dims = [np.zeros(V, dtype=np.int8)]
    boundaries = [np.empty((V, 0), dtype=np.int64)]

    ii, jj = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")

    # edges along axis 0 and axis 1, square faces
    e0_vals = _span_max(grid, [0]).ravel()
    i0, j0 = ii[:-1, :].ravel(), jj[:-1, :].ravel()
    e0_bnd = np.column_stack([_flat(grid.shape, i0, j0), _flat(grid.shape, i0 + 1, j0)])

    e1_vals = _span_max(grid, [1]).ravel()
    i1, j1 = ii[:, :-1].ravel(), jj[:, :-1].ravel()
    e1_bnd = np.column_stack([_flat(grid.shape, i1, j1), _flat(grid.shape, i1, j1 + 1)])

    E0, E1 = len(e0_vals), len(e1_vals)
    cell_vals += [e0_vals, e1_vals]
    cell_dims += [np.ones(E0, dtype=np.int8), np.ones(E1, dtype=np.int8)]
    boundaries += [e0_bnd, e1_bnd]

    sq_vals = _span_max(grid, [0, 1]).ravel()
    isq, jsq = ii[:-1, :-1].ravel(), jj[:-1, :-1].ravel()

    def e0_id(i, j):
        return V + i * n1 + j

    def e1_id(i, j):
        return V + E0 + i * (n1 - 1) + j

    sq_bnd = np.column_stack([
        e0_id(isq, jsq), e0_id(isq, jsq + 1), e1_id(isq, jsq), e1_id(isq + 1, jsq),
    ])
    cell_vals.append(sq_vals)
    cell_dims.append(np.full(len(sq_vals), 2, dtype=np.int8))
    boundaries.append(sq_bnd)

    return _assemble(cell_vals, cell_dims, boundaries)


def _build_cubical_3d(grid):
    n0, n1, n2 = grid.shape
    shape = grid.shape
    V = n0 * n1 * n2

    def grid_of(i_extent):
        return np.indices(i_extent)

    cell_vals = [grid.ravel()]
    cell_dims = [np.zeros(V, dtype=np.int8)]
    boundaries = [np.empty((V, 0), dtype=np.int64)]

    axes = [0, 1, 2]
    edge_offsets = {}
    off = V
    edge_bnds = []
    for a in axes:
        ext = [n0, n1, n2]
        ext[a] -= 1
        idx = grid_of(ext)
        lo = _flat(shape, *idx)
        step = [0, 0, 0]
        step[a] = 1
        hi = _flat(shape, idx[0] + step[0], idx[1] + step[1], idx[2] + step[2])
        vals = _span_max(grid, [a]).ravel()
        edge_offsets[a] = (off, tuple(ext))
        off += vals.size
        cell_vals.append(vals)
        cell_dims.append(np.ones(vals.size, dtype=np.int8))
        edge_bnds.append(np.column_stack([lo.ravel(), hi.ravel()]))
    boundaries += edge_bnds

    def edge_id(a, i, j, k):
        base, ext = edge_offsets[a]
        return base + (i * ext[1] + j) * ext[2] + k

    face_offsets = {}
    face_bnds = []
    for a in axes:  # face normal to axis a spans the other two axes
        b, c = [ax for ax in axes if ax != a]
        ext = [n0, n1, n2]
        ext[b] -= 1
        ext[c] -= 1
        idx = grid_of(ext)
        i, j, k = idx[0], idx[1], idx[2]
        step_b = [0, 0, 0]
        step_b[b] = 1
        step_c = [0, 0, 0]
        step_c[c] = 1
        bnd = np.column_stack([
            edge_id(b, i, j, k).ravel(),
            edge_id(b, i + step_c[0], j + step_c[1], k + step_c[2]).ravel(),
            edge_id(c, i, j, k).ravel(),
            edge_id(c, i + step_b[0], j + step_b[1], k + step_b[2]).ravel(),
        ])
        vals = _span_max(grid, [b, c]).ravel()
        face_offsets[a] = (off, tuple(ext))
        off += vals.size
        cell_vals.append(vals)
        cell_dims.append(np.full(vals.size, 2, dtype=np.int8))
        face_bnds.append(bnd)
    boundaries += face_bnds

    def face_id(a, i, j, k):
        base, ext = face_offsets[a]
        return base + (i * ext[1] + j) * ext[2] + k

    ext = (n0 - 1, n1 - 1, n2 - 1)
    if min(ext) > 0:
        idx = grid_of(list(ext))
        i, j, k = idx[0].ravel(), idx[1].ravel(), idx[2].ravel()
        bnd = np.column_stack([
            face_id(0, i, j, k), face_id(0, i + 1, j, k),
            face_id(1, i, j, k), face_id(1, i, j + 1, k),
            face_id(2, i, j, k), face_id(2, i, j, k + 1),
        ])
        vals = _span_max(grid, [0, 1, 2]).ravel()
        cell_vals.append(vals)
        cell_dims.append(np.full(vals.size, 3, dtype=np.int8))
        boundaries.append(bnd)

    return _assemble(cell_vals, cell_dims, boundaries)


def _assemble(cell_vals, cell_dims, boundaries):
    values = np.concatenate(cell_vals)
    dims = np.concatenate(cell_dims)
    n = len(values)
    stable = np.arange(n)
    order = np.lexsort((stable, dims, values))
    posmap = np.empty(n, dtype=np.int64)
    posmap[order] = np.arange(n)

    counts = np.array([b.shape[1] for b in boundaries])
    widths = np.concatenate([np.full(len(v), c, dtype=np.int64)
                             for v, c in zip(cell_vals, counts)])
    widths = widths[order]
    bptr = np.zeros(n + 1, dtype=np.int64)
    bptr[1:] = np.cumsum(widths)
    bidx = np.empty(bptr[-1], dtype=np.int64)

    # remap each block's boundary to sorted positions, then scatter
    all_bnd = [np.sort(posmap[b], axis=1) if b.shape[1] else b for b in boundaries]
    starts = bptr[:-1]
    offset = 0
    for v, b in zip(cell_vals, all_bnd):
        m = len(v)
        if b.shape[1]:
            dest = starts[posmap[offset:offset + m]]
            for col in range(b.shape[1]):
                bidx[dest + col] = b[:, col]
        offset += m

    return Filtration(
        dims=dims[order],
        values=values[order],
        boundary_ptr=bptr,
        boundary_idx=bidx,
        kind="cubical",
    )
