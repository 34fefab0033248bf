"""Persistence images: fixed-grid rasterization of transformed diagrams.

A diagram is first transformed to (birth, persistence) pairs. Each pair
contributes an isotropic Gaussian (bandwidth h, unit total mass) scaled by
a weight of its persistence; a pixel's value is the exact integral of the
resulting surface over the pixel rectangle, computed in closed form from
normal-CDF differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .diagram import PersistenceDiagram
from .errors import InvalidCapError, InvalidInputError, InvalidPersistenceError

WEIGHT_KINDS = ("constant", "soft_arctan", "hard_arctan", "linear")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid over the (birth, persistence) plane."""
    birth_range: tuple      # (b_min, b_max)
    pers_range: tuple       # (p_min, p_max)
    resolution: tuple       # (n_x, n_y)

    def __post_init__(self):
        b0, b1 = self.birth_range
        p0, p1 = self.pers_range
        nx, ny = self.resolution
        if not (b1 > b0 and p1 > p0):
            raise InvalidInputError("grid ranges must be non-degenerate")
        if nx < 2 or ny < 2:
            raise InvalidInputError("grid resolution must be >= 2 per axis")

    @property
    def nx(self):
        return self.resolution[0]

    @property
    def ny(self):
        return self.resolution[1]

    def x_edges(self):
        return np.linspace(self.birth_range[0], self.birth_range[1], self.nx + 1)

    def y_edges(self):
        return np.linspace(self.pers_range[0], self.pers_range[1], self.ny + 1)

    def x_centers(self):
        e = self.x_edges()
        return 0.5 * (e[:-1] + e[1:])

    def y_centers(self):
        e = self.y_edges()
        return 0.5 * (e[:-1] + e[1:])

    def pixel_width(self):
        return (self.birth_range[1] - self.birth_range[0]) / self.nx

    def default_bandwidth(self):
        """1.5 pixel widths, the default smoothing rule."""
        return 1.5 * self.pixel_width()

    def to_dict(self):
        return {
            "birth_range": list(self.birth_range),
            "pers_range": list(self.pers_range),
            "resolution": list(self.resolution),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["birth_range"]), tuple(d["pers_range"]), tuple(d["resolution"]))


@dataclass
class PersistenceImage:
    """Raster values plus the geometry/weight metadata needed to align
    images across an experiment. ``values[iy, ix]`` with ix the birth axis."""
    grid: GridSpec
    dim: int
    weight: str
    bandwidth: float | None
    values: np.ndarray
    dropped: int = 0
    inf_cap: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise InvalidInputError("image shape does not match grid resolution")

    def same_geometry(self, other):
        return (
            self.grid == other.grid
            and self.dim == other.dim
            and self.weight == other.weight
            and self.bandwidth == other.bandwidth
        )


def transform_diagram(d: PersistenceDiagram, dim: int, inf_cap: float):
    """(birth, death - birth) pairs of one dimension; infinite deaths are
    replaced by ``inf_cap`` before transforming."""
    bd = d.in_dimension(dim)
    if len(bd) == 0:
        return np.empty((0, 2))
    births, deaths = bd[:, 0], bd[:, 1]
    finite = np.isfinite(deaths)
    if np.any(~finite):
        if not np.isfinite(inf_cap):
            raise InvalidCapError("inf_cap must be finite when essential classes exist")
        if np.any(deaths[finite] > inf_cap) if np.any(finite) else False:
            raise InvalidCapError("inf_cap below a finite death")
        deaths = np.where(finite, deaths, inf_cap)
    elif np.isfinite(inf_cap) and np.any(deaths > inf_cap):
        raise InvalidCapError("inf_cap below a finite death")
    return np.column_stack([births, deaths - births])


def weight_value(kind: str, u: float, v: float) -> float:
    """Per-feature weight on (birth u, persistence v)."""
    return float(_weights(kind, np.asarray(u, dtype=float), np.asarray(v, dtype=float)))


def _weights(kind, u, v):
    if np.any(np.asarray(v) < 0):
        raise InvalidPersistenceError("persistence must be non-negative")
    if kind == "constant":
        return np.ones_like(np.asarray(v, dtype=float))
    if kind == "soft_arctan":
        return np.arctan(0.5 * np.sqrt(v))
    if kind == "hard_arctan":
        return np.arctan(v)
    if kind == "linear":
        return np.asarray(v, dtype=float)
    raise InvalidInputError(f"unknown weight kind {kind!r}")


def persistence_image(points, grid: GridSpec, weight: str, h: float,
                      dim: int = 1, inf_cap=None) -> PersistenceImage:
    """Gaussian persistence image of transformed (u, v) points.

    Each pixel value is w(u,v) * [Phi((x2-u)/h) - Phi((x1-u)/h)] *
    [Phi((y2-v)/h) - Phi((y1-v)/h)] summed over points.
    """
    if not (h > 0):
        raise InvalidInputError("bandwidth must be positive")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    values = np.zeros((grid.ny, grid.nx))
    if len(pts):
        w = _weights(weight, pts[:, 0], pts[:, 1])
        xe = grid.x_edges()
        ye = grid.y_edges()
        cx = ndtr((xe[None, :] - pts[:, 0, None]) / h)   # (n, nx+1)
        cy = ndtr((ye[None, :] - pts[:, 1, None]) / h)
        dx = np.diff(cx, axis=1)
        dy = np.diff(cy, axis=1) * w[:, None]
        values = dy.T @ dx                                # (ny, nx)
    return PersistenceImage(grid=grid, dim=dim, weight=weight, bandwidth=float(h),
                            values=values, inf_cap=inf_cap)


def binning_vectorize(points, grid: GridSpec, dim: int = 1) -> PersistenceImage:
    """Count points per pixel. Pixels are half-open with shared edges
    assigned to the lower-index pixel; out-of-grid points are dropped and
    counted in ``dropped``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    values = np.zeros((grid.ny, grid.nx))
    dropped = 0
    if len(pts):
        xe, ye = grid.x_edges(), grid.y_edges()
        ix = np.searchsorted(xe, pts[:, 0], side="left") - 1
        iy = np.searchsorted(ye, pts[:, 1], side="left") - 1
        # the very first edge is closed on the left
        ix[pts[:, 0] == xe[0]] = 0
        iy[pts[:, 1] == ye[0]] = 0
        ok = (ix >= 0) & (ix < grid.nx) & (iy >= 0) & (iy < grid.ny)
        dropped = int(np.count_nonzero(~ok))
        np.add.at(values, (iy[ok], ix[ok]), 1.0)
    return PersistenceImage(grid=grid, dim=dim, weight="constant", bandwidth=None,
                            values=values, dropped=dropped)


def corner_mask(grid: GridSpec, cap: float, mode: str = "antidiagonal") -> np.ndarray:
    """Boolean (ny, nx) matrix, True where a pixel is excluded.

    ``antidiagonal`` excludes pixels whose center satisfies
    birth + persistence > cap (empty for diagrams with max death <= cap).
    ``literal`` keeps only pixels with birth >= persistence.
    """
    if not (cap > 0):
        raise InvalidInputError("cap must be positive")
    bx = grid.x_centers()[None, :]
    py = grid.y_centers()[:, None]
    if mode == "antidiagonal":
        return (bx + py) > cap
    if mode == "literal":
        return bx < py
    raise InvalidInputError(f"unknown corner mask mode {mode!r}")


def pooled_grid(pointsets, resolution, pad_factor=3.0):
    """Shared grid covering all transformed diagrams of one experiment.

    Range is [min birth, max birth] x [0, max persistence] (lower birth
    bound clamped to 0 when all births are non-negative), padded by
    ``pad_factor`` default bandwidths and then frozen.
    """
    pts = [np.asarray(p).reshape(-1, 2) for p in pointsets if len(p)]
    if not pts:
        raise InvalidInputError("no points to build a grid from")
    allp = np.vstack(pts)
    b_lo = min(0.0, float(allp[:, 0].min()))
    b_hi = float(allp[:, 0].max())
    p_hi = float(allp[:, 1].max())
    nx, ny = resolution
    if b_hi <= b_lo:
        b_hi = b_lo + 1.0
    if p_hi <= 0:
        p_hi = 1.0
    h = 1.5 * (b_hi - b_lo) / nx
    pad = pad_factor * h
    return GridSpec((b_lo - pad, b_hi + pad), (0.0, p_hi + pad), (nx, ny))
