"""Ordered cell complexes with per-cell filtration values.

Cells are stored in filtration order. Boundaries are kept in CSR form:
``boundary_idx[boundary_ptr[j]:boundary_ptr[j+1]]`` are the (sorted)
positions of the facets of cell ``j``. Facets always precede their coface
and have dimension exactly one less.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFiltrationError


@dataclass
class Filtration:
    dims: np.ndarray          # int8, per-cell dimension
    values: np.ndarray        # float64, non-decreasing along the order
    boundary_ptr: np.ndarray  # int64, len n+1
    boundary_idx: np.ndarray  # int64, facet positions
    kind: str = "generic"     # "rips" | "cubical" | ...
    # Optional per-cell payload (e.g. vertex tuples) for debugging.
    cell_ids: list = field(default=None, repr=False)

    def __len__(self):
        return len(self.dims)

    def max_dim(self):
        return int(self.dims.max()) if len(self.dims) else 0

    def boundary_of(self, j):
        return self.boundary_idx[self.boundary_ptr[j]:self.boundary_ptr[j + 1]]

    def cells(self):
        """Iterate (position, dim, boundary positions, value)."""
        for j in range(len(self)):
            yield j, int(self.dims[j]), self.boundary_of(j).tolist(), float(self.values[j])

    def validate(self):
        """Check the structural invariants; raise InvalidFiltrationError."""
        n = len(self.dims)
        if len(self.values) != n or len(self.boundary_ptr) != n + 1:
            raise InvalidFiltrationError("inconsistent array lengths")
        if n == 0:
            return
        if np.any(np.diff(self.values) < 0):
            raise InvalidFiltrationError("filtration values not non-decreasing")
        idx = self.boundary_idx
        if len(idx):
            # forward references: a facet must strictly precede its coface
            owner = np.repeat(np.arange(n), np.diff(self.boundary_ptr))
            if np.any(idx >= owner):
                raise InvalidFiltrationError("boundary references a later cell")
            if np.any(self.dims[idx] != self.dims[owner] - 1):
                raise InvalidFiltrationError("boundary cell dimension mismatch")
        counts = np.diff(self.boundary_ptr)
        if np.any((self.dims > 0) & (counts == 0)):
            raise InvalidFiltrationError("positive-dimensional cell with empty boundary")
