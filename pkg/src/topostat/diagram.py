"""Persistence diagrams: a multiset of (dimension, birth, death) features."""
from __future__ import annotations

import numpy as np


class PersistenceDiagram:
    """Multiset of topological features, one (birth, death) pair each.

    Deaths may be ``+inf`` for essential classes (features that never die
    inside the filtration, e.g. the last connected component).
    """

    def __init__(self, dims, births, deaths):
        dims = np.asarray(dims, dtype=np.int64)
        births = np.asarray(births, dtype=np.float64)
        deaths = np.asarray(deaths, dtype=np.float64)
        if not (dims.shape == births.shape == deaths.shape):
            raise ValueError("dims, births, deaths must have equal length")
        if np.any(deaths < births):
            raise ValueError("death < birth in persistence diagram")
        order = np.lexsort((deaths, births, dims))
        self.dims = dims[order]
        self.births = births[order]
        self.deaths = deaths[order]

    @classmethod
    def from_features(cls, features):
        """Build from an iterable of (dim, birth, death) triples."""
        feats = list(features)
        if not feats:
            return cls([], [], [])
        d, b, de = zip(*feats)
        return cls(d, b, de)

    def __len__(self):
        return len(self.dims)

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (
            np.array_equal(self.dims, other.dims)
            and np.array_equal(self.births, other.births)
            and np.array_equal(self.deaths, other.deaths)
        )

    def __repr__(self):
        return f"PersistenceDiagram({len(self)} features, dims {sorted(set(self.dims.tolist()))})"

    def features(self):
        """All features as a list of (dim, birth, death) tuples."""
        return list(zip(self.dims.tolist(), self.births.tolist(), self.deaths.tolist()))

    def in_dimension(self, dim):
        """(n, 2) array of (birth, death) for one homology dimension."""
        sel = self.dims == dim
        return np.column_stack([self.births[sel], self.deaths[sel]])

    def max_finite_death(self, dim=None):
        sel = np.isfinite(self.deaths)
        if dim is not None:
            sel &= self.dims == dim
        return float(self.deaths[sel].max()) if np.any(sel) else None


def betti_at(diagram: PersistenceDiagram, k: int, t: float) -> int:
    """Number of dim-k features alive at scale t (birth <= t < death)."""
    sel = (diagram.dims == k) & (diagram.births <= t) & (t < diagram.deaths)
    return int(np.count_nonzero(sel))
