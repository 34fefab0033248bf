"""Bottleneck and p-Wasserstein distances between persistence diagrams,
and the joint within-group loss used by the permutation test.

Matchings live on diagonally augmented point sets: every off-diagonal
point may match a point of the other diagram or its own nearest diagonal
point (L-infinity ground metric, so the diagonal cost is persistence / 2).
Essential (infinite-death) classes only match essential classes of the
other diagram at cost |birth difference|; mismatched essential counts give
an infinite distance.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .diagram import PersistenceDiagram
from .errors import InvalidInputError, InvalidLabelsError


def _split(diagram, dim):
    bd = diagram.in_dimension(dim)
    finite = bd[np.isfinite(bd[:, 1])]
    essential = np.sort(bd[~np.isfinite(bd[:, 1]), 0])
    return finite, essential


def _essential_costs(ea, eb):
    """Sorted births match in order; None when counts differ."""
    if len(ea) != len(eb):
        return None
    return np.abs(ea - eb)


def _augmented_cost(a, b):
    """(n+m) x (n+m) matrix: A points + diagonal slots vs B points +
    diagonal slots, L-infinity costs."""
    n, m = len(a), len(b)
    size = n + m
    cost = np.zeros((size, size))
    if n and m:
        diff = np.abs(a[:, None, :] - b[None, :, :])
        cost[:n, :m] = diff.max(axis=2)
    if n:
        cost[:n, m:] = ((a[:, 1] - a[:, 0]) / 2.0)[:, None]
    if m:
        cost[n:, :m] = ((b[:, 1] - b[:, 0]) / 2.0)[None, :]
    return cost


def wasserstein(a: PersistenceDiagram, b: PersistenceDiagram, dim: int, p: float = 1.0) -> float:
    """Exact p-Wasserstein distance for one homology dimension."""
    if not (np.isfinite(p) and p >= 1):
        raise InvalidInputError("p must be finite and >= 1")
    fa, ea = _split(a, dim)
    fb, eb = _split(b, dim)
    ecosts = _essential_costs(ea, eb)
    if ecosts is None:
        return np.inf
    total = float(np.sum(ecosts ** p))
    if len(fa) or len(fb):
        cost = _augmented_cost(fa, fb)
        rows, cols = linear_sum_assignment(cost ** p)
        total += float(cost[rows, cols] ** p @ np.ones(len(rows)))
    return total ** (1.0 / p)


def bottleneck(a: PersistenceDiagram, b: PersistenceDiagram, dim: int) -> float:
    """Exact bottleneck distance: binary search over candidate costs with
    a bipartite-matching feasibility check."""
    fa, ea = _split(a, dim)
    fb, eb = _split(b, dim)
    ecosts = _essential_costs(ea, eb)
    if ecosts is None:
        return np.inf
    ess = float(ecosts.max()) if len(ecosts) else 0.0
    if not (len(fa) or len(fb)):
        return ess
    cost = _augmented_cost(fa, fb)
    n, m = len(fa), len(fb)
    # diagonal-to-diagonal slots are free; only real costs are candidates
    cands = np.unique(np.concatenate([cost[:n, :].ravel() if n else np.empty(0),
                                      cost[:, :m].ravel() if m else np.empty(0),
                                      [0.0]]))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(cost, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(float(cands[lo]), ess)


def _feasible(cost, thresh):
    mask = cost <= thresh
    graph = csr_matrix(mask)
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int(np.count_nonzero(match >= 0)) == cost.shape[0]


METRICS = {
    "wasserstein": wasserstein,
    "bottleneck": lambda a, b, dim: bottleneck(a, b, dim),
}


class PairwiseDistanceCache:
    """Write-once cache of pairwise diagram distances; counts evaluations
    so reuse across permutations can be verified."""

    def __init__(self, diagrams, dim, metric="wasserstein", p=1.0):
        self.diagrams = list(diagrams)
        self.dim = dim
        self.metric = metric
        self.p = p
        self._cache = {}
        self.n_evaluations = 0

    def distance(self, i, j):
        if i == j:
            return 0.0
        key = (min(i, j), max(i, j))
        if key not in self._cache:
            a, b = self.diagrams[key[0]], self.diagrams[key[1]]
            if self.metric == "wasserstein":
                d = wasserstein(a, b, self.dim, self.p)
            elif self.metric == "bottleneck":
                d = bottleneck(a, b, self.dim)
            else:
                raise InvalidInputError(f"unknown metric {self.metric!r}")
            self._cache[key] = d
            self.n_evaluations += 1
        return self._cache[key]


def joint_loss(diagrams, group1, group2, dim, metric="wasserstein", p=1.0, cache=None):
    """Normalized sum of within-group pairwise distances for a labeling
    {I, J}: 2/(n1(n1-1)) sum_{i<j in I} d + 2/(n2(n2-1)) sum_{i<j in J} d."""
    I, J = list(group1), list(group2)
    if len(I) < 2 or len(J) < 2:
        raise InvalidLabelsError("each group needs at least 2 members")
    if set(I) & set(J):
        raise InvalidLabelsError("groups must be disjoint")
    if cache is None:
        cache = PairwiseDistanceCache(diagrams, dim, metric, p)
    total = 0.0
    for grp in (I, J):
        k = len(grp)
        s = 0.0
        for x in range(k):
            for y in range(x + 1, k):
                s += cache.distance(grp[x], grp[y])
        total += 2.0 * s / (k * (k - 1))
    return total
