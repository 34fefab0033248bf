"""Two-stage element-wise inference on aligned persistence images, FDR
adjustment, and the permutation-test baseline on diagram distances.

Stage I drops corner-masked pixels and pixels whose label-free filter
statistic (overall mean or sd across both groups) falls below the C-th
percentile. Stage II runs a two-sided pooled-variance t-test per remaining
pixel and adjusts the p-values with Storey q-values (or plain
Benjamini-Hochberg).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
from scipy import stats

from .distances import PairwiseDistanceCache, joint_loss
from .errors import InvalidInputError, InvalidLabelsError
from .images import GridSpec, corner_mask

STATUS_CORNER = 0
STATUS_FILTERED = 1
STATUS_TESTED = 2
STATUS_NAMES = {STATUS_CORNER: "corner-masked",
                STATUS_FILTERED: "filtered",
                STATUS_TESTED: "tested"}


@dataclass
class LabeledImageCollection:
    """Aligned persistence images with two group labels."""
    images: list
    labels: np.ndarray  # group id 1 or 2 per image

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.images) != len(self.labels):
            raise InvalidLabelsError("one label per image required")
        if not set(np.unique(self.labels)) <= {1, 2}:
            raise InvalidLabelsError("labels must be 1 or 2")
        self.n1 = int(np.count_nonzero(self.labels == 1))
        self.n2 = int(np.count_nonzero(self.labels == 2))
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidLabelsError("each group needs at least 2 images")
        first = self.images[0]
        for img in self.images[1:]:
            if not first.same_geometry(img):
                raise InvalidInputError("images do not share grid metadata")
        self.grid: GridSpec = first.grid

    def stacked(self):
        return np.stack([img.values for img in self.images])


@dataclass
class FilterConfig:
    statistic: str = "sd"          # "mean" | "sd"
    threshold_percent: float = 50.0
    corner_cap: float = np.inf
    corner_mode: str = "antidiagonal"
    adjust: str = "qvalue"         # "qvalue" | "bh"
    storey_lambda: float = 0.5

    def __post_init__(self):
        if not (0 <= self.threshold_percent < 100):
            raise InvalidInputError("threshold must be in [0, 100)")
        if self.statistic not in ("mean", "sd"):
            raise InvalidInputError("filter statistic must be 'mean' or 'sd'")


@dataclass
class TestResultGrid:
    """Per-pixel outcome of the two-stage procedure."""
    grid: GridSpec
    status: np.ndarray        # (ny, nx) int codes
    filter_stat: np.ndarray   # (ny, nx)
    t: np.ndarray             # NaN where not tested
    p: np.ndarray
    q: np.ndarray
    degenerate: np.ndarray    # tested pixels with zero pooled variance

    @property
    def m(self):
        return int(self.status.size)

    @property
    def m_tested(self):
        return int(np.count_nonzero(self.status == STATUS_TESTED))

    def min_q(self):
        tested = self.status == STATUS_TESTED
        return float(np.nanmin(self.q[tested])) if np.any(tested) else np.nan

    def n_rejected(self, alpha=0.05):
        tested = self.status == STATUS_TESTED
        return int(np.count_nonzero(self.q[tested] <= alpha))


def filter_statistics(collection: LabeledImageCollection, kind: str) -> np.ndarray:
    """Label-free per-pixel summary over all images of both groups."""
    x = collection.stacked()
    if kind == "mean":
        return x.mean(axis=0)
    if kind == "sd":
        return x.std(axis=0, ddof=1)
    raise InvalidInputError("filter statistic must be 'mean' or 'sd'")


def pooled_t(x, y):
    """Two-sided pooled-variance two-sample t-test (df = n1 + n2 - 2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or len(y) < 2:
        raise InvalidInputError("each sample needs at least 2 observations")
    t, p, _ = _pooled_t_vec(x[:, None], y[:, None])
    return float(t[0]), float(p[0])


def _pooled_t_vec(x, y):
    """Vectorized over the trailing axis. Returns (t, p, degenerate)."""
    n1, n2 = x.shape[0], y.shape[0]
    df = n1 + n2 - 2
    mx, my = x.mean(axis=0), y.mean(axis=0)
    vx = x.var(axis=0, ddof=1)
    vy = y.var(axis=0, ddof=1)
    sp2 = ((n1 - 1) * vx + (n2 - 1) * vy) / df
    se = np.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    degenerate = se == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (mx - my) / se
    p = np.empty_like(se)
    ok = ~degenerate
    p[ok] = 2.0 * stats.t.sf(np.abs(t[ok]), df)
    # zero pooled variance: p = 1 if the group means agree, else 0
    same = degenerate & (mx == my)
    t[same] = 0.0
    p[same] = 1.0
    diff = degenerate & (mx != my)
    t[diff] = np.where(mx[diff] > my[diff], np.inf, -np.inf)
    p[diff] = 0.0
    return t, p, degenerate


def bh_adjust(p):
    """Benjamini-Hochberg step-up adjusted p-values."""
    return storey_qvalues(p, pi0=1.0)


def storey_qvalues(p, lam: float = 0.5, pi0=None):
    """Storey q-values with pi0 estimated at lambda (capped at 1), or a
    pinned pi0. q_(i) = min_{j>=i} pi0 * m * p_(j) / j in sorted order."""
    p = np.asarray(p, dtype=np.float64)
    if p.size == 0:
        return p.copy()
    if np.any((p < 0) | (p > 1)):
        raise InvalidInputError("p-values must lie in [0, 1]")
    m = p.size
    if pi0 is None:
        if not (0 < lam < 1):
            raise InvalidInputError("lambda must be in (0, 1)")
        pi0 = min(1.0, np.count_nonzero(p > lam) / (m * (1.0 - lam)))
    order = np.argsort(p, kind="stable")
    ranked = pi0 * m * p[order] / np.arange(1, m + 1)
    q_sorted = np.minimum.accumulate(ranked[::-1])[::-1]
    q = np.empty(m)
    q[order] = np.minimum(q_sorted, 1.0)
    return q


def two_stage_test(collection: LabeledImageCollection, config: FilterConfig) -> TestResultGrid:
    """Corner mask, percentile filter, pooled t-tests, FDR adjustment."""
    x = collection.stacked()
    grid = collection.grid
    excluded = corner_mask(grid, config.corner_cap, config.corner_mode) \
        if np.isfinite(config.corner_cap) else np.zeros(x.shape[1:], dtype=bool)
    fstat = filter_statistics(collection, config.statistic)

    remaining = ~excluded
    status = np.full(x.shape[1:], STATUS_CORNER, dtype=np.int64)
    if np.any(remaining):
        thresh = np.percentile(fstat[remaining], config.threshold_percent)
        filtered = remaining & (fstat < thresh)
        tested = remaining & ~filtered
        status[filtered] = STATUS_FILTERED
        status[tested] = STATUS_TESTED
    else:
        tested = remaining

    t = np.full(x.shape[1:], np.nan)
    p = np.full(x.shape[1:], np.nan)
    q = np.full(x.shape[1:], np.nan)
    degenerate = np.zeros(x.shape[1:], dtype=bool)
    if np.any(tested):
        g1 = x[collection.labels == 1][:, tested]
        g2 = x[collection.labels == 2][:, tested]
        tt, pp, dg = _pooled_t_vec(g1, g2)
        t[tested] = tt
        p[tested] = pp
        degenerate[tested] = dg
        if config.adjust == "qvalue":
            q[tested] = storey_qvalues(pp, lam=config.storey_lambda)
        elif config.adjust == "bh":
            q[tested] = bh_adjust(pp)
        else:
            raise InvalidInputError(f"unknown adjustment {config.adjust!r}")
    return TestResultGrid(grid=grid, status=status, filter_stat=fstat,
                          t=t, p=p, q=q, degenerate=degenerate)


def permutation_test(diagrams, labels, dim, metric="wasserstein", p_order=1.0,
                     n_shuffles=100, seed=None, cache=None):
    """Monte-Carlo permutation test on the joint within-group loss.

    Returns (p, unshuffled_loss, shuffled_losses). p counts shuffled
    losses strictly below the unshuffled loss, so ties count against
    significance. Shuffles preserve group sizes; when the number of
    distinct assignments is at most ``n_shuffles`` they are enumerated
    exhaustively instead of sampled.
    """
    labels = np.asarray(labels)
    idx1 = np.flatnonzero(labels == labels[0])
    idx2 = np.flatnonzero(labels != labels[0])
    if n_shuffles < 1:
        raise InvalidInputError("n_shuffles must be >= 1")
    if cache is None:
        cache = PairwiseDistanceCache(diagrams, dim, metric, p_order)
    n = len(labels)
    n1 = len(idx1)
    base = joint_loss(diagrams, idx1, idx2, dim, metric, p_order, cache)

    losses = []
    if comb(n, n1) <= n_shuffles:
        for grp in combinations(range(n), n1):
            other = [i for i in range(n) if i not in grp]
            losses.append(joint_loss(diagrams, list(grp), other, dim, metric, p_order, cache))
    else:
        for i in range(n_shuffles):
            rng = np.random.default_rng((seed, i) if seed is not None else None)
            perm = rng.permutation(n)
            losses.append(joint_loss(diagrams, perm[:n1].tolist(), perm[n1:].tolist(),
                                     dim, metric, p_order, cache))
    losses = np.asarray(losses)
    pval = float(np.count_nonzero(losses < base) / len(losses))
    return pval, float(base), losses
