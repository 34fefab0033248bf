"""Synthetic data generators and experiment harnesses: circle point
clouds, pseudo-rock binary images, power studies, and scenario
comparisons. All generators are pure functions of (spec, seed)."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import ndimage

from .cubical import BinaryVolume, build_cubical, sedt
from .errors import InvalidInputError
from .images import GridSpec, persistence_image, pooled_grid, transform_diagram
from .reduction import compute_persistence
from .rips import PointCloud, build_rips
from .testing import (FilterConfig, LabeledImageCollection, permutation_test,
                      two_stage_test)


def resolve_threads(requested=None):
    if requested is not None and requested > 0:
        return int(requested)
    env = os.environ.get("TOPOSTAT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ShapeSpec:
    kind: str                 # "one_circle" | "two_circles"
    radii: tuple
    n_points: int = 50
    noise_sigma: float = 0.0

    def __post_init__(self):
        want = {"one_circle": 1, "two_circles": 2}.get(self.kind)
        if want is None:
            raise InvalidInputError(f"unknown shape kind {self.kind!r}")
        if len(self.radii) != want:
            raise InvalidInputError(f"{self.kind} needs {want} radius value(s)")
        if self.n_points < 1 or self.noise_sigma < 0:
            raise InvalidInputError("n_points >= 1 and noise_sigma >= 0 required")


ONE_CIRCLE = ShapeSpec("one_circle", (1.0,))
TWO_CIRCLES = ShapeSpec("two_circles", (0.9, 1.1))


# Angular jitter (radians) around the regular grid of sample angles. Pure
# i.i.d. uniform angles occasionally leave arc gaps wide enough to delay the
# dominant loop's birth far beyond its typical value; jittering a regular
# grid keeps the angular coverage even while the points stay random.
ANGLE_JITTER = 0.13


def sample_shape(spec: ShapeSpec, seed) -> PointCloud:
    """Randomly rotated, jitter-perturbed regular angles on the circle(s)
    plus isotropic Gaussian coordinate noise. For two circles each point
    first picks a circle uniformly."""
    rng = np.random.default_rng(seed)
    n = spec.n_points
    theta = (2.0 * np.pi * (np.arange(n) + 0.5) / n
             + rng.normal(0.0, ANGLE_JITTER, n)
             + rng.uniform(0.0, 2.0 * np.pi))
    if spec.kind == "one_circle":
        r = np.full(spec.n_points, spec.radii[0])
    else:
        r = np.asarray(spec.radii)[rng.integers(0, 2, spec.n_points)]
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    if spec.noise_sigma > 0:
        pts = pts + rng.normal(0.0, spec.noise_sigma, pts.shape)
    return PointCloud(pts)


@dataclass(frozen=True)
class RockSpec:
    seeds: int = 180          # M: seed points
    dispersions: int = 80     # S: dispersion points
    sigma1: float = 4.0
    sigma2: float = 4.0
    threshold: float = 0.7
    width: int = 200
    height: int = 200

    def __post_init__(self):
        if self.seeds < 1 or self.dispersions < 0:
            raise InvalidInputError("need M >= 1 seed points and S >= 0 dispersions")
        if not (0 < self.threshold < 1):
            raise InvalidInputError("threshold must lie in (0, 1)")


def pseudo_rock(spec: RockSpec, seed) -> BinaryVolume:
    """Random two-phase texture: M uniform seed points, S dispersion
    points offset from uniformly chosen parents by N(0, diag(s1^2, s2^2)),
    rasterized to per-pixel counts, convolved with an isotropic Gaussian
    bump of bandwidth s1 (peak height 1.75, truncated at 4 sigma), and
    thresholded at t. An isolated point contributes a grain disk of
    radius s1 * sqrt(2 ln(1.75/t))."""
    rng = np.random.default_rng(seed)
    w, h = spec.width, spec.height
    pts = np.column_stack([rng.uniform(0, w, spec.seeds), rng.uniform(0, h, spec.seeds)])
    pts = list(pts)
    for _ in range(spec.dispersions):
        parent = pts[rng.integers(0, len(pts))]
        pts.append(parent + rng.normal(0.0, (spec.sigma1, spec.sigma2)))
    pts = np.asarray(pts)
    counts = np.zeros((w, h))
    ix = np.floor(pts[:, 0]).astype(int)
    iy = np.floor(pts[:, 1]).astype(int)
    ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    np.add.at(counts, (ix[ok], iy[ok]), 1.0)
    field_ = ndimage.gaussian_filter(counts, spec.sigma1, truncate=4.0)
    field_ *= 3.5 * np.pi * spec.sigma1 ** 2  # peak of one isolated bump = 1.75
    return BinaryVolume(field_ >= spec.threshold)


def subregions(volume: BinaryVolume, blocks: int = 3):
    """Non-overlapping equal blocks on a blocks^ndim grid (extents must
    divide evenly)."""
    arr = volume.phase
    for ext in arr.shape:
        if ext % blocks:
            raise InvalidInputError("extents must be divisible by the block count")
    sizes = [ext // blocks for ext in arr.shape]
    out = []
    for idx in np.ndindex(*([blocks] * arr.ndim)):
        sl = tuple(slice(i * s, (i + 1) * s) for i, s in zip(idx, sizes))
        out.append(BinaryVolume(arr[sl], resolution=volume.resolution))
    return out


# -- circle power study -------------------------------------------------

CIRCLE_GRID = GridSpec((0.0, 2.0), (0.0, 2.0), (40, 40))
# Kernel standard deviation for the circle study, slightly wider than one
# pixel so neighbouring short-lived features pool into stable pixel masses.
CIRCLE_BANDWIDTH = 0.09
CIRCLE_MAX_SCALE = 2.0


def circle_diagram(cloud: PointCloud):
    """Dim-1 diagram of the standard circle-study Rips pipeline."""
    f = build_rips(cloud, max_dim=2, max_scale=CIRCLE_MAX_SCALE)
    return compute_persistence(f, max_dim=1)


def _circle_points(diagram, inf_cap=CIRCLE_MAX_SCALE):
    return transform_diagram(diagram, dim=1, inf_cap=inf_cap)


def _replicate_images(sigma, rep, n_per_group, weights, seed, shape1, shape2):
    pts = []
    diagrams = []
    labels = []
    sig_key = int(round(sigma * 10000))
    for g, shape in ((1, shape1), (2, shape2)):
        base = ShapeSpec(shape.kind, shape.radii, shape.n_points, sigma)
        for i in range(n_per_group):
            cloud = sample_shape(base, (seed, sig_key, rep, g, i))
            d = circle_diagram(cloud)
            diagrams.append(d)
            pts.append(_circle_points(d))
            labels.append(g)
    images = {w: [persistence_image(p, CIRCLE_GRID, w, CIRCLE_BANDWIDTH) for p in pts]
              for w in weights}
    return images, np.asarray(labels), diagrams


def power_experiment(sigmas, weights, filters, thresholds, reps, n_per_group=10,
                     alpha=0.05, seed=0, shape1=ONE_CIRCLE, shape2=TWO_CIRCLES,
                     corner_cap=CIRCLE_MAX_SCALE, n_jobs=1,
                     permutation_shuffles=None):
    """Full-factorial power study over noise levels, weights, filter
    statistics and thresholds.

    Power is the fraction of replicates whose two-stage test rejects at
    least one pixel at q <= alpha. When ``permutation_shuffles`` is set,
    a Wasserstein permutation-test baseline is run per replicate as well.
    Returns a list of result-row dicts with Monte-Carlo standard errors.
    """
    cells = [(s, w, f, c) for s in sigmas for w in weights for f in filters
             for c in thresholds]
    rejects = {cell: 0 for cell in cells}
    perm_rejects = {s: 0 for s in sigmas} if permutation_shuffles else None

    def run_replicate(sigma, rep):
        images, labels, diagrams = _replicate_images(sigma, rep, n_per_group, weights,
                                                     seed, shape1, shape2)
        out = {}
        for w in weights:
            coll = LabeledImageCollection(images[w], labels)
            for f in filters:
                for c in thresholds:
                    cfg = FilterConfig(statistic=f, threshold_percent=c,
                                       corner_cap=corner_cap)
                    res = two_stage_test(coll, cfg)
                    out[(sigma, w, f, c)] = res.n_rejected(alpha) > 0
        perm = None
        if permutation_shuffles:
            pval, _, _ = permutation_test(diagrams, labels, dim=1,
                                          metric="wasserstein", p_order=1.0,
                                          n_shuffles=permutation_shuffles,
                                          seed=(seed, rep))
            perm = pval <= alpha
        return out, perm

    n_jobs = resolve_threads(n_jobs)
    for sigma in sigmas:
        results = Parallel(n_jobs=n_jobs)(
            delayed(run_replicate)(sigma, rep) for rep in range(reps))
        for out, perm in results:
            for cell, rej in out.items():
                rejects[cell] += int(rej)
            if perm_rejects is not None and perm is not None:
                perm_rejects[sigma] += int(perm)

    rows = []
    for (s, w, f, c) in cells:
        power = rejects[(s, w, f, c)] / reps
        rows.append({
            "sigma": s, "weight": w, "filter": f, "threshold": c,
            "reps": reps, "power": power,
            "mc_se": float(np.sqrt(power * (1 - power) / reps)),
        })
    if perm_rejects is not None:
        for s in sigmas:
            power = perm_rejects[s] / reps
            rows.append({
                "sigma": s, "weight": "permutation", "filter": "-", "threshold": "-",
                "reps": reps, "power": power,
                "mc_se": float(np.sqrt(power * (1 - power) / reps)),
            })
    return rows


# -- pseudo-rock scenario study ------------------------------------------

def rock_diagrams(spec: RockSpec, n_images, seed, max_dim=1):
    """SEDT sublevel cubical diagrams for n pseudo-rock draws."""
    out = []
    for i in range(n_images):
        vol = pseudo_rock(spec, (seed, i))
        f = build_cubical(sedt(vol))
        out.append(compute_persistence(f, max_dim=max_dim))
    return out


def scenario_experiment(spec_a: RockSpec, spec_b: RockSpec, n_per_group,
                        weights=("soft_arctan",), filter_statistic="mean",
                        threshold=50.0, resolution=(10, 10), dims=(0, 1),
                        seed=0, permutation_shuffles=None, n_jobs=1):
    """Two-group pseudo-rock comparison.

    Per homology dimension: SEDT -> cubical persistence -> persistence
    images (shared pooled grid) -> two-stage test minimum q per weight,
    plus an optional Wasserstein permutation-test p-value.
    """
    n_jobs = resolve_threads(n_jobs)

    def make(spec, g, i):
        vol = pseudo_rock(spec, (seed, g, i))
        return compute_persistence(build_cubical(sedt(vol)), max_dim=max(dims))

    diagrams = Parallel(n_jobs=n_jobs)(
        delayed(make)(spec, g, i)
        for g, spec in ((1, spec_a), (2, spec_b))
        for i in range(n_per_group))
    labels = np.repeat([1, 2], n_per_group)

    result = {"min_q": {}, "permutation_p": {}}
    for dim in dims:
        caps = [d.max_finite_death(dim) for d in diagrams]
        inf_cap = max(c for c in caps if c is not None)
        pts = [transform_diagram(d, dim, inf_cap) for d in diagrams]
        grid = pooled_grid(pts, resolution)
        h = grid.default_bandwidth()
        corner_cap = max(float((p[:, 0] + p[:, 1]).max()) for p in pts if len(p))
        for w in weights:
            images = [persistence_image(p, grid, w, h, dim=dim, inf_cap=inf_cap)
                      for p in pts]
            coll = LabeledImageCollection(images, labels)
            cfg = FilterConfig(statistic=filter_statistic, threshold_percent=threshold,
                               corner_cap=corner_cap)
            res = two_stage_test(coll, cfg)
            result["min_q"][(dim, w)] = res.min_q()
        if permutation_shuffles:
            pval, base, losses = permutation_test(
                diagrams, labels, dim, metric="wasserstein", p_order=1.0,
                n_shuffles=permutation_shuffles, seed=(seed, dim))
            result["permutation_p"][dim] = pval
    return result
