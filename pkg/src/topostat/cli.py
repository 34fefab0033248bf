"""Command-line entry point wiring the pipeline.

Subcommands: pd, vectorize, dist, distmat, test two-stage,
test permutation, simulate {points,rock,power,scenario}, render.
Every run writes a run.json echoing the fully resolved configuration next
to its outputs. Domain failures exit 1 with a single machine-parsable
line; usage errors exit 2.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .cubical import build_cubical, sedt
from .diagram import PersistenceDiagram
from .distances import bottleneck, wasserstein
from .errors import TopostatError
from .images import (GridSpec, binning_vectorize, corner_mask,
                     persistence_image, pooled_grid, transform_diagram)
from .reduction import compute_persistence
from .rips import build_rips
from .simulate import (RockSpec, ShapeSpec, pseudo_rock, power_experiment,
                       resolve_threads, sample_shape, scenario_experiment)
from .testing import (STATUS_NAMES, FilterConfig, LabeledImageCollection,
                      permutation_test, two_stage_test)


def _write_run_json(out_path, command, config):
    run = {"command": command, "config": config}
    target = Path(out_path).parent / "run.json"
    with open(target, "w") as fh:
        json.dump(run, fh, indent=2, default=str)
        fh.write("\n")


def _cmd_pd(args):
    if args.complex == "rips":
        cloud = io.read_point_cloud(args.input, skip_header=args.skip_header)
        filtration = build_rips(cloud, args.max_dim, args.max_scale)
    else:
        vol = io.read_volume(args.input)
        grid = sedt(vol) if args.sedt else vol.phase.astype(np.float64)
        filtration = build_cubical(grid)
    diagram = compute_persistence(filtration, args.max_dim)
    io.write_diagram(args.out, diagram)
    _write_run_json(args.out, "pd", vars(args))
    return 0


def _cmd_vectorize(args):
    diagrams = [io.read_diagram(p) for p in args.diagrams]
    if args.inf_cap is not None:
        inf_cap = args.inf_cap
    else:
        caps = [d.max_finite_death(args.dim) for d in diagrams]
        caps = [c for c in caps if c is not None]
        inf_cap = max(caps) if caps else 1.0
    pts = [transform_diagram(d, args.dim, inf_cap) for d in diagrams]
    if args.birth_range and args.pers_range:
        grid = GridSpec(tuple(args.birth_range), tuple(args.pers_range),
                        tuple(args.resolution))
    else:
        grid = pooled_grid(pts, tuple(args.resolution))
    h = args.bandwidth if args.bandwidth is not None else grid.default_bandwidth()
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for src, p in zip(args.diagrams, pts):
        if args.method == "gaussian":
            img = persistence_image(p, grid, args.weight, h, dim=args.dim,
                                    inf_cap=inf_cap)
        else:
            img = binning_vectorize(p, grid, dim=args.dim)
        dest = outdir / (Path(src).stem + ".image.csv")
        io.write_image(dest, img)
        written.append(str(dest))
    _write_run_json(outdir / "x", "vectorize",
                    {**vars(args), "resolved_inf_cap": inf_cap,
                     "resolved_bandwidth": h, "grid": grid.to_dict(),
                     "written": written})
    return 0


def _load_two(args):
    return io.read_diagram(args.a), io.read_diagram(args.b)


def _cmd_dist(args):
    a, b = _load_two(args)
    if args.metric == "wasserstein":
        d = wasserstein(a, b, args.dim, args.p)
    else:
        d = bottleneck(a, b, args.dim)
    print(repr(float(d)))
    return 0


def _cmd_distmat(args):
    diagrams = [io.read_diagram(p) for p in args.inputs]
    n = len(diagrams)
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if args.metric == "wasserstein":
                d = wasserstein(diagrams[i], diagrams[j], args.dim, args.p)
            else:
                d = bottleneck(diagrams[i], diagrams[j], args.dim)
            mat[i, j] = mat[j, i] = d
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in mat:
            w.writerow([io._fmt(v) for v in row])
    _write_run_json(args.out, "distmat", vars(args))
    return 0


def _cmd_test_two_stage(args):
    entries, _ = io.read_manifest(args.manifest)
    images = [io.read_image(e["path"]) for e in entries]
    labels = [e["label"] for e in entries]
    coll = LabeledImageCollection(images, labels)
    cfg = FilterConfig(statistic=args.filter, threshold_percent=args.threshold,
                       corner_cap=args.cap, adjust=args.adjust,
                       storey_lambda=args.storey_lambda)
    res = two_stage_test(coll, cfg)
    out = Path(args.out_prefix)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{out}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ix", "iy", "status", "filter_stat", "t", "p", "q"])
        ny, nx = res.status.shape
        for iy in range(ny):
            for ix in range(nx):
                w.writerow([
                    ix, iy, STATUS_NAMES[res.status[iy, ix]],
                    io._fmt(res.filter_stat[iy, ix]),
                    io._fmt(res.t[iy, ix]), io._fmt(res.p[iy, ix]),
                    io._fmt(res.q[iy, ix]),
                ])
    summary = {
        "m": res.m,
        "m_tested": res.m_tested,
        "min_q": res.min_q(),
        "alpha": args.alpha,
        "n_rejected": res.n_rejected(args.alpha),
    }
    with open(f"{out}.summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    _write_run_json(f"{out}.csv", "test two-stage", vars(args))
    return 0


def _cmd_test_permutation(args):
    entries, _ = io.read_manifest(args.manifest)
    diagrams = [io.read_diagram(e["path"]) for e in entries]
    labels = np.asarray([e["label"] for e in entries])
    pval, base, losses = permutation_test(
        diagrams, labels, args.dim, metric=args.metric, p_order=args.p,
        n_shuffles=args.N, seed=args.seed)
    out = Path(args.out_prefix)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{out}.losses.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shuffle", "loss"])
        for i, l in enumerate(losses):
            w.writerow([i, io._fmt(l)])
    summary = {"p": pval, "unshuffled_loss": base, "n_shuffles": len(losses)}
    with open(f"{out}.summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    _write_run_json(f"{out}.losses.csv", "test permutation", vars(args))
    return 0


def _cmd_simulate_points(args):
    spec = ShapeSpec(args.shape, tuple(args.radii), args.n_points, args.noise)
    cloud = sample_shape(spec, args.seed)
    io.write_point_cloud(args.out, cloud)
    _write_run_json(args.out, "simulate points", vars(args))
    return 0


def _cmd_simulate_rock(args):
    spec = RockSpec(seeds=args.M, dispersions=args.S, sigma1=args.sigma1,
                    sigma2=args.sigma2, threshold=args.threshold,
                    width=args.width, height=args.height)
    vol = pseudo_rock(spec, args.seed)
    if Path(args.out).suffix.lower() == ".pgm":
        io.write_pgm(args.out, vol.phase.astype(float) * 255)
    else:
        io.write_raw_volume(args.out, vol)
    _write_run_json(args.out, "simulate rock", vars(args))
    return 0


def _cmd_simulate_power(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    rows = power_experiment(
        sigmas=cfg.get("sigmas", [0.05]),
        weights=cfg.get("weights", ["constant"]),
        filters=cfg.get("filters", ["sd"]),
        thresholds=cfg.get("thresholds", [50.0]),
        reps=cfg.get("reps", 100),
        n_per_group=cfg.get("n_per_group", 10),
        alpha=cfg.get("alpha", 0.05),
        seed=args.seed,
        permutation_shuffles=cfg.get("permutation_shuffles"),
        n_jobs=args.threads,
    )
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)
    _write_run_json(args.out, "simulate power", {**vars(args), "config": cfg})
    return 0


def _cmd_simulate_scenario(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    spec_a = RockSpec(**cfg["group_a"])
    spec_b = RockSpec(**cfg["group_b"])
    result = scenario_experiment(
        spec_a, spec_b,
        n_per_group=cfg.get("n_per_group", 20),
        weights=tuple(cfg.get("weights", ["soft_arctan"])),
        filter_statistic=cfg.get("filter", "mean"),
        threshold=cfg.get("threshold", 50.0),
        dims=tuple(cfg.get("dims", [0, 1])),
        seed=args.seed,
        permutation_shuffles=cfg.get("permutation_shuffles"),
        n_jobs=args.threads,
    )
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", "weight", "min_q", "permutation_p"])
        for (dim, weight), q in sorted(result["min_q"].items()):
            w.writerow([dim, weight, io._fmt(q),
                        result["permutation_p"].get(dim, "")])
    _write_run_json(args.out, "simulate scenario", {**vars(args), "config": cfg})
    return 0


def _cmd_render(args):
    values = np.loadtxt(args.image, delimiter=",", ndmin=2)
    io.write_pgm(args.out, values)
    _write_run_json(args.out, "render", vars(args))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="topostat",
                                 description="Topological hypothesis testing pipeline")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker parallelism cap (default: TOPOSTAT_THREADS or all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pd", help="compute a persistence diagram")
    p.add_argument("--input", required=True)
    p.add_argument("--complex", choices=["rips", "cubical"], required=True)
    p.add_argument("--max-dim", type=int, dest="max_dim", default=1)
    p.add_argument("--max-scale", type=float, dest="max_scale", default=None)
    p.add_argument("--skip-header", type=int, dest="skip_header", default=0)
    p.add_argument("--no-sedt", dest="sedt", action="store_false",
                   help="skip the signed distance transform for volumes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pd)

    p = sub.add_parser("vectorize", help="persistence images from diagrams")
    p.add_argument("--diagrams", nargs="+", required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--weight", choices=["constant", "soft_arctan", "hard_arctan", "linear"],
                   default="soft_arctan")
    p.add_argument("--method", choices=["gaussian", "binning"], default="gaussian")
    p.add_argument("--resolution", type=int, nargs=2, default=[40, 40])
    p.add_argument("--birth-range", type=float, nargs=2, dest="birth_range")
    p.add_argument("--pers-range", type=float, nargs=2, dest="pers_range")
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--inf-cap", type=float, dest="inf_cap", default=None)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=_cmd_vectorize)

    p = sub.add_parser("dist", help="distance between two diagrams")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--metric", choices=["wasserstein", "bottleneck"],
                   default="wasserstein")
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("distmat", help="pairwise distance matrix")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--metric", choices=["wasserstein", "bottleneck"],
                   default="wasserstein")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_distmat)

    p = sub.add_parser("test", help="hypothesis tests")
    tsub = p.add_subparsers(dest="test_command", required=True)

    t = tsub.add_parser("two-stage", help="two-stage element-wise test")
    t.add_argument("--manifest", required=True)
    t.add_argument("--filter", choices=["mean", "sd"], default="sd")
    t.add_argument("--threshold", type=float, default=50.0)
    t.add_argument("--cap", type=float, default=np.inf)
    t.add_argument("--adjust", choices=["qvalue", "bh"], default="qvalue")
    t.add_argument("--lambda", type=float, dest="storey_lambda", default=0.5)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--out-prefix", dest="out_prefix", required=True)
    t.set_defaults(func=_cmd_test_two_stage)

    t = tsub.add_parser("permutation", help="permutation test on diagrams")
    t.add_argument("--manifest", required=True)
    t.add_argument("--dim", type=int, default=1)
    t.add_argument("--metric", choices=["wasserstein", "bottleneck"],
                   default="wasserstein")
    t.add_argument("--p", type=float, default=1.0)
    t.add_argument("--N", type=int, default=100)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--out-prefix", dest="out_prefix", required=True)
    t.set_defaults(func=_cmd_test_permutation)

    p = sub.add_parser("simulate", help="synthetic data and experiments")
    ssub = p.add_subparsers(dest="simulate_command", required=True)

    s = ssub.add_parser("points", help="sample a circle-shape point cloud")
    s.add_argument("--shape", choices=["one_circle", "two_circles"], required=True)
    s.add_argument("--radii", type=float, nargs="+", required=True)
    s.add_argument("--n-points", type=int, dest="n_points", default=50)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_simulate_points)

    s = ssub.add_parser("rock", help="generate a pseudo-rock binary image")
    s.add_argument("--M", type=int, default=180)
    s.add_argument("--S", type=int, default=80)
    s.add_argument("--sigma1", type=float, default=4.0)
    s.add_argument("--sigma2", type=float, default=4.0)
    s.add_argument("--threshold", type=float, default=0.7)
    s.add_argument("--width", type=int, default=200)
    s.add_argument("--height", type=int, default=200)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_simulate_rock)

    s = ssub.add_parser("power", help="factorial power study")
    s.add_argument("--config", required=True, help="JSON experiment config")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_simulate_power)

    s = ssub.add_parser("scenario", help="pseudo-rock group comparison")
    s.add_argument("--config", required=True, help="JSON experiment config")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_simulate_scenario)

    p = sub.add_parser("render", help="render an image/q-value CSV as PGM")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "pd" and args.complex == "rips" and args.max_scale is None:
        ap.error("--max-scale is required for rips complexes")
    try:
        return args.func(args)
    except TopostatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
