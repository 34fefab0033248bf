"""File formats: point-cloud CSV, diagram CSV, image CSV + JSON sidecar,
PGM/P5 binary images, raw voxel volumes with JSON sidecars, and the
experiment manifests consumed by the test subcommands.

Floats are written with ``repr``, the shortest representation that
round-trips to the same binary64 value.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .cubical import BinaryVolume
from .diagram import PersistenceDiagram
from .errors import InvalidInputError
from .images import GridSpec, PersistenceImage
from .rips import PointCloud


def _fmt(x):
    x = float(x)
    if np.isposinf(x):
        return "inf"
    if np.isneginf(x):
        return "-inf"
    return repr(x)


# -- point clouds ----------------------------------------------------------

def read_point_cloud(path, skip_header=0) -> PointCloud:
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if i < skip_header or not row:
                continue
            rows.append([float(v) for v in row])
    if not rows:
        raise InvalidInputError(f"no points in {path}")
    return PointCloud(rows)


def write_point_cloud(path, cloud: PointCloud):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in cloud.points:
            w.writerow([_fmt(v) for v in row])


# -- diagrams --------------------------------------------------------------

def write_diagram(path, diagram: PersistenceDiagram):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", "birth", "death"])
        for d, b, de in diagram.features():
            w.writerow([d, _fmt(b), _fmt(de)])


def read_diagram(path) -> PersistenceDiagram:
    feats = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["dim", "birth", "death"]:
            raise InvalidInputError(f"{path}: expected header dim,birth,death")
        for row in reader:
            if not row:
                continue
            feats.append((int(row[0]), float(row[1]), float(row[2])))
    return PersistenceDiagram.from_features(feats)


# -- persistence images ----------------------------------------------------

def write_image(path, image: PersistenceImage):
    """CSV matrix (row 0 = highest persistence) plus a .json sidecar with
    the grid geometry and weight metadata."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in np.flipud(image.values):
            w.writerow([_fmt(v) for v in row])
    meta = {
        "grid": image.grid.to_dict(),
        "dim": image.dim,
        "weight": image.weight,
        "bandwidth": image.bandwidth,
        "inf_cap": image.inf_cap,
        "dropped": image.dropped,
    }
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_image(path) -> PersistenceImage:
    path = Path(path)
    values = np.flipud(np.loadtxt(path, delimiter=",", ndmin=2))
    sidecar = path.with_suffix(path.suffix + ".json")
    if not sidecar.exists():
        raise InvalidInputError(f"missing image sidecar {sidecar}")
    with open(sidecar) as fh:
        meta = json.load(fh)
    return PersistenceImage(
        grid=GridSpec.from_dict(meta["grid"]),
        dim=meta["dim"],
        weight=meta["weight"],
        bandwidth=meta["bandwidth"],
        values=values,
        dropped=meta.get("dropped", 0),
        inf_cap=meta.get("inf_cap"),
    )


# -- binary volumes ----------------------------------------------------------

def read_pgm(path) -> BinaryVolume:
    """P5 binary PGM; 0 = pore, 255 = grain, threshold at 128."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        tokens.append(data[start:i])
    if tokens[0] != b"P5":
        raise InvalidInputError(f"{path}: not a P5 PGM")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise InvalidInputError("16-bit PGM not supported")
    i += 1  # single whitespace after maxval
    pixels = np.frombuffer(data[i:i + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise InvalidInputError(f"{path}: truncated pixel data")
    return BinaryVolume(pixels.reshape(height, width) >= 128)


def write_pgm(path, values):
    """P5 rendering of a real-valued matrix, min-max scaled to 0..255.
    NaNs render as 0."""
    arr = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(arr)
    lo = arr[finite].min() if finite.any() else 0.0
    hi = arr[finite].max() if finite.any() else 1.0
    scale = (arr - lo) / (hi - lo) if hi > lo else np.zeros_like(arr)
    scale[~finite] = 0.0
    pix = np.round(255 * scale).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode())
        fh.write(pix.tobytes())


def read_raw_volume(path) -> BinaryVolume:
    """Raw voxel file (one byte per voxel, nonzero = grain) with a JSON
    sidecar {"extents": [...], "order": "x-fastest"}."""
    path = Path(path)
    sidecar = path.with_suffix(path.suffix + ".json")
    if not sidecar.exists():
        raise InvalidInputError(f"missing volume sidecar {sidecar}")
    with open(sidecar) as fh:
        meta = json.load(fh)
    extents = tuple(meta["extents"])
    if meta.get("order", "x-fastest") != "x-fastest":
        raise InvalidInputError("only x-fastest voxel order is supported")
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size != int(np.prod(extents)):
        raise InvalidInputError(f"{path}: voxel count does not match extents")
    # x-fastest: x varies quickest, so reshape with reversed extents
    phase = raw.reshape(tuple(reversed(extents))).T != 0
    return BinaryVolume(phase, resolution=meta.get("resolution"))


def write_raw_volume(path, volume: BinaryVolume):
    path = Path(path)
    volume.phase.T.astype(np.uint8).tofile(path)
    meta = {"extents": list(volume.extents), "order": "x-fastest"}
    if volume.resolution is not None:
        meta["resolution"] = volume.resolution
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_volume(path) -> BinaryVolume:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    return read_raw_volume(path)


# -- manifests ---------------------------------------------------------------

def read_manifest(path):
    """Experiment manifest: {"entries": [{"path", "label", "dim"?}, ...]}.
    Paths are resolved relative to the manifest's directory."""
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    entries = data.get("entries")
    if not entries:
        raise InvalidInputError(f"{path}: manifest has no entries")
    base = path.parent
    out = []
    for e in entries:
        p = Path(e["path"])
        out.append({
            "path": p if p.is_absolute() else base / p,
            "label": int(e["label"]),
            "dim": e.get("dim"),
        })
    labels = {e["label"] for e in out}
    if labels != {1, 2}:
        raise InvalidInputError("manifest labels must form exactly two groups 1 and 2")
    return out, data
