"""Hand-crafted texture descriptors for morph detection.

Every pipeline takes a Raster of any size, resamples it to a fixed 256x256
working frame, and returns a flat float64 feature vector:

  lbp        uniform LBP(8,1) histograms over a 4x4 region grid of the
             grayscale image (16 regions x 59 bins)
  color_lbp  the same histograms over the HSV and YCbCr channel planes
             (6 channels x 944)
  hog        9-bin unsigned-gradient histograms in 8px cells, 2x2-cell
             blocks with L2-Hys normalization

LBP codes compare each 3x3 neighbor against the center with >=, reading
neighbors clockwise from the top-left corner into the byte MSB-first, so the
patch [[9,9,9],[9,5,1],[1,1,1]] encodes to 225.  Uniform codes (at most two
circular bit transitions) occupy bins 0..57 in ascending code order; every
other code falls into catch-all bin 58.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .raster import Raster, convert_color, resize_bilinear, to_grayscale

WORK_SIZE = 256
LBP_GRID = 4
LBP_BINS = 59
HOG_CELL = 8
HOG_BLOCK = 2
HOG_BINS = 9
HOG_CLIP = 0.2
_HOG_EPS = 1e-10

# clockwise from top-left; first entry lands in the most significant bit
_NEIGHBOR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)


def _circular_transitions(code: int) -> int:
    bits = [(code >> (7 - k)) & 1 for k in range(8)]
    return sum(bits[k] != bits[(k + 1) % 8] for k in range(8))


def _build_uniform_lut() -> np.ndarray:
    lut = np.full(256, LBP_BINS - 1, dtype=np.intp)
    uniform = [c for c in range(256) if _circular_transitions(c) <= 2]
    for slot, code in enumerate(sorted(uniform)):
        lut[code] = slot
    return lut


_UNIFORM_LUT = _build_uniform_lut()


def lbp_code_map(plane: np.ndarray) -> np.ndarray:
    """Uniform-LBP bin index per interior pixel of a 2-D plane."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.shape[0] < 3 or plane.shape[1] < 3:
        raise DataError(f"lbp needs a 2-D plane at least 3x3, got {plane.shape}")
    center = plane[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.intp)
    for k, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        nb = plane[1 + dy: plane.shape[0] - 1 + dy,
                   1 + dx: plane.shape[1] - 1 + dx]
        codes |= (nb >= center).astype(np.intp) << (7 - k)
    return _UNIFORM_LUT[codes]


def lbp_histogram(plane: np.ndarray, grid: int = LBP_GRID) -> np.ndarray:
    """Concatenated per-region LBP histograms, each normalized to sum 1.

    The code map is split into a grid x grid lattice with floor-division
    bounds (region r spans rows r*H//grid .. (r+1)*H//grid).
    """
    bins = lbp_code_map(plane)
    h, w = bins.shape
    if h < grid or w < grid:
        raise DataError(f"code map {h}x{w} too small for a {grid}x{grid} grid")
    feats = []
    for gy in range(grid):
        y0, y1 = gy * h // grid, (gy + 1) * h // grid
        for gx in range(grid):
            x0, x1 = gx * w // grid, (gx + 1) * w // grid
            region = bins[y0:y1, x0:x1]
            hist = np.bincount(region.ravel(), minlength=LBP_BINS).astype(np.float64)
            feats.append(hist / region.size)
    return np.concatenate(feats)


def _work_frame(img: Raster) -> Raster:
    return resize_bilinear(img, WORK_SIZE, WORK_SIZE)


def lbp_features(img: Raster) -> np.ndarray:
    gray = to_grayscale(_work_frame(img))
    return lbp_histogram(gray.data[:, :, 0])


def color_lbp_features(img: Raster) -> np.ndarray:
    """LBP histograms over all six HSV and YCbCr channel planes."""
    if img.channels != 3:
        raise DataError("color_lbp needs an RGB raster")
    frame = _work_frame(img)
    planes = []
    for space in ("hsv", "ycbcr"):
        conv = convert_color(frame, space)
        planes.extend(conv.data[:, :, c] for c in range(3))
    return np.concatenate([lbp_histogram(p) for p in planes])


def hog_features(img: Raster) -> np.ndarray:
    """Dense HoG: unsigned orientation bins with circular bilinear voting."""
    gray = to_grayscale(_work_frame(img)).data[:, :, 0]
    gy, gx = np.gradient(gray)
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    t = ang / (180.0 / HOG_BINS)
    lo = np.floor(t).astype(np.intp) % HOG_BINS
    frac = t - np.floor(t)
    hi = (lo + 1) % HOG_BINS

    n_cells = WORK_SIZE // HOG_CELL
    cells = np.arange(WORK_SIZE) // HOG_CELL
    cell_y, cell_x = np.meshgrid(cells, cells, indexing="ij")
    hist = np.zeros((n_cells, n_cells, HOG_BINS))
    np.add.at(hist, (cell_y, cell_x, lo), mag * (1.0 - frac))
    np.add.at(hist, (cell_y, cell_x, hi), mag * frac)

    nb = n_cells - HOG_BLOCK + 1
    feats = np.empty((nb, nb, HOG_BLOCK * HOG_BLOCK * HOG_BINS))
    for by in range(nb):
        for bx in range(nb):
            v = hist[by: by + HOG_BLOCK, bx: bx + HOG_BLOCK].ravel()
            v = v / np.sqrt(v @ v + _HOG_EPS)
            v = np.minimum(v, HOG_CLIP)
            feats[by, bx] = v / np.sqrt(v @ v + _HOG_EPS)
    return feats.ravel()


FEATURE_PIPELINES = {
    "lbp": lbp_features,
    "color_lbp": color_lbp_features,
    "hog": hog_features,
}


def feature_dim(name: str) -> int:
    dims = {
        "lbp": LBP_GRID * LBP_GRID * LBP_BINS,
        "color_lbp": 6 * LBP_GRID * LBP_GRID * LBP_BINS,
        "hog": (WORK_SIZE // HOG_CELL - HOG_BLOCK + 1) ** 2
        * HOG_BLOCK * HOG_BLOCK * HOG_BINS,
    }
    if name not in dims:
        raise DataError(f"unknown feature pipeline {name!r}")
    return dims[name]


def extract_feature(name: str, img: Raster) -> np.ndarray:
    if name not in FEATURE_PIPELINES:
        raise DataError(
            f"unknown feature pipeline {name!r} "
            f"(available: {', '.join(sorted(FEATURE_PIPELINES))})"
        )
    return FEATURE_PIPELINES[name](img)


def extract_batch(name: str, images, threads: int = 1) -> np.ndarray:
    """Extract one pipeline over a sequence of rasters, results in order.

    Thread count only affects wall time; each image is independent, so the
    output is identical for any threads value.
    """
    if name not in FEATURE_PIPELINES:
        raise DataError(f"unknown feature pipeline {name!r}")
    images = list(images)
    if not images:
        raise DataError("no images to extract features from")
    if threads < 1:
        raise DataError(f"threads must be >= 1, got {threads}")
    fn = FEATURE_PIPELINES[name]
    if threads == 1 or len(images) == 1:
        rows = [fn(im) for im in images]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(fn, images))
    return np.vstack(rows)


def save_feature_set(path, features: np.ndarray, labels, pipeline: str,
                     paths=None) -> None:
    """Raw little-endian float64 matrix plus a JSON sidecar at path + .json.

    Labels ride in the sidecar (+1 attack, -1 bona fide); the flat binary
    payload keeps re-extraction byte-stable for identical inputs.
    """
    feats = np.ascontiguousarray(np.asarray(features, dtype=np.float64))
    if feats.ndim != 2:
        raise DataError(f"feature matrix must be 2-d, got shape {feats.shape}")
    labs = [int(v) for v in labels]
    if len(labs) != feats.shape[0]:
        raise DataError(
            f"{len(labs)} labels for {feats.shape[0]} feature rows"
        )
    if any(v not in (-1, 1) for v in labs):
        raise DataError("labels must be +1 (attack) or -1 (bona fide)")
    meta = {
        "kind": "feature-set",
        "pipeline": str(pipeline),
        "count": int(feats.shape[0]),
        "dim": int(feats.shape[1]),
        "labels": labs,
        "paths": [str(p) for p in paths] if paths is not None else None,
    }
    Path(path).write_bytes(feats.astype("<f8").tobytes())
    Path(str(path) + ".json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n"
    )


def load_feature_set(path):
    """-> (features (n, d) float64, labels (n,) int array, meta dict)."""
    path = Path(path)
    side = Path(str(path) + ".json")
    if not path.exists():
        raise DataError(f"feature file not found: {path}")
    if not side.exists():
        raise DataError(f"feature sidecar not found: {side}")
    try:
        meta = json.loads(side.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed feature sidecar {side}: {exc}") from exc
    for key in ("kind", "pipeline", "count", "dim", "labels"):
        if key not in meta:
            raise DataError(f"{side}: missing field {key!r}")
    if meta["kind"] != "feature-set":
        raise DataError(f"{side}: not a feature-set sidecar")
    n, d = int(meta["count"]), int(meta["dim"])
    raw = path.read_bytes()
    if len(raw) != n * d * 8:
        raise DataError(
            f"{path}: payload is {len(raw)} bytes, expected {n * d * 8}"
        )
    feats = np.frombuffer(raw, dtype="<f8").reshape(n, d).astype(np.float64)
    labels = np.asarray([int(v) for v in meta["labels"]], dtype=np.int64)
    if labels.size != n:
        raise DataError(f"{side}: {labels.size} labels for {n} rows")
    if not np.all(np.isfinite(feats)):
        raise DataError(f"{path}: non-finite feature values")
    return feats, labels, meta
