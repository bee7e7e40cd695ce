"""Latent codes: weighted combination and on-disk format.

A latent is a (layers, dims) float array.  On disk it is raw little-endian
float32 next to a JSON sidecar (same filename plus ".json") recording the
shape and the id of the generator it belongs to; arithmetic in memory is
float64.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import DataError


def as_latent(arr) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[0] < 1 or out.shape[1] < 1:
        raise DataError(f"latent must be (layers, dims), got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise DataError("latent contains non-finite values")
    return out


def combine_latents(a, b, w1: float = 0.5, w2: float = 0.5,
                    literal_halving: bool = False) -> np.ndarray:
    """Weighted latent combination (w1*a + w2*b) / (w1 + w2).

    literal_halving divides by 2 instead of the weight sum, reproducing the
    unnormalized convention; with w1 + w2 = 1 the two agree.
    """
    la, lb = as_latent(a), as_latent(b)
    if la.shape != lb.shape:
        raise DataError(f"latent shape mismatch: {la.shape} vs {lb.shape}")
    if not (np.isfinite(w1) and np.isfinite(w2)) or w1 < 0 or w2 < 0:
        raise DataError(f"weights must be finite and non-negative, got ({w1}, {w2})")
    num = w1 * la + w2 * lb
    if literal_halving:
        return num / 2.0
    s = w1 + w2
    if s <= 0.0:
        raise DataError("weight sum must be positive")
    return num / s


def _sidecar(path) -> str:
    return os.fspath(path) + ".json"


def save_latent(path, latent, generator_id: str) -> None:
    arr = as_latent(latent)
    with open(path, "wb") as fh:
        fh.write(arr.astype("<f4").tobytes())
    meta = {
        "layers": int(arr.shape[0]),
        "dims": int(arr.shape[1]),
        "generator_id": str(generator_id),
    }
    with open(_sidecar(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")


def load_latent(path):
    """Read a latent file; returns (float64 array, sidecar metadata dict)."""
    try:
        with open(_sidecar(path), "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: missing latent sidecar {_sidecar(path)}")
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed latent sidecar ({exc})")
    for key in ("layers", "dims", "generator_id"):
        if key not in meta:
            raise DataError(f"{path}: sidecar missing field {key!r}")
    layers, dims = int(meta["layers"]), int(meta["dims"])
    if layers < 1 or dims < 1:
        raise DataError(f"{path}: invalid latent shape {layers}x{dims}")
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise DataError(f"{path}: latent file not found")
    if len(raw) != layers * dims * 4:
        raise DataError(
            f"{path}: expected {layers * dims * 4} bytes for "
            f"{layers}x{dims} float32, got {len(raw)}"
        )
    arr = np.frombuffer(raw, dtype="<f4").reshape(layers, dims).astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{path}: latent contains non-finite values")
    return arr, meta
