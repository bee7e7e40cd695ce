"""Landmark sets: text file I/O, clamping, averaging, frame augmentation."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def load_landmarks(path) -> np.ndarray:
    """Read landmarks from a text file with one "x y" pair per line.

    Blank lines and lines starting with '#' are ignored.
    """
    rows = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read landmark file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'x y', got {s!r}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric coordinate in {s!r}")
    if not rows:
        raise DataError(f"{path}: no landmarks found")
    pts = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(pts)):
        raise DataError(f"{path}: non-finite landmark coordinates")
    return pts


def save_landmarks(path, landmarks) -> None:
    pts = _as_points(landmarks)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in pts:
            fh.write(f"{float(x)!r} {float(y)!r}\n")


def _as_points(landmarks) -> np.ndarray:
    pts = np.asarray(landmarks, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError(f"landmarks must be (n, 2), got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DataError("landmarks contain non-finite coordinates")
    return pts


def clamp_landmarks(landmarks, width: int, height: int) -> np.ndarray:
    """Clamp landmark coordinates into the frame [0, w-1] x [0, h-1]."""
    pts = _as_points(landmarks)
    out = pts.copy()
    out[:, 0] = np.clip(out[:, 0], 0.0, float(width - 1))
    out[:, 1] = np.clip(out[:, 1], 0.0, float(height - 1))
    return out


def average_landmarks(lm_a, lm_b, alpha: float) -> np.ndarray:
    """Weighted landmark average (1 - alpha) * a + alpha * b."""
    a = _as_points(lm_a)
    b = _as_points(lm_b)
    if a.shape != b.shape:
        raise DataError(f"landmark count mismatch: {a.shape[0]} vs {b.shape[0]}")
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must be in [0, 1], got {alpha}")
    return (1.0 - alpha) * a + alpha * b


def frame_points(width: int, height: int) -> np.ndarray:
    """Eight frame anchors in fixed order: corners TL, TR, BR, BL then edge
    midpoints top, right, bottom, left; coordinates are pixel centers."""
    xm = (width - 1) / 2.0
    ym = (height - 1) / 2.0
    w1 = float(width - 1)
    h1 = float(height - 1)
    return np.array(
        [
            [0.0, 0.0],
            [w1, 0.0],
            [w1, h1],
            [0.0, h1],
            [xm, 0.0],
            [w1, ym],
            [xm, h1],
            [0.0, ym],
        ]
    )


def augment_boundary(landmarks, width: int, height: int) -> np.ndarray:
    """Clamp landmarks into the frame and append the eight frame anchors."""
    pts = clamp_landmarks(landmarks, width, height)
    return np.vstack([pts, frame_points(width, height)])
