"""Landmark-based face morphing.

The morph triangulates the weighted-average landmark set (augmented with
frame anchors so the mesh spans the whole canvas), inverse-warps both source
images onto that shared geometry triangle by triangle, then alpha-blends the
two aligned images.  Pixel centers sit at integer coordinates; the main pass
paints each pixel at most once under the top-left fill rule and a completion
pass catches hull-boundary centers the exclusive rule leaves unpainted, so
every pixel is painted exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .delaunay import Triangulation, delaunay
from .errors import DataError
from .landmarks import augment_boundary, average_landmarks, clamp_landmarks, frame_points
from .raster import Raster, _sample_bilinear_arr, blend
from .warp import DEGENERATE_AREA, AffineMap2D, triangle_area, triangle_interior_mask


@dataclass
class LandmarkMorphResult:
    image: Raster
    triangulation: Triangulation
    alpha: float
    skipped_triangles: int
    source_ids: Optional[tuple] = None

    def metadata(self) -> dict:
        return {
            "alpha": self.alpha,
            "skipped_triangles": self.skipped_triangles,
            "triangle_count": int(len(self.triangulation.triangles)),
            "source_ids": list(self.source_ids) if self.source_ids else None,
        }


def _paint(canvas: np.ndarray, src_data: np.ndarray, dst_tri, src_tri, ys, xs) -> None:
    if ys.size == 0:
        return
    amap = AffineMap2D.from_triangles(dst_tri, src_tri)
    sx, sy = amap.apply(xs.astype(np.float64), ys.astype(np.float64))
    canvas[ys, xs] = _sample_bilinear_arr(src_data, sx, sy)


def generate_landmark_morph(
    img_a: Raster,
    lm_a,
    img_b: Raster,
    lm_b,
    alpha: float = 0.5,
    source_ids: Optional[tuple] = None,
) -> LandmarkMorphResult:
    """Morph two equally-sized images along averaged landmark geometry.

    Returns the blended image together with the shared triangulation and a
    count of degenerate (skipped) mesh triangles.
    """
    if img_a.shape != img_b.shape:
        raise DataError(
            f"image shape mismatch: {img_a.shape} vs {img_b.shape}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must be in [0, 1], got {alpha}")
    h, w = img_a.height, img_a.width

    ca = clamp_landmarks(lm_a, w, h)
    cb = clamp_landmarks(lm_b, w, h)
    avg = average_landmarks(ca, cb, alpha)
    frame = frame_points(w, h)
    aug_a = np.vstack([ca, frame])
    aug_b = np.vstack([cb, frame])
    aug_avg = np.vstack([avg, frame])

    mesh = delaunay(aug_avg)

    warp_a = np.zeros_like(img_a.data)
    warp_b = np.zeros_like(img_b.data)
    covered = np.zeros((h, w), dtype=bool)
    skipped = 0

    tris = mesh.triangles
    dst_sets = aug_avg[tris]
    src_a_sets = aug_a[tris]
    src_b_sets = aug_b[tris]
    degenerate = np.zeros(len(tris), dtype=bool)

    for t in range(len(tris)):
        dst_tri = dst_sets[t]
        if abs(triangle_area(dst_tri)) <= DEGENERATE_AREA:
            degenerate[t] = True
            skipped += 1
            continue
        ys, xs = triangle_interior_mask(dst_tri, w, h)
        keep = ~covered[ys, xs]
        ys, xs = ys[keep], xs[keep]
        _paint(warp_a, img_a.data, dst_tri, src_a_sets[t], ys, xs)
        _paint(warp_b, img_b.data, dst_tri, src_b_sets[t], ys, xs)
        covered[ys, xs] = True

    # Exclusive edge rules leave pixel centers on the hull's right/bottom
    # border unpainted; sweep them up with inclusive containment in mesh order.
    for t in range(len(tris)):
        if covered.all():
            break
        if degenerate[t]:
            continue
        dst_tri = dst_sets[t]
        ys, xs = triangle_interior_mask(dst_tri, w, h, inclusive=True)
        keep = ~covered[ys, xs]
        ys, xs = ys[keep], xs[keep]
        if ys.size == 0:
            continue
        _paint(warp_a, img_a.data, dst_tri, src_a_sets[t], ys, xs)
        _paint(warp_b, img_b.data, dst_tri, src_b_sets[t], ys, xs)
        covered[ys, xs] = True

    out = blend(Raster(warp_a), Raster(warp_b), alpha)
    return LandmarkMorphResult(
        image=out,
        triangulation=mesh,
        alpha=float(alpha),
        skipped_triangles=skipped,
        source_ids=source_ids,
    )
