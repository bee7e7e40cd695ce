"""Affine maps and triangle-constrained inverse warping.

Warping is destination-driven: each destination pixel whose center lies
inside the destination triangle is filled with a bilinear sample of the
source at the inverse-mapped position.  Coverage uses pixel centers with a
top-left fill rule so that triangles sharing an edge paint every pixel
exactly once across a triangulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .raster import Raster, _sample_bilinear_arr

# Destination triangles with area below this (px^2) are skipped by the warp.
DEGENERATE_AREA = 1e-9


@dataclass(frozen=True)
class AffineMap2D:
    """2-D affine map (x, y) -> (a*x + b*y + c, d*x + e*y + f)."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    @classmethod
    def from_triangles(cls, src_tri: np.ndarray, dst_tri: np.ndarray) -> "AffineMap2D":
        """Affine map sending the three src_tri points onto dst_tri."""
        src = np.asarray(src_tri, dtype=np.float64)
        dst = np.asarray(dst_tri, dtype=np.float64)
        if src.shape != (3, 2) or dst.shape != (3, 2):
            raise DataError("triangles must be 3x2 point arrays")
        basis = np.column_stack([src, np.ones(3)])
        try:
            coeffs = np.linalg.solve(basis, dst)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("degenerate source triangle for affine fit") from exc
        (a, d), (b, e), (c, f) = coeffs
        m = cls(a, b, c, d, e, f)
        if not all(np.isfinite(v) for v in (a, b, c, d, e, f)):
            raise NumericalError("non-finite affine coefficients")
        return m

    @property
    def det(self) -> float:
        return self.a * self.e - self.b * self.d

    def apply(self, xs, ys):
        """Map coordinate arrays; returns (x', y')."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        return (
            self.a * xs + self.b * ys + self.c,
            self.d * xs + self.e * ys + self.f,
        )

    def inverse(self) -> "AffineMap2D":
        det = self.det
        if abs(det) <= 1e-12:
            raise NumericalError(f"affine map not invertible (|det|={abs(det):.3g})")
        ia, ib = self.e / det, -self.b / det
        id_, ie = -self.d / det, self.a / det
        return AffineMap2D(
            ia, ib, -(ia * self.c + ib * self.f),
            id_, ie, -(id_ * self.c + ie * self.f),
        )


def triangle_area(tri: np.ndarray) -> float:
    """Signed area (shoelace); positive for the canonical winding."""
    (x0, y0), (x1, y1), (x2, y2) = np.asarray(tri, dtype=np.float64)
    return 0.5 * ((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))


def _canonical(tri: np.ndarray) -> np.ndarray:
    """Reorder to positive signed area (swap two vertices if needed)."""
    tri = np.asarray(tri, dtype=np.float64)
    if triangle_area(tri) < 0:
        return tri[[0, 2, 1]]
    return tri


def triangle_interior_mask(
    tri: np.ndarray, width: int, height: int, inclusive: bool = False
):
    """Pixel-center coverage of a triangle, as (ys, xs) index arrays.

    With inclusive=False the top-left fill rule decides pixels whose center
    lies exactly on an edge, so adjacent triangles never both claim a pixel.
    With inclusive=True all boundary pixels are accepted (used to complete
    hull-border pixels that the exclusive rule assigns to no triangle).
    """
    tri = _canonical(tri)
    x_min = max(int(np.ceil(np.min(tri[:, 0]) - 1e-9)), 0)
    x_max = min(int(np.floor(np.max(tri[:, 0]) + 1e-9)), width - 1)
    y_min = max(int(np.ceil(np.min(tri[:, 1]) - 1e-9)), 0)
    y_max = min(int(np.floor(np.max(tri[:, 1]) + 1e-9)), height - 1)
    if x_min > x_max or y_min > y_max:
        return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp)

    gx, gy = np.meshgrid(
        np.arange(x_min, x_max + 1, dtype=np.float64),
        np.arange(y_min, y_max + 1, dtype=np.float64),
    )
    inside = np.ones(gx.shape, dtype=bool)
    for i in range(3):
        ax, ay = tri[i]
        bx, by = tri[(i + 1) % 3]
        edge = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        if inclusive:
            inside &= edge >= -1e-9
        else:
            # Top-left rule in y-down raster coords for the canonical winding:
            # edges going up (dy < 0) and the horizontal top edge (dy == 0,
            # dx > 0) own their boundary pixels.
            dx, dy = bx - ax, by - ay
            if dy < 0 or (dy == 0 and dx > 0):
                inside &= edge >= 0
            else:
                inside &= edge > 0
    ys, xs = np.nonzero(inside)
    return ys + y_min, xs + x_min


def warp_triangle(
    src: Raster,
    dst: Raster,
    src_tri: np.ndarray,
    dst_tri: np.ndarray,
    coverage: np.ndarray | None = None,
) -> bool:
    """Warp one triangle of src into dst (in place); returns True if painted.

    A destination triangle with area <= DEGENERATE_AREA is skipped and False
    returned so callers can count dropped triangles.  When a coverage array
    (height x width, bool) is supplied, painted pixels are marked in it.
    """
    src_tri = np.asarray(src_tri, dtype=np.float64)
    dst_tri = np.asarray(dst_tri, dtype=np.float64)
    if abs(triangle_area(dst_tri)) <= DEGENERATE_AREA:
        return False
    ys, xs = triangle_interior_mask(dst_tri, dst.width, dst.height)
    if ys.size == 0:
        return True
    back = AffineMap2D.from_triangles(dst_tri, src_tri)
    sx, sy = back.apply(xs.astype(np.float64), ys.astype(np.float64))
    dst.data[ys, xs] = _sample_bilinear_arr(src.data, sx, sy)
    if coverage is not None:
        coverage[ys, xs] = True
    return True
