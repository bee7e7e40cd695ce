"""Delaunay triangulation by Bowyer-Watson incremental insertion.

Points are inserted in input order into a far-away super-triangle; each
insertion carves out the cavity of triangles whose circumcircle contains the
new point and re-fans the cavity boundary.  Geometric sign decisions use
float arithmetic with a conservative forward-error filter and fall back to
exact rational arithmetic when the filter cannot certify the sign, so the
output is a valid Delaunay triangulation up to co-circular ties (which are
broken by insertion order).  Duplicate input points are deduplicated and
triangle indices refer to the first occurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DataError, NumericalError

_EPS = float(np.finfo(np.float64).eps)
_ORIENT_C = 8.0 * _EPS
_INCIRCLE_C = 24.0 * _EPS
# Super-triangle circumradius as a multiple of the data diagonal; large enough
# that no empty circumcircle of the data can reach a super vertex in practice.
_SUPER_SCALE = 1e9


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    acx = Fraction(ax) - Fraction(cx)
    acy = Fraction(ay) - Fraction(cy)
    bcx = Fraction(bx) - Fraction(cx)
    bcy = Fraction(by) - Fraction(cy)
    return _sign(acx * bcy - acy * bcx)


def orient_sign(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the signed area of (a, b, c); exact."""
    acx, acy = ax - cx, ay - cy
    bcx, bcy = bx - cx, by - cy
    p1, p2 = acx * bcy, acy * bcx
    det = p1 - p2
    err = _ORIENT_C * (abs(p1) + abs(p2))
    if det > err:
        return 1
    if det < -err:
        return -1
    if err == 0.0:
        return 0
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    fdx, fdy = Fraction(dx), Fraction(dy)
    adx, ady = Fraction(ax) - fdx, Fraction(ay) - fdy
    bdx, bdy = Fraction(bx) - fdx, Fraction(by) - fdy
    cdx, cdy = Fraction(cx) - fdx, Fraction(cy) - fdy
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    det = (
        ad2 * (bdx * cdy - bdy * cdx)
        - bd2 * (adx * cdy - ady * cdx)
        + cd2 * (adx * bdy - ady * bdx)
    )
    return _sign(det)


def incircle_sign(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    """Positive iff d lies strictly inside the circumcircle of CCW (a, b, c)."""
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    det = (
        ad2 * (bdx * cdy - bdy * cdx)
        - bd2 * (adx * cdy - ady * cdx)
        + cd2 * (adx * bdy - ady * bdx)
    )
    err = _INCIRCLE_C * (
        ad2 * (abs(bdx * cdy) + abs(bdy * cdx))
        + bd2 * (abs(adx * cdy) + abs(ady * cdx))
        + cd2 * (abs(adx * bdy) + abs(ady * bdx))
    )
    if det > err:
        return 1
    if det < -err:
        return -1
    if err == 0.0:
        return 0
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


@dataclass
class Triangulation:
    """Triangle mesh over a point list; triangles are CCW vertex-index triples."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    def triangle_points(self, t: int) -> np.ndarray:
        return self.vertices[self.triangles[t]]

    def validate(self) -> None:
        """Cheap structural invariants: index range, CCW order, no duplicates."""
        n = len(self.vertices)
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= n
        ):
            raise DataError("triangle index out of range")
        seen = set()
        for i, j, k in self.triangles:
            key = tuple(sorted((int(i), int(j), int(k))))
            if key in seen:
                raise DataError(f"duplicate triangle {key}")
            seen.add(key)
            a, b, c = self.vertices[[i, j, k]]
            if orient_sign(a[0], a[1], b[0], b[1], c[0], c[1]) <= 0:
                raise DataError(f"triangle ({i},{j},{k}) not counter-clockwise")


def _incircle_batch(px, py, tri, d_idx):
    """Vectorized in-circle signs of point d against triangles tri (rows CCW).

    Returns an int8 array; entries whose float filter is inconclusive are
    recomputed with exact arithmetic.
    """
    dx, dy = px[d_idx], py[d_idx]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    adx, ady = px[a] - dx, py[a] - dy
    bdx, bdy = px[b] - dx, py[b] - dy
    cdx, cdy = px[c] - dx, py[c] - dy
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    p1, p2 = bdx * cdy, bdy * cdx
    p3, p4 = adx * cdy, ady * cdx
    p5, p6 = adx * bdy, ady * bdx
    det = ad2 * (p1 - p2) - bd2 * (p3 - p4) + cd2 * (p5 - p6)
    err = _INCIRCLE_C * (
        ad2 * (np.abs(p1) + np.abs(p2))
        + bd2 * (np.abs(p3) + np.abs(p4))
        + cd2 * (np.abs(p5) + np.abs(p6))
    )
    signs = np.zeros(len(tri), dtype=np.int8)
    signs[det > err] = 1
    signs[det < -err] = -1
    uncertain = np.nonzero((np.abs(det) <= err) & (err > 0.0))[0]
    for t in uncertain:
        i, j, k = tri[t]
        signs[t] = _incircle_exact(
            px[i], py[i], px[j], py[j], px[k], py[k], dx, dy
        )
    return signs


def delaunay(points) -> Triangulation:
    """Delaunay-triangulate a point set.

    Raises DataError for fewer than three distinct points or an all-collinear
    set.  Exact duplicates are removed; triangle indices always refer to the
    first occurrence of each coordinate pair in the input.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError(f"points must be (n, 2), got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DataError("points contain non-finite coordinates")

    first: dict[tuple[float, float], int] = {}
    keep: list[int] = []
    for i, (x, y) in enumerate(pts):
        key = (float(x), float(y))
        if key not in first:
            first[key] = i
            keep.append(i)
    orig_idx = np.asarray(keep, dtype=np.int64)
    u = pts[orig_idx]
    m = len(u)
    if m < 3:
        raise DataError(f"need at least 3 distinct points, got {m}")

    p0, p1 = u[0], u[1]
    if all(
        orient_sign(p0[0], p0[1], p1[0], p1[1], u[i][0], u[i][1]) == 0
        for i in range(2, m)
    ):
        raise DataError("all points are collinear")

    lo, hi = u.min(axis=0), u.max(axis=0)
    center = (lo + hi) / 2.0
    diag = math.hypot(hi[0] - lo[0], hi[1] - lo[1])
    radius = _SUPER_SCALE * diag
    supers = np.array(
        [
            [center[0], center[1] + radius],
            [center[0] - radius * math.sqrt(3.0) / 2.0, center[1] - radius / 2.0],
            [center[0] + radius * math.sqrt(3.0) / 2.0, center[1] - radius / 2.0],
        ]
    )
    coords = np.vstack([u, supers])
    px, py = coords[:, 0].copy(), coords[:, 1].copy()

    cap = max(4 * m, 16)
    tri = np.empty((cap, 3), dtype=np.int64)
    alive = np.zeros(cap, dtype=bool)
    tri[0] = (m, m + 1, m + 2)
    alive[0] = True
    count = 1

    for d in range(m):
        signs = _incircle_batch(px, py, tri[:count], d)
        bad = np.nonzero(alive[:count] & (signs > 0))[0]
        if bad.size == 0:
            raise NumericalError(f"no enclosing cavity for point index {orig_idx[d]}")

        edges: dict[tuple[int, int], None] = {}
        for t in bad:
            i, j, k = tri[t]
            for e in ((i, j), (j, k), (k, i)):
                edges[e] = None
        alive[bad] = False

        for (a, b) in edges:
            if (b, a) in edges:
                continue
            if orient_sign(px[a], py[a], px[b], py[b], px[d], py[d]) <= 0:
                raise NumericalError(
                    f"degenerate cavity fan at point index {orig_idx[d]}"
                )
            if count == cap:
                cap *= 2
                tri = np.vstack([tri, np.empty((cap - count, 3), dtype=np.int64)])
                alive = np.concatenate([alive, np.zeros(cap - count, dtype=bool)])
            tri[count] = (a, b, d)
            alive[count] = True
            count += 1

    final = tri[:count][alive[:count]]
    real = final[np.all(final < m, axis=1)]
    return Triangulation(vertices=pts, triangles=orig_idx[real])
