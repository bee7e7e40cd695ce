from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from morphkit.delaunay import (
    Triangulation,
    delaunay,
    incircle_sign,
    orient_sign,
)
from morphkit.errors import DataError
from morphkit.warp import triangle_area


def incircle_exact_oracle(a, b, c, d):
    """Independent exact in-circle via rational 3x3 determinant."""
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    dx, dy = Fraction(float(d[0])), Fraction(float(d[1]))
    rows = []
    for px, py in ((ax, ay), (bx, by), (cx, cy)):
        ex, ey = px - dx, py - dy
        rows.append((ex, ey, ex * ex + ey * ey))
    det = (
        rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0])
    )
    return (det > 0) - (det < 0)


def assert_delaunay_property(t: Triangulation):
    """Brute force: no vertex strictly inside any triangle's circumcircle."""
    pts = t.vertices
    for tri in t.triangles:
        a, b, c = pts[tri]
        for i, d in enumerate(pts):
            if i in tri:
                continue
            assert incircle_exact_oracle(a, b, c, d) <= 0, (
                f"point {i} strictly inside circumcircle of {tri.tolist()}"
            )


def hull_area(pts):
    return ConvexHull(pts).volume


class TestPredicates:
    def test_orient_basic(self):
        assert orient_sign(0, 0, 1, 0, 0, 1) == 1
        assert orient_sign(0, 0, 0, 1, 1, 0) == -1
        assert orient_sign(0, 0, 1, 1, 2, 2) == 0

    def test_orient_exact_fallback_on_float_dust(self):
        # 0.1 + 0.2 is not 0.3; the point lies exactly on y = x anyway
        c = 0.1 + 0.2
        assert orient_sign(0.0, 0.0, 3.0, 3.0, c, c) == 0

    def test_orient_tiny_perturbation(self):
        base = 1.0
        eps = np.nextafter(base, 2.0) - base
        # c is one ulp above the line through a and b
        assert orient_sign(0.0, 0.0, 2.0, 2.0, base, base + eps) != 0

    def test_incircle_basic(self):
        a, b, c = (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)
        assert incircle_sign(*a, *b, *c, 0.5, 0.5) == 1
        assert incircle_sign(*a, *b, *c, 2.0, 2.0) == -1
        assert incircle_sign(*a, *b, *c, 1.0, 1.0) == 0  # cocircular

    def test_incircle_matches_oracle_random(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            p = rng.uniform(-10, 10, size=(4, 2))
            if orient_sign(*p[0], *p[1], *p[2]) <= 0:
                p[[1, 2]] = p[[2, 1]]
            if orient_sign(*p[0], *p[1], *p[2]) <= 0:
                continue
            got = incircle_sign(*p[0], *p[1], *p[2], *p[3])
            assert got == incircle_exact_oracle(p[0], p[1], p[2], p[3])

    def test_incircle_near_cocircular(self):
        # points on the unit circle, one nudged by an ulp
        ang = np.array([0.1, 1.7, 3.0, 5.1])
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
        got = incircle_sign(*pts[0], *pts[1], *pts[2], *pts[3])
        assert got == incircle_exact_oracle(pts[0], pts[1], pts[2], pts[3])


class TestDelaunay:
    def test_single_triangle(self):
        t = delaunay([(0, 0), (4, 0), (0, 4)])
        t.validate()
        assert len(t.triangles) == 1

    def test_square_two_triangles(self):
        t = delaunay([(0, 0), (1, 0), (1, 1), (0, 1)])
        t.validate()
        assert len(t.triangles) == 2
        assert sum(triangle_area(t.vertices[tri]) for tri in t.triangles) == (
            pytest.approx(1.0, abs=1e-12)
        )

    def test_random_sets_delaunay_property(self):
        for seed in range(8):
            pts = np.random.default_rng(seed).uniform(-50, 50, size=(40, 2))
            t = delaunay(pts)
            t.validate()
            assert_delaunay_property(t)

    def test_area_matches_convex_hull(self):
        for seed in range(8):
            pts = np.random.default_rng(100 + seed).uniform(0, 200, size=(80, 2))
            t = delaunay(pts)
            total = sum(triangle_area(t.vertices[tri]) for tri in t.triangles)
            want = hull_area(pts)
            assert abs(total - want) <= 1e-9 * want

    def test_grid_with_many_cocircular_quads(self):
        gx, gy = np.meshgrid(np.arange(7.0), np.arange(6.0))
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        t = delaunay(pts)
        t.validate()
        assert_delaunay_property(t)
        total = sum(triangle_area(t.vertices[tri]) for tri in t.triangles)
        assert total == pytest.approx(30.0, abs=1e-9)

    def test_clustered_scales(self):
        rng = np.random.default_rng(4)
        near = rng.uniform(0, 1e-3, size=(20, 2))
        far = rng.uniform(500, 1000, size=(20, 2))
        pts = np.vstack([near, far])
        t = delaunay(pts)
        t.validate()
        assert_delaunay_property(t)

    def test_duplicates_use_first_occurrence(self):
        pts = np.array([(0.0, 0.0), (5.0, 0.0), (0.0, 5.0), (5.0, 5.0),
                        (0.0, 0.0), (5.0, 0.0)])
        t = delaunay(pts)
        t.validate()
        assert t.triangles.max() <= 3  # never references the duplicate rows
        assert len(t.triangles) == 2

    def test_collinear_raises(self):
        with pytest.raises(DataError):
            delaunay([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_too_few_distinct_raises(self):
        with pytest.raises(DataError):
            delaunay([(0, 0), (1, 1), (0, 0), (1, 1)])

    def test_non_finite_raises(self):
        with pytest.raises(DataError):
            delaunay([(0, 0), (1, np.nan), (2, 0)])

    def test_bad_shape_raises(self):
        with pytest.raises(DataError):
            delaunay(np.zeros((4, 3)))

    def test_validate_catches_flipped_winding(self):
        t = delaunay([(0, 0), (4, 0), (0, 4)])
        bad = Triangulation(t.vertices, t.triangles[:, [0, 2, 1]])
        with pytest.raises(DataError):
            bad.validate()

    def test_validate_catches_duplicate_triangle(self):
        t = delaunay([(0, 0), (4, 0), (0, 4)])
        bad = Triangulation(t.vertices, np.vstack([t.triangles, t.triangles]))
        with pytest.raises(DataError):
            bad.validate()

    @settings(deadline=None, max_examples=30)
    @given(
        seed=st.integers(0, 2**31 - 1),
        n=st.integers(3, 25),
        scale=st.sampled_from([1.0, 1e-4, 1e4]),
    )
    def test_property_random(self, seed, n, scale):
        pts = np.random.default_rng(seed).uniform(0, scale, size=(n, 2))
        try:
            t = delaunay(pts)
        except DataError:
            return  # collinear draws are legitimately rejected
        t.validate()
        assert_delaunay_property(t)
        try:
            want = hull_area(pts)
        except Exception:
            return  # qhull can reject nearly-degenerate sets we still handle
        total = sum(triangle_area(t.vertices[tri]) for tri in t.triangles)
        assert abs(total - want) <= 1e-9 * max(want, 1e-30)
