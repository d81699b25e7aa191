"""Planar geometry: points, oriented boxes, similarity transforms, quad IoU.

Coordinates follow the image convention (x right, y down). A box stored
counter-clockwise on screen therefore has a negative shoelace sum; all
routines here rely on that winding being normalized at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Point2(NamedTuple):
    """A 2D point in pixel coordinates (sub-pixel positions allowed)."""

    x: float
    y: float


def _shoelace(vertices: np.ndarray) -> float:
    """Signed shoelace sum (twice the signed area) of a closed polygon."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross(ox, oy, ax, ay, bx, by):
    """z-component of (a - o) x (b - o)."""
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


class OrientedBox:
    """Convex quadrilateral given by 4 vertices.

    Vertices are normalized at construction: counter-clockwise on screen
    (y-down), starting at the vertex with the smallest (y, x). Degenerate
    or non-convex quads are rejected.
    """

    __slots__ = ("_vertices",)

    def __init__(self, vertices) -> None:
        v = np.asarray(vertices, dtype=np.float64)
        if v.shape != (4, 2):
            raise ValueError(f"expected 4 vertices of (x, y), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("box vertices must be finite")
        area2 = _shoelace(v)
        if area2 > 0.0:  # clockwise on screen: flip
            v = v[::-1]
            area2 = -area2
        if area2 == 0.0:
            raise ValueError("degenerate quad: zero area")
        # Convexity: every corner must turn the same way (no straight or
        # reflex corners, which also rules out self-intersection).
        crosses = [
            _cross(v[i, 0], v[i, 1], v[(i + 1) % 4, 0], v[(i + 1) % 4, 1],
                   v[(i + 2) % 4, 0], v[(i + 2) % 4, 1])
            for i in range(4)
        ]
        if not all(c < 0.0 for c in crosses):
            raise ValueError("non-convex or self-intersecting quad")
        start = int(np.lexsort((v[:, 0], v[:, 1]))[0])
        v = np.roll(v, -start, axis=0)
        v.flags.writeable = False
        self._vertices = v

    @property
    def vertices(self) -> np.ndarray:
        """Read-only (4, 2) array of (x, y) vertices."""
        return self._vertices

    @property
    def centroid(self) -> Point2:
        cx, cy = self._vertices.mean(axis=0)
        return Point2(float(cx), float(cy))

    @classmethod
    def from_rect(cls, x0: float, y0: float, x1: float, y1: float) -> "OrientedBox":
        """Axis-aligned rectangle with corners (x0, y0) and (x1, y1)."""
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def __repr__(self) -> str:
        pts = ", ".join(f"({x:g}, {y:g})" for x, y in self._vertices)
        return f"OrientedBox([{pts}])"

    def __eq__(self, other) -> bool:
        return isinstance(other, OrientedBox) and np.array_equal(
            self._vertices, other._vertices
        )

    def __hash__(self) -> int:
        return hash(self._vertices.tobytes())


def _containment_tol(b: OrientedBox) -> float:
    scale = float(np.max(np.abs(b.vertices)))
    return 1e-12 * max(1.0, scale * scale)


def point_in_box(p, b: OrientedBox) -> bool:
    """True iff p lies inside or on the boundary of b."""
    px, py = float(p[0]), float(p[1])
    v = b.vertices
    tol = _containment_tol(b)
    for i in range(4):
        j = (i + 1) % 4
        if _cross(v[i, 0], v[i, 1], v[j, 0], v[j, 1], px, py) > tol:
            return False
    return True


def points_in_box(pts: np.ndarray, b: OrientedBox) -> np.ndarray:
    """Vectorized :func:`point_in_box` over an (N, 2) array of points."""
    pts = np.asarray(pts, dtype=np.float64)
    v = b.vertices
    tol = _containment_tol(b)
    inside = np.ones(len(pts), dtype=bool)
    for i in range(4):
        j = (i + 1) % 4
        ex, ey = v[j, 0] - v[i, 0], v[j, 1] - v[i, 1]
        cross = ex * (pts[:, 1] - v[i, 1]) - ey * (pts[:, 0] - v[i, 0])
        inside &= cross <= tol
    return inside


def polygon_area(vertices: np.ndarray) -> float:
    """Unsigned area of a simple polygon (empty/degenerate inputs give 0)."""
    v = np.asarray(vertices, dtype=np.float64)
    if len(v) < 3:
        return 0.0
    return abs(_shoelace(v)) * 0.5


def box_area(b: OrientedBox) -> float:
    """Shoelace area of the box, strictly positive by construction."""
    return polygon_area(b.vertices)


def intersect_convex(a: OrientedBox, b: OrientedBox) -> np.ndarray:
    """Intersection of two boxes as an (K, 2) convex polygon, K <= 8.

    Clips a against each half-plane of b (Sutherland-Hodgman). Returns an
    empty (0, 2) array when the boxes are disjoint.
    """
    poly = [tuple(p) for p in a.vertices]
    clip = b.vertices
    for i in range(4):
        if not poly:
            break
        cx, cy = clip[i]
        dx, dy = clip[(i + 1) % 4]
        ex, ey = dx - cx, dy - cy
        out = []
        n = len(poly)
        for k in range(n):
            px, py = poly[k]
            qx, qy = poly[(k + 1) % n]
            # interior of a screen-CCW polygon is where the cross is <= 0
            cp = ex * (py - cy) - ey * (px - cx)
            cq = ex * (qy - cy) - ey * (qx - cx)
            if cp <= 0.0:
                out.append((px, py))
            if (cp < 0.0 < cq) or (cq < 0.0 < cp):
                t = cp / (cp - cq)
                out.append((px + t * (qx - px), py + t * (qy - py)))
        poly = out
    if not poly:
        return np.empty((0, 2), dtype=np.float64)
    return np.asarray(poly, dtype=np.float64)


def overlap(b_est: OrientedBox, b_gt: OrientedBox) -> float:
    """Intersection-over-union of two boxes, clamped to [0, 1]."""
    inter = polygon_area(intersect_convex(b_est, b_gt))
    union = box_area(b_est) + box_area(b_gt) - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def _normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    theta = math.remainder(theta, 2.0 * math.pi)
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    return theta


@dataclass(frozen=True)
class SimilarityTransform:
    """p' = scale * R(rotation) * p + translation, with scale > 0."""

    scale: float = 1.0
    rotation: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "rotation", _normalize_angle(self.rotation))
        tx, ty = self.translation
        object.__setattr__(self, "translation", (float(tx), float(ty)))

    @property
    def matrix(self) -> np.ndarray:
        """2x2 linear part (scale times rotation)."""
        c = math.cos(self.rotation) * self.scale
        s = math.sin(self.rotation) * self.scale
        return np.array([[c, -s], [s, c]], dtype=np.float64)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Transform an (N, 2) array of points."""
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ self.matrix.T + np.asarray(self.translation)

    def inverse(self) -> "SimilarityTransform":
        inv_scale = 1.0 / self.scale
        c = math.cos(-self.rotation) * inv_scale
        s = math.sin(-self.rotation) * inv_scale
        tx, ty = self.translation
        return SimilarityTransform(
            scale=inv_scale,
            rotation=-self.rotation,
            translation=(-(c * tx - s * ty), -(s * tx + c * ty)),
        )

    def compose(self, other: "SimilarityTransform") -> "SimilarityTransform":
        """Transform equivalent to applying `other` first, then self."""
        m = self.matrix
        ox, oy = other.translation
        tx, ty = self.translation
        return SimilarityTransform(
            scale=self.scale * other.scale,
            rotation=self.rotation + other.rotation,
            translation=(m[0, 0] * ox + m[0, 1] * oy + tx,
                         m[1, 0] * ox + m[1, 1] * oy + ty),
        )


def apply_transform(t: SimilarityTransform, p) -> Point2:
    """Apply t to a single point."""
    x, y = t.apply(np.asarray([p], dtype=np.float64))[0]
    return Point2(float(x), float(y))


def transform_box(t: SimilarityTransform, b: OrientedBox) -> OrientedBox:
    """Apply t to all four vertices of b."""
    return OrientedBox(t.apply(b.vertices))
