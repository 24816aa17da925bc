"""Simple planar polygons: measures, convex clipping, affine maps.

Polygons are stored as CCW-ordered vertex arrays and stand in for sets of
finite perimeter; every boundary integral in the toolkit reduces to sums
over their edges.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidPolygon, SingularMatrix


def _cross(a, b):
    """z-component of the 2D cross product, broadcasting over rows."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_intersect(p, q, r, s):
    """True if closed segments [p,q] and [r,s] share a point."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if v > 0.0:
            return 1
        if v < 0.0:
            return -1
        return 0

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p, q, r), orient(p, q, s)
    o3, o4 = orient(r, s, p), orient(r, s, q)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_segment(p, q, r):
        return True
    if o2 == 0 and on_segment(p, q, s):
        return True
    if o3 == 0 and on_segment(r, s, p):
        return True
    if o4 == 0 and on_segment(r, s, q):
        return True
    return False


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple closed polygon with CCW vertex order and positive area.

    ``vertices`` is an (n, 2) float array; the closing edge from the last
    vertex back to the first is implicit.  Set ``check_simple=False`` only
    for constructions that guarantee simplicity (e.g. star-shaped graphs).
    """

    vertices: np.ndarray
    check_simple: bool = True

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidPolygon("need an (n, 2) array with n >= 3")
        if not np.all(np.isfinite(v)):
            raise InvalidPolygon("non-finite vertex coordinates")
        d = np.roll(v, -1, axis=0) - v
        if np.any(np.hypot(d[:, 0], d[:, 1]) == 0.0):
            raise InvalidPolygon("repeated consecutive vertices")
        object.__setattr__(self, "vertices", v)
        if self.signed_area <= 0.0:
            raise InvalidPolygon("vertices must be CCW with positive area")
        if self.check_simple:
            self._assert_simple()

    # -- derived quantities -------------------------------------------------

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    @cached_property
    def signed_area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(_cross(v, w)))

    @cached_property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.edge_vectors
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def edge_normals(self) -> np.ndarray:
        """Outward unit normals; for CCW order the exterior is to the right."""
        d = self.edge_vectors / self.edge_lengths[:, None]
        return np.stack([d[:, 1], -d[:, 0]], axis=1)

    @cached_property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @cached_property
    def barycenter(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = _cross(v, w)
        return (v + w).T @ c / (6.0 * self.signed_area)

    @cached_property
    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    # -- validation ---------------------------------------------------------

    def _assert_simple(self):
        """Reject self-intersections; O(n log n) typical via an x-sweep."""
        v = self.vertices
        n = self.n
        w = np.roll(v, -1, axis=0)
        xmin = np.minimum(v[:, 0], w[:, 0])
        xmax = np.maximum(v[:, 0], w[:, 0])
        ymin = np.minimum(v[:, 1], w[:, 1])
        ymax = np.maximum(v[:, 1], w[:, 1])
        order = np.argsort(xmin, kind="stable")
        sx_min, sx_max = xmin[order], xmax[order]
        for pos in range(n):
            i = order[pos]
            hi = sx_max[pos]
            for pos2 in range(pos + 1, n):
                if sx_min[pos2] > hi:
                    break
                j = order[pos2]
                if j == (i + 1) % n or i == (j + 1) % n:
                    continue
                if ymin[i] > ymax[j] or ymin[j] > ymax[i]:
                    continue
                if _segments_intersect(v[i], w[i], v[j], w[j]):
                    raise InvalidPolygon(
                        f"edges {i} and {j} intersect; polygon is not simple")

    # -- transforms ---------------------------------------------------------

    def translated(self, t) -> "Polygon":
        return Polygon(self.vertices + np.asarray(t, dtype=float),
                       check_simple=False)

    def scaled(self, s: float) -> "Polygon":
        if s <= 0.0:
            raise InvalidPolygon("scale factor must be positive")
        return Polygon(self.vertices * float(s), check_simple=False)


def polygon_measures(P: Polygon):
    """Return (area, perimeter, barycenter) of a valid polygon."""
    return P.signed_area, P.perimeter, P.barycenter.copy()


def _clip_halfplane(verts: np.ndarray, point: np.ndarray, normal: np.ndarray):
    """Clip a vertex loop against {x : (x - point) . normal <= 0}.

    Vectorized Sutherland-Hodgman step: emit kept vertices and crossing
    points in traversal order by interleaving the two candidate streams.
    """
    if verts.shape[0] == 0:
        return verts
    side = (verts - point) @ normal
    inside = side <= 0.0
    nxt = np.roll(np.arange(verts.shape[0]), -1)
    crossing = inside != inside[nxt]
    denom = side - side[nxt]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(crossing, side / np.where(denom == 0.0, 1.0, denom), 0.0)
    inter = verts + t[:, None] * (verts[nxt] - verts)

    m = verts.shape[0]
    slots = np.empty((2 * m, 2))
    keep = np.zeros(2 * m, dtype=bool)
    slots[0::2] = verts
    keep[0::2] = inside
    slots[1::2] = inter
    keep[1::2] = crossing
    return slots[keep]


def _loop_area(verts: np.ndarray) -> float:
    if verts.shape[0] < 3:
        return 0.0
    w = np.roll(verts, -1, axis=0)
    return 0.5 * float(np.sum(_cross(verts, w)))


def _require_convex(C: Polygon):
    v = C.vertices
    d = C.edge_vectors
    turn = _cross(d, np.roll(d, -1, axis=0))
    scale = C.edge_lengths.max() ** 2
    if np.any(turn < -1e-12 * scale):
        raise InvalidPolygon("clipper polygon must be convex")
    return v


def clip_convex(P: Polygon, C: Polygon) -> float:
    """Area of P intersected with a convex polygon C.

    Successive halfplane clipping of P by each edge of C; exact for polygon
    inputs up to roundoff.  P may be non-convex.
    """
    cv = _require_convex(C)
    normals = C.edge_normals
    verts = P.vertices
    for k in range(C.n):
        verts = _clip_halfplane(verts, cv[k], normals[k])
        if verts.shape[0] < 3:
            return 0.0
    return max(_loop_area(verts), 0.0)


def symmetric_difference_area(P: Polygon, C: Polygon) -> float:
    """|P Δ C| = |P| + |C| - 2 |P ∩ C| for convex C."""
    inter = clip_convex(P, C)
    return max(P.signed_area + C.signed_area - 2.0 * inter, 0.0)


def affine_map(P: Polygon, L, t=(0.0, 0.0)) -> Polygon:
    """Map vertices x -> L x + t; requires det L > 0 (orientation kept)."""
    L = np.asarray(L, dtype=float)
    if L.shape != (2, 2):
        raise SingularMatrix("L must be a 2x2 matrix")
    if np.linalg.det(L) <= 0.0:
        raise SingularMatrix("affine map requires det L > 0")
    return Polygon(P.vertices @ L.T + np.asarray(t, dtype=float),
                   check_simple=False)


# -- JSON wire format -------------------------------------------------------

def polygon_to_json(P: Polygon) -> dict:
    return {"vertices": P.vertices.tolist()}


def polygon_from_json(obj: dict) -> Polygon:
    """Load {"vertices": [[x, y], ...]}; CW input is reversed with a warning."""
    try:
        verts = np.asarray(obj["vertices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPolygon(f"malformed polygon JSON: {exc}") from exc
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        raise InvalidPolygon("polygon JSON needs >= 3 two-dimensional vertices")
    w = np.roll(verts, -1, axis=0)
    if 0.5 * np.sum(_cross(verts, w)) < 0.0:
        warnings.warn("polygon vertices were clockwise; reversing to CCW",
                      stacklevel=2)
        verts = verts[::-1]
    return Polygon(verts)
