"""Surface tensions, their gauge duals, and Wulff-shape construction.

A surface tension f is convex, positively 1-homogeneous, and positive on
the unit circle.  Four families are supported:

* ``crystalline`` -- f(v) = max_j x_j . v for a finite point set; the Wulff
  shape is the convex hull of the points.
* ``lp`` -- f(v) = (|v1|^p + |v2|^p)^(1/p), p in (1, inf); the gauge is the
  conjugate-exponent norm and the Wulff shape the l^q unit ball.
* ``quadratic`` -- f(v) = sqrt(v.Av) for SPD A; the uniformly elliptic
  family with an ellipse Wulff shape.
* ``euclidean`` -- f = |.|, the isotropic case.

An optional ``scale`` factor multiplies f (and therefore dilates the Wulff
shape by the same factor), which is how unit-volume normalization is done.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.special import gamma as _gamma_fn

from .errors import DegenerateTension, SingularMatrix, VertexHit
from .polygeom import Polygon, _cross

_ANGLE_TOL = 1e-12


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; returns hull vertices in CCW order."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] < 3:
        raise DegenerateTension("need at least 3 distinct points")
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:
        raise DegenerateTension("points are collinear")
    return hull


@dataclass(frozen=True, eq=False)
class SurfaceTension:
    """Tagged description of a surface tension f (see module docstring)."""

    kind: str
    points: np.ndarray | None = None
    p: float | None = None
    a: np.ndarray | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0.0 or not np.isfinite(self.scale):
            raise ValueError("scale must be positive and finite")
        if self.kind == "crystalline":
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
                raise DegenerateTension("crystalline needs an (m, 2) point set")
            if np.any(np.hypot(pts[:, 0], pts[:, 1]) == 0.0):
                raise DegenerateTension("crystalline points must be nonzero")
            # fold the scale into the point set so crystalline always has scale 1
            object.__setattr__(self, "points", pts * self.scale)
            object.__setattr__(self, "scale", 1.0)
            self._hull  # validates origin-in-interior
        elif self.kind == "lp":
            if self.p is None or not (1.0 < self.p < np.inf):
                raise ValueError("lp exponent must lie in (1, inf)")
        elif self.kind == "quadratic":
            A = np.asarray(self.a, dtype=float)
            if A.shape != (2, 2) or not np.allclose(A, A.T, atol=1e-12 * abs(A).max()):
                raise ValueError("quadratic matrix must be symmetric 2x2")
            if np.any(np.linalg.eigvalsh(A) <= 0.0):
                raise ValueError("quadratic matrix must be positive definite")
            object.__setattr__(self, "a", A)
        elif self.kind != "euclidean":
            raise ValueError(f"unknown tension kind {self.kind!r}")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def crystalline(points) -> "SurfaceTension":
        return SurfaceTension(kind="crystalline", points=np.asarray(points, float))

    @staticmethod
    def lp(p: float) -> "SurfaceTension":
        return SurfaceTension(kind="lp", p=float(p))

    @staticmethod
    def quadratic(a) -> "SurfaceTension":
        return SurfaceTension(kind="quadratic", a=np.asarray(a, float))

    @staticmethod
    def euclidean() -> "SurfaceTension":
        return SurfaceTension(kind="euclidean")

    # -- cached geometry -------------------------------------------------

    @cached_property
    def _hull(self) -> np.ndarray:
        hull = _convex_hull(self.points)
        # origin strictly inside <=> every edge has positive support distance
        w = np.roll(hull, -1, axis=0)
        d = w - hull
        nrm = np.stack([d[:, 1], -d[:, 0]], axis=1)
        nrm /= np.hypot(nrm[:, 0], nrm[:, 1])[:, None]
        H = np.sum(hull * nrm, axis=1)
        if np.any(H <= 1e-14 * np.abs(hull).max()):
            raise DegenerateTension("origin not interior to conv{x_j}")
        return hull

    @cached_property
    def _hull_normals(self) -> np.ndarray:
        hull = self._hull
        d = np.roll(hull, -1, axis=0) - hull
        nrm = np.stack([d[:, 1], -d[:, 0]], axis=1)
        return nrm / np.hypot(nrm[:, 0], nrm[:, 1])[:, None]

    @cached_property
    def _hull_supports(self) -> np.ndarray:
        return np.sum(self._hull * self._hull_normals, axis=1)

    @cached_property
    def q(self) -> float:
        """Hoelder conjugate of p (lp variant only)."""
        return self.p / (self.p - 1.0)

    def rescaled(self, s: float) -> "SurfaceTension":
        """Tension s*f, whose Wulff shape is s*K."""
        if self.kind == "crystalline":
            return SurfaceTension.crystalline(self.points * s)
        return replace(self, scale=self.scale * s)

    def normalized_to_unit_area(self) -> "SurfaceTension":
        """Rescale so the Wulff shape has unit area."""
        return self.rescaled(1.0 / np.sqrt(wulff_area(self)))


@dataclass(frozen=True)
class TensionBounds:
    """m <= f(v) <= M over unit vectors v."""
    m: float
    M: float


@dataclass(frozen=True, eq=False)
class WulffShape:
    """Convex polygon realization of K with per-edge normals and supports."""

    polygon: Polygon
    normals: np.ndarray = field(repr=False)
    supports: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)
    exact: bool = True

    @staticmethod
    def from_polygon(poly: Polygon, exact: bool) -> "WulffShape":
        normals = poly.edge_normals
        supports = np.sum(poly.vertices * normals, axis=1)
        return WulffShape(polygon=poly, normals=normals, supports=supports,
                          lengths=poly.edge_lengths, exact=exact)

    @property
    def area(self) -> float:
        return self.polygon.signed_area


# -- pointwise evaluation ----------------------------------------------------


def eval_tension(T: SurfaceTension, v) -> float | np.ndarray:
    """f(v); positively 1-homogeneous, positive away from 0.

    Accepts a single 2-vector or an (..., 2) array.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    x = v[None, :] if single else v
    if T.kind == "crystalline":
        out = np.max(x @ T.points.T, axis=-1)
    elif T.kind == "lp":
        out = T.scale * np.power(
            np.abs(x[..., 0]) ** T.p + np.abs(x[..., 1]) ** T.p, 1.0 / T.p)
    elif T.kind == "quadratic":
        out = T.scale * np.sqrt(np.einsum("...i,ij,...j->...", x, T.a, x))
    else:
        out = T.scale * np.hypot(x[..., 0], x[..., 1])
    return float(out[0]) if single else out


def eval_gauge(T: SurfaceTension, x) -> float | np.ndarray:
    """Gauge f*(x) = inf {t : x/t in K}; the Wulff shape is {f* < 1}."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    z = x[None, :] if single else x
    if T.kind == "crystalline":
        out = np.max(z @ (T._hull_normals / T._hull_supports[:, None]).T, axis=-1)
        out = np.maximum(out, 0.0)
    elif T.kind == "lp":
        q = T.q
        out = np.power(np.abs(z[..., 0]) ** q + np.abs(z[..., 1]) ** q,
                       1.0 / q) / T.scale
    elif T.kind == "quadratic":
        ainv = np.linalg.inv(T.a)
        out = np.sqrt(np.einsum("...i,ij,...j->...", z, ainv, z)) / T.scale
    else:
        out = np.hypot(z[..., 0], z[..., 1]) / T.scale
    return float(out[0]) if single else out


def _crystalline_active_edge(T: SurfaceTension, x: np.ndarray) -> np.ndarray:
    """Index of the K-edge hit by the radial projection of each row of x.

    Ties (vertex hits) resolve to the CCW-following edge, i.e. the edge
    whose angular sector starts at the shared vertex.
    """
    ratios = x @ (T._hull_normals / T._hull_supports[:, None]).T
    best = np.max(ratios, axis=-1)
    tie = ratios >= best[..., None] * (1.0 - 1e-12)
    k = ratios.shape[-1]
    idx = np.argmax(ratios, axis=-1)
    # successor edge wins a two-edge tie; scan once for the CCW-most member
    prev_in = np.take_along_axis(
        tie, ((idx - 1) % k)[..., None], axis=-1)[..., 0]
    succ = (idx + 1) % k
    succ_tied = np.take_along_axis(tie, succ[..., None], axis=-1)[..., 0]
    idx = np.where(succ_tied & ~prev_in, succ, idx)
    return idx


def wulff_normal(T: SurfaceTension, x) -> np.ndarray:
    """nu_K at the radial projection x / f*(x) onto the Wulff boundary.

    For polygonal K a vertex hit deterministically returns the normal of
    the CCW-adjacent edge.  Rows of x must be nonzero.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    z = x[None, :] if single else x
    if T.kind == "crystalline":
        out = T._hull_normals[_crystalline_active_edge(T, z)]
    elif T.kind == "lp":
        q = T.q
        g = np.sign(z) * np.abs(z) ** (q - 1.0)
        out = g / np.hypot(g[..., 0], g[..., 1])[..., None]
    elif T.kind == "quadratic":
        g = z @ np.linalg.inv(T.a).T
        out = g / np.hypot(g[..., 0], g[..., 1])[..., None]
    else:
        out = z / np.hypot(z[..., 0], z[..., 1])[..., None]
    return out[0] if single else out


def gauge_gradient(T: SurfaceTension, x) -> np.ndarray:
    """grad f*(x) = nu_0 / f(nu_0) with nu_0 the Wulff normal at x/f*(x).

    Satisfies f(grad f*(x)) = 1.  For polygonal K, raises VertexHit when
    the radial projection lies within angular tolerance 1e-12 of a vertex;
    callers wanting the deterministic tie-break use ``wulff_normal``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("gauge_gradient takes a single 2-vector")
    if np.hypot(*x) == 0.0:
        raise ValueError("gauge gradient undefined at the origin")
    if T.kind == "crystalline":
        vdirs = T._hull / np.hypot(T._hull[:, 0], T._hull[:, 1])[:, None]
        xdir = x / np.hypot(*x)
        # angular distance via the cross product of unit vectors
        sin_d = np.abs(_cross(vdirs, xdir[None, :]))
        cos_d = vdirs @ xdir
        if np.any((sin_d <= _ANGLE_TOL) & (cos_d > 0.0)):
            raise VertexHit("radial projection hits a Wulff vertex")
        k = int(_crystalline_active_edge(T, x[None, :])[0])
        return T._hull_normals[k] / T._hull_supports[k]
    nu = wulff_normal(T, x)
    return nu / eval_tension(T, nu)


# -- global descriptors ------------------------------------------------------


def _golden_refine(fun, lo, hi, minimize, tol=1e-10, iters=200):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if b - a < tol:
            break
        take_left = fc < fd if minimize else fc > fd
        if take_left:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return fc if (fc < fd) == minimize else fd


def tension_bounds(T: SurfaceTension) -> TensionBounds:
    """Extremes of f over the unit circle.

    Crystalline bounds come exactly from the hull structure (the minimum of
    the support function is the smallest edge distance, the maximum the
    farthest vertex).  Smooth variants scan 4096 angles and refine by
    golden section to 1e-10.
    """
    if T.kind == "crystalline":
        m = float(np.min(T._hull_supports))
        M = float(np.max(np.hypot(T._hull[:, 0], T._hull[:, 1])))
        return TensionBounds(m=m, M=M)

    theta = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    vals = eval_tension(T, np.stack([np.cos(theta), np.sin(theta)], axis=1))
    step = 2.0 * np.pi / 4096

    def f_of(t):
        return eval_tension(T, np.array([np.cos(t), np.sin(t)]))

    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    m = _golden_refine(f_of, theta[i_min] - step, theta[i_min] + step, True)
    M = _golden_refine(f_of, theta[i_max] - step, theta[i_max] + step, False)
    return TensionBounds(m=float(min(m, vals[i_min])),
                         M=float(max(M, vals[i_max])))


def tension_gradient(T: SurfaceTension, v: np.ndarray) -> np.ndarray:
    """grad f at v for the smooth variants; boundary point of K with normal v."""
    v = np.asarray(v, dtype=float)
    if T.kind == "lp":
        g = np.sign(v) * np.abs(v) ** (T.p - 1.0)
        f = eval_tension(T, v) / T.scale
        return T.scale * g / f ** (T.p - 1.0)
    if T.kind == "quadratic":
        return T.scale * (v @ T.a.T) / np.sqrt(np.einsum("i,ij,j->", v, T.a, v))
    if T.kind == "euclidean":
        return T.scale * v / np.hypot(*v)
    raise ValueError("tension_gradient is for smooth variants only")


def wulff_shape(T: SurfaceTension, N: int = 2048) -> WulffShape:
    """Construct the Wulff polygon of f.

    Crystalline tensions give the exact convex hull of the point set.  For
    smooth variants the boundary point with outward normal nu is grad f(nu)
    and we inscribe an N-gon at equispaced normal angles (O(N^-2) area and
    energy error).
    """
    if T.kind == "crystalline":
        return WulffShape.from_polygon(Polygon(T._hull, check_simple=False),
                                       exact=True)
    if N < 8:
        raise ValueError("smooth Wulff shapes need N >= 8")
    theta = 2.0 * np.pi * np.arange(N) / N
    nu = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if T.kind == "lp":
        g = np.sign(nu) * np.abs(nu) ** (T.p - 1.0)
        f = np.power(np.abs(nu[:, 0]) ** T.p + np.abs(nu[:, 1]) ** T.p,
                     1.0 / T.p)
        verts = T.scale * g / f[:, None] ** (T.p - 1.0)
    elif T.kind == "quadratic":
        f = np.sqrt(np.einsum("ni,ij,nj->n", nu, T.a, nu))
        verts = T.scale * (nu @ T.a.T) / f[:, None]
    else:
        verts = T.scale * nu
    return WulffShape.from_polygon(Polygon(verts, check_simple=False),
                                   exact=False)


def wulff_area(T: SurfaceTension) -> float:
    """|K| in closed form (hull area, ellipse area, or l^q ball area)."""
    if T.kind == "crystalline":
        return Polygon(T._hull, check_simple=False).signed_area
    if T.kind == "lp":
        q = T.q
        return T.scale ** 2 * 4.0 * _gamma_fn(1.0 + 1.0 / q) ** 2 / _gamma_fn(1.0 + 2.0 / q)
    if T.kind == "quadratic":
        return T.scale ** 2 * np.pi * np.sqrt(np.linalg.det(T.a))
    return T.scale ** 2 * np.pi


def gauge_singular_directions(T: SurfaceTension) -> np.ndarray:
    """Unit directions where f* fails to be analytic (edge-split points).

    Crystalline gauges kink along Wulff-vertex rays; l^p gauges (q < 2 dual
    exponent) lose higher regularity on the coordinate axes.  Quadratic and
    euclidean gauges are analytic away from the origin.
    """
    if T.kind == "crystalline":
        hull = T._hull
        return hull / np.hypot(hull[:, 0], hull[:, 1])[:, None]
    if T.kind == "lp":
        return np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    return np.zeros((0, 2))


def affine_map_tension(T: SurfaceTension, L) -> SurfaceTension:
    """Tension whose Wulff shape is L(K), for crystalline T and det L > 0.

    Realized by mapping the Wulff vertex set through L and rebuilding the
    crystalline tension from the image points (the support function of the
    image hull).
    """
    if T.kind != "crystalline":
        raise ValueError("affine_map_tension is defined for crystalline tensions")
    L = np.asarray(L, dtype=float)
    if L.shape != (2, 2) or np.linalg.det(L) <= 0.0:
        raise SingularMatrix("affine map requires a 2x2 matrix with det L > 0")
    return SurfaceTension.crystalline(T._hull @ L.T)


# -- JSON wire format --------------------------------------------------------


def tension_to_json(T: SurfaceTension) -> dict:
    if T.kind == "crystalline":
        out = {"kind": "crystalline", "points": T.points.tolist()}
    elif T.kind == "lp":
        out = {"kind": "lp", "p": T.p}
    elif T.kind == "quadratic":
        out = {"kind": "quadratic", "a": T.a.tolist()}
    else:
        out = {"kind": "euclidean"}
    if T.scale != 1.0:
        out["scale"] = T.scale
    return out


def tension_from_json(obj: dict) -> SurfaceTension:
    try:
        kind = obj["kind"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed tension JSON: {exc}") from exc
    scale = float(obj.get("scale", 1.0))
    if kind == "crystalline":
        T = SurfaceTension.crystalline(obj["points"])
        return T if scale == 1.0 else T.rescaled(scale)
    if kind == "lp":
        return SurfaceTension(kind="lp", p=float(obj["p"]), scale=scale)
    if kind == "quadratic":
        return SurfaceTension(kind="quadratic",
                              a=np.asarray(obj["a"], float), scale=scale)
    if kind == "euclidean":
        return SurfaceTension(kind="euclidean", scale=scale)
    raise ValueError(f"unknown tension kind {kind!r}")
