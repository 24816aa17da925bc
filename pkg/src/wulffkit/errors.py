"""Exception types raised by the toolkit."""


class WulffkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidPolygon(WulffkitError):
    """Polygon is self-intersecting, clockwise, or has fewer than 3 vertices."""


class DegenerateTension(WulffkitError):
    """Crystalline point set does not contain the origin in its hull interior."""


class SingularMatrix(WulffkitError):
    """Affine map has non-positive determinant."""


class VertexHit(WulffkitError):
    """Radial projection landed on a vertex of the Wulff polygon."""


class CenterOnVertex(WulffkitError):
    """Integration center coincides with a polygon vertex."""


class ZeroVector(WulffkitError):
    """Direction argument must be nonzero."""


class NoConvergence(WulffkitError):
    """Iterative procedure exhausted its budget before reaching tolerance."""


class SelfIntersection(WulffkitError):
    """Boundary perturbation too large to yield a simple polygon."""


class SideLost(WulffkitError):
    """Halfplane intersection dropped a side; set is not parallel to K."""


class BadTheta(WulffkitError):
    """Rhombus opening angle outside the admissible range."""


class ResolutionTooLow(WulffkitError):
    """Polygonization too coarse for the requested accuracy."""


class InsufficientData(WulffkitError):
    """Rate fit needs at least 4 positive pairs spanning a decade."""
