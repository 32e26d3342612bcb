"""
Convex Hull

Exact 2-D convex hulls of integer point sets, computed two independent ways
(Andrew's monotone chain and quickhull), plus convex point location.

Orientation convention, used everywhere in the toolkit:
    cross(o, a, b) = (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
A hull is stored with cross > 0 for every consecutive vertex triple, starting
from the lexicographically smallest (x, then y) vertex. In image coordinates
(y pointing down) this ring is clockwise on screen; it is counter-clockwise in
the usual y-up plot of the same numbers. Collinear boundary points are never
stored. All arithmetic is on Python ints, so no test can round.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

from engine.errors import GeometryError

Point = Tuple[int, int]


class HullAlgorithm(Enum):
    """Available hull constructions"""
    MONOTONE_CHAIN = "monotone_chain"
    QUICKHULL = "quickhull"


class Location(Enum):
    """Result of a point-location query"""
    INSIDE = "inside"
    ON_BOUNDARY = "on_boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class ConvexPolygon:
    """Canonical convex hull: distinct integer vertices in strict-turn order"""
    vertices: Tuple[Point, ...]

    @property
    def kind(self) -> str:
        """'point', 'segment' or 'polygon'"""
        return {1: 'point', 2: 'segment'}.get(len(self.vertices), 'polygon')

    def __len__(self) -> int:
        return len(self.vertices)

    def bounds(self) -> Tuple[int, int, int, int]:
        """(min_x, min_y, max_x, max_y)"""
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def cross(o: Point, a: Point, b: Point) -> int:
    """Exact orientation of (o, a, b): > 0 left turn, < 0 right turn, 0 collinear."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _unique_points(points: Iterable) -> List[Point]:
    unique = sorted({(int(p[0]), int(p[1])) for p in points})
    if not unique:
        raise GeometryError("Cannot compute the convex hull of an empty point set")
    return unique


def monotone_chain(points: Iterable) -> ConvexPolygon:
    """
    Convex hull by Andrew's monotone chain.

    Args:
        points: Non-empty iterable of integer (x, y) points; duplicates allowed

    Returns:
        Canonical ConvexPolygon

    Raises:
        GeometryError: If the point set is empty
    """
    pts = _unique_points(points)
    if len(pts) <= 2:
        return ConvexPolygon(tuple(pts))

    lower: List[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)

    upper: List[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)

    # Collinear input collapses both chains onto the two end points
    return ConvexPolygon(tuple(lower[:-1] + upper[:-1]))


def quickhull(points: Iterable) -> ConvexPolygon:
    """
    Convex hull by quickhull.

    Same contract as monotone_chain; the result is canonicalised so both
    algorithms return identical vertex sequences.
    """
    pts = _unique_points(points)
    first, last = pts[0], pts[-1]
    if len(pts) == 1:
        return ConvexPolygon((first,))

    below = [p for p in pts if cross(first, last, p) < 0]
    above = [p for p in pts if cross(last, first, p) < 0]
    ring = [first] + _hull_chain(first, last, below) + [last] + _hull_chain(last, first, above)
    return ConvexPolygon(tuple(ring))


def _hull_chain(a: Point, b: Point, candidates: Sequence[Point]) -> List[Point]:
    # Hull vertices strictly on the cross(a, b, .) < 0 side, ordered from a to b
    if not candidates:
        return []
    far = min(candidates, key=lambda p: (cross(a, b, p), p))
    left = [p for p in candidates if cross(a, far, p) < 0]
    right = [p for p in candidates if cross(far, b, p) < 0]
    return _hull_chain(a, far, left) + [far] + _hull_chain(far, b, right)


HULL_ALGORITHMS: Dict[HullAlgorithm, Callable[[Iterable], ConvexPolygon]] = {
    HullAlgorithm.MONOTONE_CHAIN: monotone_chain,
    HullAlgorithm.QUICKHULL: quickhull,
}


def convex_hull(points: Iterable, algorithm: HullAlgorithm = HullAlgorithm.MONOTONE_CHAIN) -> ConvexPolygon:
    """Dispatch to the configured hull algorithm."""
    return HULL_ALGORITHMS[HullAlgorithm(algorithm)](points)


def contains(poly: ConvexPolygon, p: Point) -> Location:
    """
    Classify a point against a convex polygon with exact integer arithmetic.

    Args:
        poly: Canonical convex polygon (point, segment or polygon)
        p: Integer query point (a pixel centre)

    Returns:
        Location.INSIDE, Location.ON_BOUNDARY or Location.OUTSIDE
    """
    verts = poly.vertices
    p = (int(p[0]), int(p[1]))

    if len(verts) == 1:
        return Location.ON_BOUNDARY if p == verts[0] else Location.OUTSIDE

    if len(verts) == 2:
        a, b = verts
        if cross(a, b, p) != 0:
            return Location.OUTSIDE
        within = (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
                  and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))
        return Location.ON_BOUNDARY if within else Location.OUTSIDE

    on_edge = False
    n = len(verts)
    for i in range(n):
        turn = cross(verts[i], verts[(i + 1) % n], p)
        if turn < 0:
            return Location.OUTSIDE
        if turn == 0:
            on_edge = True
    return Location.ON_BOUNDARY if on_edge else Location.INSIDE
