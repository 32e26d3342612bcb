"""
Convex Polygon Rasterization

Fills a ConvexPolygon back into a binary mask with a closed inclusion rule:
pixel (x, y) is set iff its centre is inside or on the polygon, which is
exactly ``contains(poly, (x, y)) != OUTSIDE``.

Row intersections are computed as exact rationals. For an edge a -> b with
b.y != a.y the crossing at row y is

    x = (a.x * (b.y - a.y) + (y - a.y) * (b.x - a.x)) / (b.y - a.y)

and only its integer ceiling/floor are needed, taken with floor division on
integers. Points and segments go through the same edge walk, which yields
exactly their lattice points.
"""

from typing import Iterator, List, Tuple

import numpy as np

from engine.errors import GeometryError
from engine.hull import ConvexPolygon, Point

Span = Tuple[int, int, int]


def _edges(poly: ConvexPolygon) -> List[Tuple[Point, Point]]:
    verts = poly.vertices
    if len(verts) == 1:
        return [(verts[0], verts[0])]
    if len(verts) == 2:
        return [(verts[0], verts[1])]
    return [(verts[i], verts[(i + 1) % len(verts)]) for i in range(len(verts))]


def scanline_spans(poly: ConvexPolygon) -> Iterator[Span]:
    """
    Yield the lattice spans covered by a convex polygon.

    Args:
        poly: Canonical convex polygon

    Yields:
        (y, x_start, x_end) with x_end inclusive, rows in increasing y;
        rows without lattice points are skipped
    """
    _, min_y, _, max_y = poly.bounds()
    n_rows = max_y - min_y + 1
    lo = np.full(n_rows, np.iinfo(np.int64).max, dtype=np.int64)
    hi = np.full(n_rows, np.iinfo(np.int64).min, dtype=np.int64)

    for (ax, ay), (bx, by) in _edges(poly):
        if ay == by:
            row = ay - min_y
            lo[row] = min(lo[row], ax, bx)
            hi[row] = max(hi[row], ax, bx)
            continue

        if by < ay:
            (ax, ay), (bx, by) = (bx, by), (ax, ay)
        ys = np.arange(ay, by + 1, dtype=np.int64)
        den = by - ay
        num = ax * den + (ys - ay) * (bx - ax)
        rows = slice(ay - min_y, by - min_y + 1)
        lo[rows] = np.minimum(lo[rows], -((-num) // den))
        hi[rows] = np.maximum(hi[rows], num // den)

    for row in np.flatnonzero(lo <= hi):
        yield int(row + min_y), int(lo[row]), int(hi[row])


def paint_convex(canvas: np.ndarray, poly: ConvexPolygon) -> np.ndarray:
    """Set the polygon's pixels in an existing boolean canvas (in place)."""
    height, width = canvas.shape
    min_x, min_y, max_x, max_y = poly.bounds()
    if min_x < 0 or min_y < 0 or max_x >= width or max_y >= height:
        raise GeometryError(
            f"Polygon bounds ({min_x}, {min_y})-({max_x}, {max_y}) "
            f"fall outside a {width}x{height} raster"
        )
    for y, x_start, x_end in scanline_spans(poly):
        canvas[y, x_start:x_end + 1] = True
    return canvas


def fill_convex(poly: ConvexPolygon, width: int, height: int) -> np.ndarray:
    """
    Rasterize a convex polygon into a new mask.

    Args:
        poly: Canonical convex polygon with all vertices inside the raster
        width: Raster width in pixels
        height: Raster height in pixels

    Returns:
        ``bool`` mask of shape (height, width)

    Raises:
        GeometryError: If a vertex lies outside [0, width) x [0, height)
    """
    return paint_convex(np.zeros((height, width), dtype=bool), poly)
