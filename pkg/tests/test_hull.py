"""Tests for exact convex hulls and point location."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from engine.errors import GeometryError
from engine.hull import (
    ConvexPolygon,
    HullAlgorithm,
    Location,
    contains,
    convex_hull,
    cross,
    monotone_chain,
    quickhull,
)
from tests.oracles import brute_hull

UNIT_SQUARE = [(0, 0), (0, 1), (1, 0), (1, 1)]

points_strategy = st.lists(
    st.tuples(st.integers(0, 63), st.integers(0, 63)), min_size=1, max_size=12
)


@pytest.mark.parametrize("hull_fn", [monotone_chain, quickhull, brute_hull])
def test_unit_square(hull_fn):
    assert hull_fn(UNIT_SQUARE).vertices == ((0, 0), (1, 0), (1, 1), (0, 1))


@pytest.mark.parametrize("hull_fn", [monotone_chain, quickhull])
def test_collinear_points_give_a_segment(hull_fn):
    hull = hull_fn([(0, 0), (1, 1), (2, 2)])
    assert hull.kind == 'segment'
    assert hull.vertices == ((0, 0), (2, 2))


@pytest.mark.parametrize("hull_fn", [monotone_chain, quickhull])
def test_single_point(hull_fn):
    hull = hull_fn([(5, 7), (5, 7)])
    assert hull.kind == 'point'
    assert hull.vertices == ((5, 7),)


@pytest.mark.parametrize("hull_fn", [monotone_chain, quickhull])
def test_empty_input_raises(hull_fn):
    with pytest.raises(GeometryError):
        hull_fn([])


def test_collinear_boundary_points_are_dropped():
    square = [(x, y) for x in range(4) for y in range(4)]
    assert monotone_chain(square).vertices == ((0, 0), (3, 0), (3, 3), (0, 3))


def test_every_turn_is_strictly_left():
    hull = monotone_chain([(0, 0), (6, 1), (5, 5), (1, 4), (3, 2), (2, 5)])
    n = len(hull)
    assert all(cross(hull.vertices[i], hull.vertices[(i + 1) % n], hull.vertices[(i + 2) % n]) > 0
               for i in range(n))


def test_dispatch_by_name():
    assert convex_hull(UNIT_SQUARE, "quickhull") == quickhull(UNIT_SQUARE)
    assert convex_hull(UNIT_SQUARE, HullAlgorithm.MONOTONE_CHAIN) == monotone_chain(UNIT_SQUARE)


@given(points_strategy)
def test_algorithms_agree(points):
    assert monotone_chain(points) == quickhull(points)


@given(points_strategy)
def test_hull_is_idempotent(points):
    hull = monotone_chain(points)
    assert monotone_chain(hull.vertices) == hull


@given(points_strategy)
@settings(max_examples=50)
def test_every_input_point_is_covered(points):
    hull = quickhull(points)
    assert all(contains(hull, p) is not Location.OUTSIDE for p in points)


def test_hulls_match_brute_force_oracle(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        points = [tuple(p) for p in rng.integers(0, 64, size=(n, 2)).tolist()]
        expected = brute_hull(points)
        assert monotone_chain(points) == expected, points
        assert quickhull(points) == expected, points


def test_contains_square_centre_and_vertex():
    square = monotone_chain([(0, 0), (2, 0), (2, 2), (0, 2)])
    assert contains(square, (1, 1)) is Location.INSIDE
    assert contains(square, (2, 2)) is Location.ON_BOUNDARY
    assert contains(square, (1, 0)) is Location.ON_BOUNDARY
    assert contains(square, (3, 1)) is Location.OUTSIDE


def test_contains_degenerate_polygons():
    point = ConvexPolygon(((3, 4),))
    assert contains(point, (3, 4)) is Location.ON_BOUNDARY
    assert contains(point, (4, 4)) is Location.OUTSIDE

    segment = ConvexPolygon(((0, 0), (4, 2)))
    assert contains(segment, (2, 1)) is Location.ON_BOUNDARY
    assert contains(segment, (6, 3)) is Location.OUTSIDE
    assert contains(segment, (1, 1)) is Location.OUTSIDE


def _half_plane_location(poly, p):
    n = len(poly)
    turns = [cross(poly.vertices[i], poly.vertices[(i + 1) % n], p) for i in range(n)]
    if min(turns) < 0:
        return Location.OUTSIDE
    return Location.ON_BOUNDARY if 0 in turns else Location.INSIDE


def test_contains_matches_half_plane_oracle(rng):
    checked = 0
    while checked < 500:
        hull = monotone_chain(rng.integers(0, 32, size=(int(rng.integers(3, 10)), 2)).tolist())
        if hull.kind != 'polygon':
            continue
        p = tuple(rng.integers(-2, 34, size=2).tolist())
        assert contains(hull, p) is _half_plane_location(hull, p)
        checked += 1


def test_bounds():
    hull = monotone_chain([(3, 1), (7, 4), (5, 9)])
    assert hull.bounds() == (3, 1, 7, 9)
    assert np.array(hull.vertices).shape == (3, 2)
