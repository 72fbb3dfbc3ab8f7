from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from ltgconvex import geometry as g

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=16)
points = st.tuples(rationals, rationals)


@pytest.mark.parametrize("text, value", [("1/2", Q(1, 2)), ("-3", Q(-3)), ("0", Q(0)), (7, Q(7))])
def test_frac_parses(text, value):
    assert g.frac(text) == value


def test_frac_refuses_floats():
    with pytest.raises(TypeError):
        g.frac(0.5)


@given(rationals)
def test_fmt_round_trip(x):
    assert g.frac(g.fmt(x)) == x


def test_point_in_polygon_square():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    sq = [g.pt(p) for p in sq]
    assert g.point_in_polygon((Q(1, 2), Q(1, 2)), sq) == 1
    assert g.point_in_polygon((Q(1), Q(1, 2)), sq) == 0
    assert g.point_in_polygon((Q(2), Q(1, 2)), sq) == -1


L = [g.pt(p) for p in [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]]


@pytest.mark.parametrize("a, b, inside", [
    ((0, 0), (2, 1), True),        # passes under the notch
    ((2, 1), (1, 2), False),       # cuts the missing corner
    ((0, 2), (2, 0), True),        # passes through the reflex corner (1, 1)
    ((0, 0), (0, 2), True),        # boundary edge
    ((Q(3, 2), Q(1, 2)), (Q(1, 2), Q(3, 2)), True),
])
def test_segment_in_L(a, b, inside):
    assert g.segment_in_polygon(g.pt(a), g.pt(b), L) == inside


@given(points, points, points, points)
def test_segment_intersections_lie_on_both(p, q, a, b):
    for s, t in g.segment_intersections(p, q, a, b):
        assert 0 <= s <= 1 and 0 <= t <= 1
        if p != q and a != b:
            assert g.lerp(p, q, s) == g.lerp(a, b, t)


@given(st.lists(points, min_size=1, max_size=12))
def test_convex_hull_contains_all_points(pts):
    hull = g.convex_hull(pts)
    for p in pts:
        assert g.in_hull(p, hull)
    # every hull vertex is an input point
    assert set(hull) <= set(pts)


@given(st.lists(points, min_size=3, max_size=10))
def test_hull_is_convex_and_ccw(pts):
    hull = g.convex_hull(pts)
    if len(hull) >= 3:
        n = len(hull)
        assert all(g.orient(hull[i - 1], hull[i], hull[(i + 1) % n]) > 0 for i in range(n))


def test_open_interval_in_halfplanes():
    sq = [g.pt(p) for p in [(0, 0), (1, 0), (1, 1), (0, 1)]]
    lo, hi = g.open_interval_in_halfplanes((Q(-1), Q(1, 2)), (Q(2), Q(1, 2)), sq)
    assert (lo, hi) == (Q(1, 3), Q(2, 3))
    assert g.open_interval_in_halfplanes((Q(-1), Q(2)), (Q(2), Q(2)), sq) is None
