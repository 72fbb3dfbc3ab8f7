import json
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from ltgconvex import geometry as g
from ltgconvex.errors import BudgetExhausted, NotConnected, NotCovered
from ltgconvex.finite import FiniteSpace, fence
from ltgconvex.intervals import ConvexityStructure, least_connected_table, order_interval_table
from ltgconvex.models import (
    Atlas, CylinderPoint, FiniteAtlas, PlaneChart, canonical_form, cyl_geodesic, cylinder_atlas,
    essential_vertices, path_from_lift, plane_atlas, polypath_g2,
)
from ltgconvex.straightening import (
    StraighteningTrace, excise_self_intersections, hull_shrinks, inscribe_line_path, is_simple,
    minimal_connected_convex, replay, straighten,
)

from strategies import tree_structures

A = cylinder_atlas()
PLANE = plane_atlas()
small = st.integers(-6, 6).map(lambda k: Q(k, 2))
plane_polylines = st.lists(st.tuples(small, small), min_size=2, max_size=7)


def plane_path(pts):
    return path_from_lift("plane", PLANE, pts)


# -- excision -------------------------------------------------------------------------------

def test_simple_path_unchanged():
    p = plane_path([(0, 0), (1, 1), (2, 0)])
    assert excise_self_intersections(p, PLANE) is p


def test_figure_eight_becomes_two_segments():
    p = plane_path([(0, 0), (2, 2), (2, 0), (0, 2)])
    out = excise_self_intersections(p, PLANE)
    assert out.points == [(0, 0), (1, 1), (0, 2)]


def test_retrace_collapses():
    p = plane_path([(0, 0), (0, 1), (3, 1), (0, 1), (0, 2)])
    out = excise_self_intersections(p, PLANE)
    assert out.points == [(0, 0), (0, 1), (0, 2)]
    q = plane_path([(0, 0), (1, 0), (0, 0), (0, 1)])
    assert excise_self_intersections(q, PLANE).points == [(0, 0), (0, 1)]


@given(plane_polylines)
def test_excision_gives_simple_path_with_same_ends(pts):
    pts = [g.pt(p) for p in pts]
    if pts[0] == pts[-1]:
        return
    path = plane_path(pts)
    out = excise_self_intersections(path, PLANE)
    lifted = out.lift(PLANE)
    assert is_simple(lifted)
    assert lifted[0] == pts[0] and lifted[-1] == pts[-1]
    # only points of the input survive (vertices or points on its segments)
    for q in lifted:
        assert any(g.on_segment(q, a, b) for a, b in zip(pts, pts[1:]))


# -- straightening --------------------------------------------------------------------------

def test_straight_segment_zero_steps():
    tr = straighten(plane_path([(0, 0), (3, 1)]), PLANE)
    assert tr.steps == [] and tr.status == "converged"
    assert tr.final.points == [(0, 0), (3, 1)]


def test_plane_v_collapses():
    tr = straighten(plane_path([(0, 0), (1, 1), (2, 0)]), PLANE)
    assert tr.final.points == [(0, 0), (2, 0)]
    assert [s["rule"] for s in tr.steps] == ["R1"]


def square_wave(turns=1, teeth=4, amp=Q(1, 2)):
    lift = [(Q(0), Q(0))]
    for k in range(turns * teeth):
        u = Q(k, teeth)
        lift += [(u, amp), (u + Q(1, 2 * teeth), amp), (u + Q(1, 2 * teeth), Q(0)), (u + Q(1, teeth), Q(0))]
    lift.append((Q(turns), Q(1)))
    return path_from_lift("cylinder", A, lift)


def test_square_wave_becomes_helix():
    path = square_wave()
    assert path.winding(A) == 1
    tr = straighten(excise_self_intersections(path, A), A)
    assert tr.status == "converged" and tr.winding == 1
    assert tr.final == cyl_geodesic(CylinderPoint(0, 0), CylinderPoint(0, 1), 1)
    assert polypath_g2(tr.final, A)[0]


def test_budget_zero_raises_with_trace():
    with pytest.raises(BudgetExhausted) as info:
        straighten(square_wave(), A, budget=0)
    tr = info.value.trace
    assert tr.status == "budget_exhausted" and tr.steps == [] and tr.final is None


def test_budget_zero_fine_for_geodesic():
    assert straighten(cyl_geodesic(CylinderPoint(0, 0), CylinderPoint(0, 1), 1), A, budget=0).steps == []


def test_non_simple_input_rejected():
    with pytest.raises(ValueError):
        straighten(plane_path([(0, 0), (2, 2), (2, 0), (0, 2)]), PLANE)


def test_hole_makes_straightening_stuck():
    # three charts around a hole: the shortcut across the hole is not covered
    left = PlaneChart([g.pt(p) for p in [(-1, -1), (1, -1), (1, 3), (-1, 3)]])
    top = PlaneChart([g.pt(p) for p in [(-1, 2), (5, 2), (5, 3), (-1, 3)]])
    right = PlaneChart([g.pt(p) for p in [(3, -1), (5, -1), (5, 3), (3, 3)]])
    atlas = Atlas("plane", [left, top, right])
    path = path_from_lift("plane", atlas, [(0, 0), (0, Q(5, 2)), (4, Q(5, 2)), (4, 0)])
    with pytest.raises(BudgetExhausted) as info:
        straighten(path, atlas)
    assert info.value.trace.status == "stuck"


@st.composite
def cylinder_polylines(draw):
    """Lifted polylines with rational breakpoints and winding in -2..2."""
    k = draw(st.integers(-2, 2))
    a = (Q(draw(st.integers(0, 7)), 8), Q(draw(st.integers(-4, 4)), 4))
    b = (Q(draw(st.integers(0, 7)), 8) + k, Q(draw(st.integers(-4, 4)), 4))
    inner = draw(st.lists(st.tuples(st.integers(-24, 24).map(lambda x: Q(x, 8)),
                                    st.integers(-8, 8).map(lambda x: Q(x, 4))), max_size=4))
    return [a] + inner + [b], k


@settings(max_examples=60, deadline=None)
@given(cylinder_polylines())
def test_straightening_matches_geodesic_oracle(data):
    lift, k = data
    if lift[0] == lift[-1]:
        return
    path = path_from_lift("cylinder", A, lift)
    assert path.winding(A) == k
    simple = excise_self_intersections(path, A)
    assert simple.winding(A) == k
    tr = straighten(simple, A)
    hist = replay(tr, A)
    # winding is carried by the end points, which no step moves
    assert all(h[0] == hist[0][0] and h[-1] == hist[0][-1] for h in hist)
    assert all(hull_shrinks(x, y) for x, y in zip(hist, hist[1:]))
    assert all(len(y) < len(x) for x, y in zip(hist, hist[1:]))
    oracle = cyl_geodesic(path.start, path.end, k)
    assert canonical_form(tr.final, A) == canonical_form(oracle, A)
    assert tr.winding == k
    # idempotent
    again = straighten(tr.final, A)
    assert again.steps == [] and again.final == tr.final


def test_trace_json_round_trip_replays():
    tr = straighten(excise_self_intersections(square_wave(2), A), A)
    doc = json.loads(json.dumps(tr.to_json()))
    back = StraighteningTrace.from_json(doc)
    assert back.to_json() == tr.to_json()
    assert essential_vertices(back.final.lift(A)) == replay(back, A)[-1]


def test_tampered_trace_does_not_replay():
    tr = straighten(excise_self_intersections(square_wave(), A), A)
    tr.steps[0]["removed"] = ["9", "9"]
    with pytest.raises(ValueError):
        replay(tr, A)


# -- inscribed line paths -------------------------------------------------------------------

def box(x0, y0, x1, y1):
    return PlaneChart([g.pt(p) for p in [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]])


def test_inscribe_single_chart_interval_is_itself():
    arc = path_from_lift("plane", PLANE, [(0, 0), (2, 1)])
    assert inscribe_line_path(arc, PLANE, (Q(0), Q(0)), (Q(2), Q(1))) == arc


def test_inscribe_zigzag_over_three_charts():
    atlas = Atlas("plane", [box(-1, -1, 2, 2), box(1, -1, 4, 2), box(3, -1, 6, 2)])
    zig = [(0, 0), (1, 1), (2, 0), (3, 1), (4, 0), (5, 1)]
    arc = path_from_lift("plane", atlas, zig, charts=[0, 0, 1, 1, 2])
    line = inscribe_line_path(arc, atlas, g.pt((0, 0)), g.pt((5, 1)))
    assert line.charts == [0, 1, 2]
    assert line.points == [(0, 0), (Q(3, 2), Q(1, 2)), (Q(7, 2), Q(1, 2)), (5, 1)]
    line.validate(atlas)


def test_inscribe_outside_atlas():
    atlas = Atlas("plane", [box(-1, -1, 2, 2)])
    arc = path_from_lift("plane", PLANE, [(0, 0), (5, 0)])
    with pytest.raises(NotCovered):
        inscribe_line_path(arc, atlas, g.pt((0, 0)), g.pt((5, 0)))


def test_inscribe_finite_fence():
    cs = least_connected_table(fence(5))
    line = inscribe_line_path(list(range(5)), FiniteAtlas.single(cs), 0, 4)
    assert line.points == [0, 4] and line.segments == [frozenset(range(5))]


# -- minimal connected convex sets ----------------------------------------------------------

def test_minimal_on_fence_ends_is_whole_fence():
    cs = least_connected_table(fence(5))
    assert minimal_connected_convex(cs, 0, 4) == frozenset(range(5))
    assert minimal_connected_convex(cs, 2, 2) == {2}


def test_minimal_on_chain_is_order_interval():
    cs = order_interval_table(fence(6))
    assert minimal_connected_convex(cs, 1, 4) == cs.interval(1, 4)


def test_minimal_disconnected_raises():
    s = FiniteSpace([0, 1])
    cs = ConvexityStructure(s, {(0, 1): [0, 1]})
    with pytest.raises(NotConnected):
        minimal_connected_convex(cs, 0, 1)


@given(tree_structures(max_points=7), st.data())
def test_minimal_equals_interval(cs, data):
    pts = cs.space.points
    x = data.draw(st.sampled_from(pts))
    y = data.draw(st.sampled_from(pts))
    assert minimal_connected_convex(cs, x, y) == cs.interval(x, y)
