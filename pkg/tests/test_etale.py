from fractions import Fraction as Q

import pytest
from hypothesis import assume, given, settings, strategies as st

from ltgconvex.errors import UnsupportedMapKind
from ltgconvex.etale import (
    FiniteEtale, HelixBand, LineMap, PlanePolygon, check_G2, finite_locally_convex, is_etale,
    is_locally_convex_map,
)
from ltgconvex.finite import SpaceMap, factorize, fence, fence_circle, identity_map, pseudocircle, wrap_map
from ltgconvex.intervals import check_axioms, least_connected_table
from ltgconvex.ltg import etale_disjointness, etale_fibers, lift_structure
from ltgconvex.models import CylinderPoint, FiniteAtlas, plane_atlas

from strategies import continuous_maps

SQUARE = PlanePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
L_POLY = PlanePolygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])

# integer directions sorted by angle; star-shaped polygons around the origin are simple
DIRECTIONS = [(1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1),
              (-1, 0), (-2, -1), (-1, -1), (-1, -2), (0, -1), (1, -2), (1, -1), (2, -1)]


@st.composite
def star_polygons(draw):
    idx = sorted(draw(st.sets(st.integers(0, 15), min_size=3, max_size=9)))
    # consecutive directions must turn by less than a half-turn so the origin is inside
    gaps = [(idx[(i + 1) % len(idx)] - idx[i]) % 16 for i in range(len(idx))]
    assume(all(0 < gp < 8 for gp in gaps))
    radii = draw(st.lists(st.integers(1, 4), min_size=len(idx), max_size=len(idx)))
    return PlanePolygon([(DIRECTIONS[i][0] * r, DIRECTIONS[i][1] * r) for i, r in zip(idx, radii)])


def pseudocircle_atlas():
    pc = pseudocircle()
    charts = [least_connected_table(pc.subspace(pc.subset(pc.up[pc.idx(p)]))) for p in (0, 2)]
    return FiniteAtlas(pc, charts)


# -- locally convex subsets -----------------------------------------------------------------

def test_square_locally_convex():
    assert is_locally_convex_map(SQUARE) == (True, [])


def test_l_polygon_fails_exactly_at_reflex_corner():
    ok, bad = is_locally_convex_map(L_POLY)
    assert not ok and bad == [(1, 1)]
    assert [v for v in L_POLY.vertices if not L_POLY.locally_convex_oracle(v)] == [(1, 1)]


def test_helix_band_locally_convex():
    assert is_locally_convex_map(HelixBand(1, Q(1, 8)))[0]


@settings(max_examples=60, deadline=None)
@given(star_polygons())
def test_reflex_test_matches_corner_oracle(poly):
    _, bad = is_locally_convex_map(poly)
    assert set(bad) == {v for v in poly.vertices if not poly.locally_convex_oracle(v)}
    # in the plane a closed connected locally convex polygon is convex
    assert (not bad) == poly.is_convex()


def test_unsupported_descriptor():
    with pytest.raises(UnsupportedMapKind):
        is_locally_convex_map(object())


# -- finite étale maps ----------------------------------------------------------------------

def test_wrap_is_etale_and_not_injective():
    e = FiniteEtale(wrap_map(2, 4), pseudocircle_atlas())
    ok, wit = e.is_etale()
    assert ok and wit == []
    assert not e.f.is_injective()
    assert e.fiber(0) == {0, 4}


def _inclusion(space, pts):
    sub = space.subspace(pts)
    return SpaceMap(sub, space, {p: p for p in sub.points})


def test_inclusion_of_closed_convex_subspace_is_etale():
    atlas = FiniteAtlas.single(least_connected_table(fence(5)))
    assert FiniteEtale(_inclusion(fence(5), [0, 1, 2]), atlas).is_etale()[0]


def test_inclusion_with_open_ends_not_closed():
    atlas = FiniteAtlas.single(least_connected_table(fence(5)))
    ok, wit = FiniteEtale(_inclusion(fence(5), [1, 2, 3]), atlas).is_etale()
    assert not ok and [w["check"] for w in wit] == ["closed"]


def test_composition_of_etale_maps():
    outer = FiniteEtale(wrap_map(2, 4), pseudocircle_atlas())
    lifted = lift_structure(outer)
    assert lifted.validate().ok
    inner = FiniteEtale(wrap_map(2, 8), lifted)
    assert inner.is_etale()[0]
    comp = outer.compose(inner)
    assert comp.f.source == fence_circle(16)
    assert comp.is_etale()[0]
    assert len(comp.fiber(0)) == 4


def test_g2_on_fence():
    e = FiniteEtale(identity_map(fence(5)), FiniteAtlas.single(least_connected_table(fence(5))))
    assert check_G2(e, 0, 4) == (True, None)
    ok, wit = check_G2(e, 0, 2)
    assert not ok and wit == [0, 1, 2]


def _validated_atlas(space):
    cs = least_connected_table(space)
    if cs is None or not check_axioms(cs).ok:
        return None
    return FiniteAtlas.single(cs)


@settings(max_examples=150, deadline=None)
@given(continuous_maps(max_source=5, max_target=5))
def test_filtered_factor_inherits_local_convexity(f):
    atlas = _validated_atlas(f.target)
    assume(atlas is not None)
    ok, _ = finite_locally_convex(f, atlas)
    assume(ok)
    fs = factorize(f).fsharp
    assert finite_locally_convex(fs, atlas)[0]


# -- line maps ------------------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3, -2])
def test_equator_loops(k):
    e = LineMap.equator_loop(k)
    assert is_etale(e)[0]
    for y in [CylinderPoint(0, 0), CylinderPoint(Q(1, 3), 0), CylinderPoint(Q(7, 8), 0)]:
        fib, nbhd, separated = etale_fibers(e, y)
        assert len(fib) == abs(k) and separated
        assert len(nbhd) == abs(k)
    cover = e.chart_cover()
    assert all(etale_disjointness(e, U, V)[0] for U in cover for V in cover if U != V)


def test_degree_two_loop_sheets_disjoint():
    e = LineMap.equator_loop(2)
    cover = e.chart_cover()
    sheets = [el for el in cover if el.chart == 0]
    assert len(sheets) == 2
    U, V = sheets
    assert not e.injective_on([U.span, V.span])[0]
    assert e.spans_intersect(U, V) is None
    assert etale_disjointness(e, U, V) == (True, None)


def test_half_open_segment_not_etale():
    e = LineMap.segment_wrap(Q(1, 2), closed=(True, False))
    ok, wit = is_etale(e)
    assert not ok and any(w["check"] == "closed" for w in wit)


def test_closed_segment_wrap_etale():
    assert is_etale(LineMap.segment_wrap(1))[0]


def test_helix_one_strip_per_crossing():
    cover = LineMap.helix().chart_cover()
    per_chart = {}
    for el in cover:
        per_chart[el.chart] = per_chart.get(el.chart, 0) + 1
    assert per_chart == {0: 2, 1: 1, 2: 1, 3: 1}


def test_inclusion_fiber_at_most_one():
    e = LineMap.segment_wrap(Q(1, 3))
    assert len(etale_fibers(e, CylinderPoint(Q(1, 6), 0))[0]) == 1
    assert etale_fibers(e, CylinderPoint(Q(1, 2), 0))[0] == []


def test_g2_line_maps():
    assert check_G2(LineMap.helix())[0]
    assert not check_G2(LineMap.equator_loop(1))[0]
    assert check_G2(LineMap(plane_atlas(), (0, 0), (1, 1), ("interval", 0, 1, True, True)))[0]


def test_disjointness_fails_on_a_finite_fold():
    # fence 0 < 1 > 2 folded onto 0 < 1 is étale at finite scale (a non-Hausdorff carrier)
    # and its two cover opens meet at the open point 1
    src, tgt = fence(3), fence(2)
    fold = FiniteEtale(SpaceMap(src, tgt, {0: 0, 1: 1, 2: 0}), FiniteAtlas.single(least_connected_table(tgt)))
    assert fold.is_etale()[0]
    U, V = src.mask([0, 1]), src.mask([1, 2])
    ok, wit = etale_disjointness(fold, U, V)
    assert not ok and wit == {"overlap": [1]}
    # every open around 0 or 2 contains 1, so the fiber cannot be separated
    fib, nbhd, separated = etale_fibers(fold, 0)
    assert fib == [0, 2] and nbhd is None and not separated
