"""Inscribed line paths, loop excision, straightening, and minimal convex sets.

Polylines are processed in the universal cover: the lift of a cylinder
path is a plane polyline whose end points fix the winding, so every
operation here preserves the winding by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import geometry as g
from .errors import BudgetExhausted, NotConnected, NotCovered, NotInChart
from .finite import FiniteSpace, chain_cover, popcount
from .intervals import ConvexityStructure, check_axioms
from .models import (
    Atlas, FiniteAtlas, PolyPath, essential_vertices, first_bend, path_from_lift, project,
    segment_chart_intervals, subdivide_segment,
)

Q = Fraction
DEFAULT_BUDGET = 10_000


def _jpt(q):
    return [g.fmt(q[0]), g.fmt(q[1])]


def _ppt(doc):
    return g.pt(doc)


# -- simplicity ------------------------------------------------------------------------------------

def self_intersections(lifted) -> list[tuple[int, int]]:
    """Pairs of segments that meet beyond the shared vertex of neighbours."""
    segs = list(zip(lifted, lifted[1:]))
    out = []
    for i, j in combinations(range(len(segs)), 2):
        hits = g.segment_intersections(*segs[i], *segs[j])
        if j == i + 1:
            hits = [h for h in hits if not (h[0] == 1 and h[1] == 0)]
        if hits:
            out.append((i, j))
    return out


def is_simple(lifted) -> bool:
    pts = [q for k, q in enumerate(lifted) if k == 0 or q != lifted[k - 1]]
    return not self_intersections(pts)


# -- excision -------------------------------------------------------------------------------------------

def excise_self_intersections(path: PolyPath, atlas: Atlas) -> PolyPath:
    """Remove loops front to back, in the cover.

    The prefix built so far is simple. For the next segment PQ, find the
    point z of PQ on the prefix that lies furthest along PQ, cut the prefix
    back to the first visit of z, and continue with zQ. Untouched paths are
    returned as they are.
    """
    L = path.lift(atlas)
    pts, chs = [L[0]], []
    changed = False
    for i in range(len(L) - 1):
        P, R = L[i], L[i + 1]
        assert pts[-1] == P
        if P == R:
            changed = True
            continue
        best = None
        for j in range(len(chs)):
            for s, t in g.segment_intersections(P, R, pts[j], pts[j + 1]):
                if s == 0:
                    continue
                key = (-s, j, t)
                if best is None or key < best:
                    best = key
        if best is None:
            pts.append(R)
            chs.append(path.charts[i])
            continue
        changed = True
        s, j, t = -best[0], best[1], best[2]
        z = g.lerp(P, R, s)
        if t == 0:
            pts, chs = pts[:j + 1], chs[:j]
        else:
            pts, chs = pts[:j + 1] + [z], chs[:j + 1]
        if z != R:
            pts.append(R)
            chs.append(path.charts[i])
    if not changed:
        return path
    return PolyPath(path.model, [project(path.model, q) for q in pts], chs)


# -- straightening ------------------------------------------------------------------------------------------

@dataclass
class StraighteningTrace:
    initial: PolyPath
    steps: list = field(default_factory=list)
    final: PolyPath | None = None
    status: str = "converged"
    winding: int | None = None

    def to_json(self):
        return {
            "initial": self.initial.to_json(),
            "steps": self.steps,
            "final": None if self.final is None else self.final.to_json(),
            "status": self.status,
            "winding": self.winding,
        }

    @classmethod
    def from_json(cls, doc):
        return cls(PolyPath.from_json(doc["initial"]), list(doc["steps"]),
                   None if doc["final"] is None else PolyPath.from_json(doc["final"]),
                   doc["status"], doc.get("winding"))


def _shared_chart(atlas: Atlas, a, c):
    """Least chart index with one copy holding the whole lifted segment ac."""
    for k, m, lo, hi in sorted(segment_chart_intervals(atlas, a, c), key=lambda r: r[0]):
        if lo < 0 and hi > 1:
            return k
    return None


def _finish(path, atlas, V):
    if len(V) == 1:
        return PolyPath(path.model, [project(path.model, V[0])], [], degenerate=True)
    return path_from_lift(path.model, atlas, V)


def straighten(path: PolyPath, atlas: Atlas, budget: int = DEFAULT_BUDGET) -> StraighteningTrace:
    """Remove bends left to right until the lift is a single segment.

    R1: the neighbours of the bend share a chart; the two segments become
    that chart interval. R2: they do not, but the straight segment between
    them is covered by the atlas; it replaces the bend, subdivided
    canonically. Either way the bend count drops by at least one, and the
    new segment lies in the triangle it replaces.
    """
    L = path.lift(atlas)
    if not is_simple(L):
        raise ValueError("path is not simple; run excise_self_intersections first")
    trace = StraighteningTrace(initial=path)
    trace.winding = path.winding(atlas) if path.model == "cylinder" else None
    V = essential_vertices(L)
    while True:
        i = first_bend(V)
        if i is None:
            break
        if len(trace.steps) >= budget:
            trace.status = "budget_exhausted"
            trace.final = None
            raise BudgetExhausted(f"no geodesic within {budget} steps", trace)
        a, b, c = V[i - 1], V[i], V[i + 1]
        k = _shared_chart(atlas, a, c)
        if k is not None:
            step = {"rule": "R1", "index": i, "removed": _jpt(b), "charts": [k]}
        else:
            try:
                _, pieces = subdivide_segment(atlas, a, c)
            except NotInChart:
                trace.status = "stuck"
                raise BudgetExhausted(f"bend {i} has no covered shortcut", trace)
            step = {"rule": "R2", "index": i, "removed": _jpt(b), "charts": pieces}
        step["shortcut"] = [_jpt(a), _jpt(c)]
        trace.steps.append(step)
        V = essential_vertices(V[:i] + V[i + 1:])
    trace.final = _finish(path, atlas, V)
    trace.status = "converged"
    return trace


def replay(trace: StraighteningTrace, atlas: Atlas) -> list:
    """Re-run the recorded steps; returns the lifted vertex list after each step."""
    V = essential_vertices(trace.initial.lift(atlas))
    history = [V]
    for step in trace.steps:
        i = step["index"]
        if V[i] != _ppt(step["removed"]) or [V[i - 1], V[i + 1]] != [_ppt(p) for p in step["shortcut"]]:
            raise ValueError(f"trace does not replay at step {len(history)}")
        V = essential_vertices(V[:i] + V[i + 1:])
        history.append(V)
    if trace.status == "converged":
        if _finish(trace.initial, atlas, V) != trace.final:
            raise ValueError("replayed path differs from the recorded result")
    return history


def hull_shrinks(before, after) -> bool:
    """Every vertex of ``after`` lies in the closed convex hull of ``before``."""
    hull = g.convex_hull(before)
    return all(g.in_hull(q, hull) for q in after)


# -- inscribed line paths --------------------------------------------------------------------------------------

def _locate(lifted, model, p):
    """First arc parameter (segment index + t) at which the polyline passes p."""
    for i in range(len(lifted) - 1):
        a, b = lifted[i], lifted[i + 1]
        for cand in _lifts_near(model, p, a, b):
            if g.on_segment(cand, a, b):
                if a == b:
                    return Q(i), cand
                return i + g.segment_param(cand, a, b), cand
    if len(lifted) == 1 and _lifts_near(model, p, lifted[0], lifted[0])[0] == lifted[0]:
        return Q(0), lifted[0]
    raise NotCovered(f"{p} is not on the arc")


def _lifts_near(model, p, a, b):
    if model != "cylinder":
        return [g.pt(p)]
    import math
    lo, hi = min(a[0], b[0]), max(a[0], b[0])
    return [(p.w + n, p.h) for n in range(math.floor(lo) - 1, math.ceil(hi) + 2)]


def _arc_point(lifted, s):
    i = min(int(s), len(lifted) - 2)
    return g.lerp(lifted[i], lifted[i + 1], s - i)


def _components(atlas, lifted):
    """Chart-trace components along the arc: (chart, a, b, a_in, b_in) in arc parameters."""
    n = len(lifted) - 1
    pieces = {}
    for i in range(n):
        for k, m, lo, hi in segment_chart_intervals(atlas, lifted[i], lifted[i + 1]):
            key = (k, m)
            a, b = i + max(lo, Q(0)), i + min(hi, Q(1))
            a_in, b_in = lo < 0, hi > 1
            lst = pieces.setdefault(key, [])
            if lst and lst[-1][3] and a_in and lst[-1][1] == a:
                lst[-1] = (lst[-1][0], b, lst[-1][2], b_in)
            else:
                lst.append((a, b, a_in, b_in))
    out = []
    for (k, m), lst in pieces.items():
        for a, b, a_in, b_in in lst:
            out.append((k, a, b, a_in, b_in))
    return out


def _comp_contains(c, s):
    _, a, b, a_in, b_in = c
    return (a < s or (a_in and s == a)) and (s < b or (b_in and s == b))


def inscribe_line_path(arc, atlas, x, y):
    """A line path from x to y whose waypoints lie on the arc.

    Polyline arcs: walk the chart-trace components greedily (furthest reach,
    lowest chart index on ties); the waypoint in each overlap is its first
    breakpoint, or its midpoint if it has none. Finite arcs (a subset of a
    finite space with a FiniteAtlas): chain the chart traces with
    ``chain_cover`` and take the least point of each overlap.
    """
    if isinstance(atlas, FiniteAtlas):
        return _inscribe_finite(arc, atlas, x, y)
    path = arc
    lifted = path.lift(atlas)
    sx, px = _locate(lifted, path.model, x)
    sy, py = _locate(lifted, path.model, y)
    # cut the sub-arc from x to y, in the cover
    if sx > sy:
        lifted = lifted[::-1]
        n = len(lifted) - 1
        sx, sy = n - sx, n - sy
    lo_i, hi_i = int(sx), int(sy)
    sub = [px] + [q for q in lifted[lo_i + 1:hi_i + 1] if q != px]
    if sub[-1] != py:
        sub.append(py)
    # shift so that x is lifted where the sub-arc begins
    if len(sub) == 1:
        return PolyPath(path.model, [project(path.model, px)], [])
    first = path.charts[0] if len(path.charts) == 1 else None
    if first is not None and _shared_chart_k(atlas, first, sub):
        return PolyPath(path.model, [project(path.model, sub[0]), project(path.model, sub[-1])], [first])
    comps = _components(atlas, sub)
    n = len(sub) - 1
    key = lambda c: (-c[2], c[0])
    here = sorted((c for c in comps if _comp_contains(c, Q(0))), key=key)
    if not here:
        raise NotCovered("arc start is not in any chart")
    cur, last = here[0], Q(0)
    waypoints, charts = [Q(0)], []
    while not _comp_contains(cur, Q(n)):
        reach = cur[2]
        nxt = sorted((c for c in comps if c[1] < reach < c[2] or (c[1] < reach == c[2] and c[4])), key=key)
        if not nxt:
            raise NotCovered("arc leaves the atlas")
        lo = max(nxt[0][1], last)
        inner = [Q(k) for k in range(int(lo) + 1, n) if lo < k < reach]
        w = inner[0] if inner else (lo + reach) / 2
        charts.append(cur[0])
        waypoints.append(w)
        cur, last = nxt[0], w
    charts.append(cur[0])
    waypoints.append(Q(n))
    pts = [_arc_point(sub, s) for s in waypoints]
    return PolyPath(path.model, [project(path.model, q) for q in pts], charts)


def _shared_chart_k(atlas, k, pts):
    chart = atlas.charts[k]
    for p, q in zip(pts, pts[1:]):
        if not any(lo < 0 and hi > 1 for _, lo, hi in chart.parameter_intervals(p, q)):
            return False
    # the whole polyline must sit in one copy
    sheets = set()
    for p, q in zip(pts, pts[1:]):
        sheets |= {m for m, lo, hi in chart.parameter_intervals(p, q) if lo < 0 and hi > 1}
    return len(sheets) <= 1


@dataclass
class FiniteLinePath:
    points: list
    charts: list[int]
    segments: list[frozenset]

    def to_json(self):
        return {"points": self.points, "charts": self.charts,
                "segments": [sorted(s, key=str) for s in self.segments]}


def _inscribe_finite(arc, atlas: FiniteAtlas, x, y) -> FiniteLinePath:
    S = atlas.space
    A = S.mask(arc)
    sub = S.subspace(A)
    cover = [sub.mask(S.subset(m & A)) for m in atlas.masks]
    if _or(cover) != sub.full:
        raise NotCovered("arc is not covered by the charts")
    chain = chain_cover(sub, x, y, cover)
    pts, ks, segs = [x], [], []
    for a, b in zip(chain, chain[1:]):
        overlap = cover[a] & cover[b]
        pts.append(sub.ordered(overlap)[0])
        ks.append(a)
    ks.append(chain[-1])
    pts.append(y)
    for (p, q), k in zip(zip(pts, pts[1:]), ks):
        segs.append(atlas.interval(k, p, q))
    return FiniteLinePath(pts, ks, segs)


def _or(masks):
    out = 0
    for m in masks:
        out |= m
    return out


# -- finite carriers ------------------------------------------------------------------------------------------------

def minimal_connected_convex(cs: ConvexityStructure, x, y) -> frozenset:
    """Least connected convex set holding x and y, by ascending cardinality.

    Ties go to the lexicographically least index tuple. On a validated
    structure the answer is the interval C(x, y), which is a one-segment
    line path; that is asserted.
    """
    s = cs.space
    i, j = s.idx(x), s.idx(y)
    base = 1 << i | 1 << j
    rest = [k for k in range(len(s)) if k not in (i, j)]
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            m = base
            for k in extra:
                m |= 1 << k
            if s.is_connected(m) and cs.is_convex_mask(m):
                out = s.subset(m)
                if cs.validated:
                    assert out == cs.interval(x, y)
                return out
    raise NotConnected(f"no connected set holds {x!r} and {y!r}")
