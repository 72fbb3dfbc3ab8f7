"""Cylinder, plane and finite-carrier models with their atlases.

The cylinder is R/Z x R with circumference 1. All work on the cylinder is
done in the universal cover (the plane), where a chart strip of half-width
r centred at c has the lifted copies c + m - r < u < c + m + r. A polyline
is stored projected, with one chart index per segment, which pins down
the lift of every segment.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import geometry as g
from .errors import CrossChartUnsupported, InvalidSpace, NotInChart
from .finite import FiniteSpace
from .intervals import ConvexityStructure, check_axioms

Q = Fraction
HALF = Q(1, 2)
QUARTER = Q(1, 4)
# stand-ins for unbounded parameter ends; only t in [0, 1] ever matters
_LO, _HI = Q(-1), Q(2)


class DegenerateLoop(UserWarning):
    pass


# -- points and charts ---------------------------------------------------------------

@dataclass(frozen=True, order=True)
class CylinderPoint:
    w: Fraction
    h: Fraction

    def __init__(self, w, h):
        w = g.frac(w)
        object.__setattr__(self, "w", w - math.floor(w))
        object.__setattr__(self, "h", g.frac(h))

    @classmethod
    def from_lift(cls, p):
        return cls(p[0], p[1])

    def to_json(self):
        return [g.fmt(self.w), g.fmt(self.h)]

    def __repr__(self):
        return f"CylinderPoint({g.fmt(self.w)}, {g.fmt(self.h)})"


def wrap_near(w: Fraction, c: Fraction) -> Fraction:
    """The lift of angle ``w`` closest to ``c`` (ties go to the lower lift)."""
    u = w + math.floor(c - w)
    return u + 1 if c - u > HALF else u


@dataclass(frozen=True)
class StripChart:
    """Open angular strip (c - r, c + r) x R on the cylinder."""
    center: Fraction
    halfwidth: Fraction = QUARTER

    def __post_init__(self):
        c = g.frac(self.center)
        object.__setattr__(self, "center", c - math.floor(c))
        object.__setattr__(self, "halfwidth", g.frac(self.halfwidth))

    def lift(self, p: CylinderPoint):
        """Lift into the copy around ``center``; None if the point is outside."""
        u = wrap_near(p.w, self.center)
        if abs(u - self.center) < self.halfwidth:
            return (u, p.h)
        if self.halfwidth > HALF:
            for v in (u - 1, u + 1):
                if abs(v - self.center) < self.halfwidth:
                    return (v, p.h)
        return None

    def contains(self, p: CylinderPoint) -> bool:
        return self.lift(p) is not None

    def contains_lift(self, q) -> bool:
        m = math.floor(q[0] - self.center + HALF)
        return any(abs(q[0] - self.center - k) < self.halfwidth for k in (m - 1, m, m + 1))

    def parameter_intervals(self, p, q):
        """Open t-intervals where the lifted segment p + t(q - p) sits in one copy."""
        du = q[0] - p[0]
        c, r = self.center, self.halfwidth
        if du == 0:
            m = math.floor(p[0] - c + HALF)
            return [(k, _LO, _HI) for k in (m - 1, m, m + 1) if abs(p[0] - c - k) < r]
        u0, u1 = sorted((p[0], q[0]))
        out = []
        for m in range(math.floor(u0 - c - r), math.ceil(u1 - c + r) + 1):
            a, b = (c + m - r - p[0]) / du, (c + m + r - p[0]) / du
            lo, hi = min(a, b), max(a, b)
            if hi > 0 and lo < 1:
                out.append((m, max(lo, _LO), min(hi, _HI)))
        return out

    def to_json(self):
        return {"center": g.fmt(self.center), "halfwidth": g.fmt(self.halfwidth)}


@dataclass(frozen=True)
class PlaneChart:
    """Open convex polygon, or the whole plane when ``vertices`` is None."""
    vertices: tuple | None = None

    def __post_init__(self):
        if self.vertices is not None:
            object.__setattr__(self, "vertices", tuple(g.ccw(self.vertices)))

    def contains(self, p) -> bool:
        if self.vertices is None:
            return True
        return g.point_in_polygon(g.pt(p), self.vertices) == 1

    contains_lift = contains

    def lift(self, p):
        return g.pt(p) if self.contains(p) else None

    def parameter_intervals(self, p, q):
        if self.vertices is None:
            return [(None, _LO, _HI)]
        if p == q:
            return [(None, _LO, _HI)] if self.contains(p) else []
        iv = g.open_interval_in_halfplanes(p, q, self.vertices)
        if iv is None:
            return []
        lo = _LO if iv[0] is None else max(iv[0], _LO)
        hi = _HI if iv[1] is None else min(iv[1], _HI)
        return [(None, lo, hi)] if hi > 0 and lo < 1 and lo < hi else []

    def to_json(self):
        if self.vertices is None:
            return {"polygon": None}
        return {"polygon": [[g.fmt(x), g.fmt(y)] for x, y in self.vertices]}


@dataclass
class Atlas:
    model: str
    charts: list
    domain: object = None  # plane only: closed polygon the charts should cover

    def __len__(self):
        return len(self.charts)

    def charts_containing(self, p) -> list[int]:
        return [i for i, c in enumerate(self.charts) if c.contains(p)]

    def to_json(self):
        doc = {"model": self.model, "atlas": [c.to_json() for c in self.charts]}
        if self.domain is not None:
            doc["domain"] = [[g.fmt(x), g.fmt(y)] for x, y in self.domain]
        return doc

    @classmethod
    def from_json(cls, doc):
        model = doc["model"]
        if model == "cylinder":
            charts = [StripChart(c["center"], c.get("halfwidth", QUARTER)) for c in doc["atlas"]]
        elif model == "plane":
            charts = [PlaneChart(None if c.get("polygon") is None else [g.pt(v) for v in c["polygon"]])
                      for c in doc["atlas"]]
        else:
            raise ValueError(f"unknown model {model!r}")
        dom = doc.get("domain")
        return cls(model, charts, None if dom is None else [g.pt(v) for v in dom])


def cylinder_atlas(n: int = 4, halfwidth=QUARTER) -> Atlas:
    """Strips centred at k/n; the default is four strips of width 1/2."""
    return Atlas("cylinder", [StripChart(Q(k, n), halfwidth) for k in range(n)])


def plane_atlas(polygons=None) -> Atlas:
    if polygons is None:
        return Atlas("plane", [PlaneChart(None)])
    return Atlas("plane", [PlaneChart([g.pt(v) for v in poly]) for poly in polygons])


def project(model, q):
    return CylinderPoint(q[0], q[1]) if model == "cylinder" else q


# -- polylines ---------------------------------------------------------------------------------

@dataclass
class PolyPath:
    model: str
    points: list
    charts: list[int]
    degenerate: bool = False

    def __post_init__(self):
        if self.model == "cylinder":
            self.points = [p if isinstance(p, CylinderPoint) else CylinderPoint(*p) for p in self.points]
        else:
            self.points = [g.pt(p) for p in self.points]
        if len(self.charts) != max(len(self.points) - 1, 0):
            raise ValueError("need one chart index per segment")

    def __eq__(self, other):
        return (isinstance(other, PolyPath) and self.model == other.model
                and self.points == other.points and list(self.charts) == list(other.charts))

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def validate(self, atlas: Atlas):
        for i, j in enumerate(self.charts):
            chart = atlas.charts[j]
            for p in self.points[i:i + 2]:
                if not chart.contains(p):
                    raise NotInChart(f"breakpoint {p} of segment {i} is not in chart {j}")
            if self.model == "cylinder":
                a, b = chart.lift(self.points[i]), chart.lift(self.points[i + 1])
                if abs(a[0] - b[0]) >= HALF:
                    raise NotInChart(f"segment {i} spans half a turn or more")
        return self

    def lift(self, atlas: Atlas) -> list:
        """Breakpoints in the universal cover, starting from the stored first point."""
        if self.model != "cylinder":
            return list(self.points)
        first = self.points[0]
        out = [(first.w, first.h)]
        for i, j in enumerate(self.charts):
            chart = atlas.charts[j]
            a, b = chart.lift(self.points[i]), chart.lift(self.points[i + 1])
            if a is None or b is None:
                raise NotInChart(f"segment {i} leaves chart {j}")
            out.append(g.add(out[-1], g.sub(b, a)))
        return out

    def winding(self, atlas: Atlas) -> int:
        if self.model != "cylinder":
            return 0
        u = self.lift(atlas)[-1][0] - self.end.w
        assert u.denominator == 1
        return int(u)

    def to_json(self):
        pts = [p.to_json() if isinstance(p, CylinderPoint) else [g.fmt(p[0]), g.fmt(p[1])] for p in self.points]
        doc = {"model": self.model, "breakpoints": pts, "charts": list(self.charts)}
        if self.degenerate:
            doc["degenerate"] = True
        return doc

    @classmethod
    def from_json(cls, doc):
        return cls(doc["model"], [tuple(p) for p in doc["breakpoints"]], list(doc["charts"]),
                   bool(doc.get("degenerate", False)))


def segment_chart_intervals(atlas: Atlas, p, q):
    """(chart, sheet, lo, hi) for every lifted chart copy meeting segment pq."""
    out = []
    for i, c in enumerate(atlas.charts):
        for m, lo, hi in c.parameter_intervals(p, q):
            out.append((i, m, lo, hi))
    return out


def subdivide_segment(atlas: Atlas, p, q):
    """Canonical chart subdivision of the lifted segment pq.

    Walk from t = 0 taking the chart copy that reaches furthest (lowest
    index on ties), and break at the midpoint of the overlap with the
    next such copy. Returns (inner break points, chart per piece).
    """
    ivs = segment_chart_intervals(atlas, p, q)
    key = lambda iv: (-iv[3], iv[0])
    here = sorted((iv for iv in ivs if iv[2] < 0 < iv[3]), key=key)
    if not here:
        raise NotInChart(f"lifted point {p} is not in any chart")
    cur, t, breaks, charts = here[0], Q(0), [], []
    while cur[3] <= 1:
        reach = cur[3]
        nxt = sorted((iv for iv in ivs if iv[2] < reach < iv[3]), key=key)
        if not nxt:
            raise NotInChart(f"segment from {p} to {q} leaves the atlas")
        b = (max(nxt[0][2], t) + reach) / 2
        charts.append(cur[0])
        breaks.append(b)
        cur, t = nxt[0], b
    charts.append(cur[0])
    return [g.lerp(p, q, b) for b in breaks], charts


def path_from_lift(model: str, atlas: Atlas, lifted, charts=None) -> PolyPath:
    """Project a lifted polyline. Segments without a chart get the canonical subdivision."""
    lifted = [g.pt(q) for q in lifted]
    if len(lifted) == 1:
        return PolyPath(model, [project(model, lifted[0])], [])
    pts, cs = [lifted[0]], []
    for i, (p, q) in enumerate(zip(lifted, lifted[1:])):
        if charts is not None and charts[i] is not None:
            cs.append(charts[i])
        else:
            inner, pieces = subdivide_segment(atlas, p, q)
            pts.extend(inner)
            cs.extend(pieces)
        pts.append(q)
    return PolyPath(model, [project(model, q) for q in pts], cs)


def essential_vertices(lifted) -> list:
    """Drop repeated points and straight-through interior vertices of a lifted polyline."""
    out = []
    for q in lifted:
        if out and out[-1] == q:
            continue
        while len(out) >= 2 and g.orient(out[-2], out[-1], q) == 0 and \
                g.dot(g.sub(out[-1], out[-2]), g.sub(q, out[-1])) > 0:
            out.pop()
        out.append(q)
    return out


def canonical_form(path: PolyPath, atlas: Atlas) -> PolyPath:
    """Merge collinear pieces in the cover, then subdivide canonically."""
    lifted = essential_vertices(path.lift(atlas))
    return path_from_lift(path.model, atlas, lifted)


# -- cylinder intervals and geodesics ---------------------------------------------------------------

def cyl_interval(a: CylinderPoint, b: CylinderPoint, chart: StripChart, atlas: Atlas | None = None) -> PolyPath:
    """The chart interval between two points of one strip, as a one-segment path."""
    la, lb = chart.lift(a), chart.lift(b)
    if la is None or lb is None:
        raise NotInChart(f"{a} or {b} is outside the strip at {g.fmt(chart.center)}")
    if abs(la[0] - lb[0]) >= HALF:
        raise NotInChart(f"{a} and {b} are at least half a turn apart")
    idx = 0
    if atlas is not None:
        idx = atlas.charts.index(chart)
    if a == b:
        return PolyPath("cylinder", [a], [])
    return PolyPath("cylinder", [a, b], [idx])


def cyl_interval_points(a: CylinderPoint, b: CylinderPoint, chart: StripChart, t) -> CylinderPoint:
    """Point at parameter ``t`` on the chart interval from a to b."""
    la, lb = chart.lift(a), chart.lift(b)
    return CylinderPoint.from_lift(g.lerp(la, lb, g.frac(t)))


def cyl_geodesic(a: CylinderPoint, b: CylinderPoint, winding: int, atlas: Atlas | None = None) -> PolyPath:
    """Projection of the straight lift from (a.w, a.h) to (b.w + winding, b.h)."""
    atlas = atlas or cylinder_atlas()
    if a == b and winding == 0:
        return PolyPath("cylinder", [a], [], degenerate=True)
    return path_from_lift("cylinder", atlas, [(a.w, a.h), (b.w + winding, b.h)])


def geodesic_lift(a: CylinderPoint, b: CylinderPoint, winding: int):
    return [(a.w, a.h), (b.w + winding, b.h)]


def minimal_windings(a: CylinderPoint, b: CylinderPoint) -> list[int]:
    """Windings whose lift has least angular span: two for antipodal points, else one."""
    d = b.w - a.w
    spans = {k: abs(d + k) for k in (-2, -1, 0, 1)}
    best = min(spans.values())
    return sorted(k for k, s in spans.items() if s == best)


# -- atlas validation ----------------------------------------------------------------------------------

@dataclass
class AtlasReport:
    ok: bool
    charts: list
    cover: bool
    closure: bool
    witnesses: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "charts": self.charts, "cover": self.cover,
                "closure": self.closure, "witnesses": self.witnesses}


def _cyl_chart_record(i, c: StripChart):
    if c.halfwidth <= 0:
        return {"chart": i, "ok": False, "reason": "empty strip"}
    if c.halfwidth > QUARTER:
        p, q = CylinderPoint(c.center - QUARTER, 0), CylinderPoint(c.center + QUARTER, 0)
        # both points are in the strip and are joined by two lifts of span 1/2
        return {"chart": i, "ok": False, "reason": "shortest paths not unique",
                "points": [p.to_json(), q.to_json()], "windings": minimal_windings(p, q)}
    return {"chart": i, "ok": True}


def _cyl_covered(atlas: Atlas) -> list:
    """Uncovered strip end points (empty iff the open strips cover the circle)."""
    if not atlas.charts:
        return [CylinderPoint(0, 0)]
    bad = []
    for c in atlas.charts:
        for e in (c.center - c.halfwidth, c.center + c.halfwidth):
            p = CylinderPoint(e, 0)
            if not any(d.contains(p) for d in atlas.charts):
                bad.append(p)
    return bad


def _plane_chart_record(i, c: PlaneChart):
    if c.vertices is None:
        return {"chart": i, "ok": True}
    v = list(c.vertices)
    if not g.is_strictly_convex(v):
        n = len(v)
        reflex = [v[k] for k in range(n) if g.orient(v[k - 1], v[k], v[(k + 1) % n]) <= 0]
        return {"chart": i, "ok": False, "reason": "polygon not strictly convex",
                "points": [[g.fmt(x), g.fmt(y)] for x, y in reflex]}
    return {"chart": i, "ok": True}


def _random_point_in(rng, chart, model):
    """A seeded rational point of the chart (cylinder: lifted)."""
    den = 64
    if model == "cylinder":
        r = chart.halfwidth
        u = chart.center - r + (2 * r) * Q(rng.randrange(1, den), den)
        return (u, Q(rng.randrange(-den, den), 8))
    if chart.vertices is None:
        return (Q(rng.randrange(-den, den), 8), Q(rng.randrange(-den, den), 8))
    v = chart.vertices
    w = [rng.randrange(1, den) for _ in v]
    s = sum(w)
    return (sum(Q(wi, s) * p[0] for wi, p in zip(w, v)), sum(Q(wi, s) * p[1] for wi, p in zip(w, v)))


def _sample_subregion_check(rng, chart, model):
    """Pick a random open box inside the chart and check it is itself a chart.

    The box is convex, so intervals between its points stay inside it; we
    check that directly on two random points and their midpoint.
    """
    p, q = _random_point_in(rng, chart, model), _random_point_in(rng, chart, model)
    lo = (min(p[0], q[0]), min(p[1], q[1]))
    hi = (max(p[0], q[0]), max(p[1], q[1]))
    if lo[0] == hi[0] or lo[1] == hi[1]:
        return True
    box = PlaneChart([lo, (hi[0], lo[1]), hi, (lo[0], hi[1])])
    x = g.lerp(lo, hi, Q(rng.randrange(1, 16), 16))
    y = g.lerp(lo, hi, Q(rng.randrange(1, 16), 16))
    mid = g.lerp(x, y, HALF)
    inside = box.contains(x) and box.contains(y) and box.contains(mid)
    if model == "cylinder":
        inside = inside and abs(x[0] - y[0]) < HALF and chart.contains_lift(mid)
    else:
        inside = inside and chart.contains(mid)
    return inside


def validate_atlas(atlas, samples: int = 64, seed: int = 0) -> AtlasReport:
    """Chart axioms, cover of the declared domain, and sampled closure under convex open subregions."""
    if isinstance(atlas, FiniteAtlas):
        return atlas.validate()
    rng = random.Random(seed)
    witnesses = []
    if atlas.model == "cylinder":
        records = [_cyl_chart_record(i, c) for i, c in enumerate(atlas.charts)]
        holes = _cyl_covered(atlas)
        cover = not holes
        if holes:
            witnesses.append({"check": "cover", "points": [p.to_json() for p in holes]})
    elif atlas.model == "plane":
        records = [_plane_chart_record(i, c) for i, c in enumerate(atlas.charts)]
        cover = True
        if atlas.domain is not None:
            dom = g.ccw(atlas.domain)
            probes = list(dom)
            for _ in range(samples):
                w = [rng.randrange(1, 64) for _ in dom]
                s = sum(w)
                probes.append((sum(Q(a, s) * p[0] for a, p in zip(w, dom)), sum(Q(a, s) * p[1] for a, p in zip(w, dom))))
            missed = [p for p in probes if not atlas.charts_containing(p)]
            cover = not missed
            if missed:
                witnesses.append({"check": "cover", "points": [[g.fmt(x), g.fmt(y)] for x, y in missed[:5]]})
    else:
        raise ValueError(f"unknown model {atlas.model!r}")
    closure = True
    for rec, chart in zip(records, atlas.charts):
        if not rec["ok"]:
            witnesses.append({"check": "chart", **rec})
            continue
        for _ in range(samples):
            if not _sample_subregion_check(rng, chart, atlas.model):
                closure = False
                witnesses.append({"check": "closure", "chart": rec["chart"]})
                break
    ok = cover and closure and all(r["ok"] for r in records)
    return AtlasReport(ok, records, cover, closure, witnesses)


# -- finite carriers ------------------------------------------------------------------------------

class FiniteAtlas:
    """Charts are convexity structures on open subspaces of a finite space.

    The closure condition (every convex open subspace of a chart is a chart)
    is built in: :meth:`chart_for` searches all charts for one in which a
    set is convex, and restriction to a convex open part is automatic.
    """

    model = "finite"

    def __init__(self, space: FiniteSpace, charts):
        self.space = space
        self.charts = list(charts)
        self.masks = []
        for cs in self.charts:
            m = space.mask(cs.space.points)
            if not space.is_open(m):
                raise InvalidSpace(f"chart {cs.space.points} is not open")
            sub = space.subspace(m)
            if sub != cs.space:
                raise InvalidSpace("chart topology differs from the subspace topology")
            self.masks.append(m)

    @classmethod
    def single(cls, cs: ConvexityStructure) -> "FiniteAtlas":
        return cls(cs.space, [cs])

    def __len__(self):
        return len(self.charts)

    def chart_mask_convex(self, k: int, mask: int) -> bool:
        """Is ``mask`` (a mask of the ambient space) a convex subset of chart k?"""
        if mask & ~self.masks[k]:
            return False
        cs = self.charts[k]
        return cs.is_convex_mask(cs.space.mask(self.space.subset(mask)))

    def chart_for(self, mask: int):
        """Least chart index in which ``mask`` is convex, or None."""
        for k in range(len(self.charts)):
            if self.chart_mask_convex(k, mask):
                return k
        return None

    def interval(self, k: int, x, y) -> frozenset:
        return self.charts[k].interval(x, y)

    def validate(self) -> AtlasReport:
        s = self.space
        records, witnesses = [], []
        closure = True
        for k, cs in enumerate(self.charts):
            rep = check_axioms(cs, strict=False)
            records.append({"chart": k, "ok": rep.ok, "axioms": rep.to_dict()})
            if not rep.ok:
                witnesses.append({"check": "chart", "chart": k, "witnesses": rep.witnesses})
                continue
            for m in cs.space.opens():
                if m and cs.is_convex_mask(m):
                    sub = cs.restrict(cs.space.subset(m))
                    if not check_axioms(sub, strict=False).ok:
                        closure = False
                        witnesses.append({"check": "closure", "chart": k, "subset": cs.space.ordered(m)})
        covered = 0
        for m in self.masks:
            covered |= m
        cover = covered == s.full
        if not cover:
            witnesses.append({"check": "cover", "points": s.ordered(s.full & ~covered)})
        ok = cover and closure and all(r["ok"] for r in records)
        return AtlasReport(ok, records, cover, closure, witnesses)

    def to_json(self):
        return {"model": "finite", "space": self.space.to_dict(), "atlas": [cs.to_dict() for cs in self.charts]}

    @classmethod
    def from_json(cls, doc):
        space = FiniteSpace.from_dict(doc["space"])
        return cls(space, [ConvexityStructure.from_dict(c) for c in doc["atlas"]])


# -- G1 ---------------------------------------------------------------------------------------------------

def check_G1(atlas, F):
    """Hull of F inside one chart, with its closure certified compact.

    Returns (True, hull) where the hull is a vertex list (models) or a
    point set (finite carriers). Raises CrossChartUnsupported if no single
    chart holds F.
    """
    if isinstance(atlas, FiniteAtlas):
        s = atlas.space
        mask = s.mask(F)
        for k, cs in enumerate(atlas.charts):
            if mask & ~atlas.masks[k] == 0:
                hull = cs.hull_mask(cs.space.mask(F))
                # finite sets are compact and the closure of a finite set is finite
                return True, frozenset(cs.space.subset(hull))
        raise CrossChartUnsupported("points are not in a common chart")
    F = list(F)
    for k, chart in enumerate(atlas.charts):
        if atlas.model == "cylinder":
            lifts = [chart.lift(p if isinstance(p, CylinderPoint) else CylinderPoint(*p)) for p in F]
            if any(q is None for q in lifts):
                continue
            us = [q[0] for q in lifts]
            if max(us) - min(us) >= HALF:
                continue
        else:
            lifts = [g.pt(p) for p in F]
            if not all(chart.contains(q) for q in lifts):
                continue
        hull = g.convex_hull(lifts)
        # a polygon with finitely many rational vertices is closed and bounded
        return True, [project(atlas.model, q) for q in hull]
    raise CrossChartUnsupported("points are not in a common chart")


# -- G2 on polylines -------------------------------------------------------------------------------------

def first_bend(lifted):
    """Index of the first interior vertex where the lifted polyline turns or reverses."""
    for i in range(1, len(lifted) - 1):
        a, b, c = lifted[i - 1], lifted[i], lifted[i + 1]
        if g.orient(a, b, c) != 0 or g.dot(g.sub(b, a), g.sub(c, b)) <= 0:
            return i
    return None


def polypath_g2(path: PolyPath, atlas: Atlas):
    """Local-minimality certificate for a polyline.

    The path is minimal iff no chart trace has a shortcut, which at polyline
    granularity means the lift is straight. At a bend we return two points
    on either side of it, inside the chart of the incoming segment, whose
    chart interval leaves the path.
    """
    full = path.lift(atlas)
    lifted = [q for k, q in enumerate(full) if k == 0 or q != full[k - 1]]
    i = first_bend(lifted)
    if i is None:
        return True, None
    a, b, c = lifted[i - 1], lifted[i], lifted[i + 1]
    seg = next(k - 1 for k in range(1, len(full)) if full[k] == b and full[k - 1] != b)
    chart = atlas.charts[path.charts[seg]]
    lam = HALF
    while True:
        p, q = g.lerp(b, a, lam), g.lerp(b, c, lam)
        if any(lo < 0 and hi > 1 for _, lo, hi in chart.parameter_intervals(p, q)):
            break
        lam /= 2
    witness = {"bend": project(path.model, b), "shortcut": [project(path.model, p), project(path.model, q)],
               "chart": path.charts[seg]}
    return False, witness
