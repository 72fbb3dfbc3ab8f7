"""End-to-end local-to-global checks.

``verify_ltg`` runs the pipeline stage by stage and stops at the first
failure: local convexity, factorization (finite maps), closedness of the
filtered factor, the lifted atlas, and one geodesic witness per point
pair. Weak convexity is only ever reported for the pairs that received a
certified witness.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import geometry as g
from .errors import BudgetExhausted, UnsupportedMapKind
from .etale import (
    CoverElement, FiniteEtale, HelixBand, LineMap, PlanePolygon, Span, _embeds, check_G2,
    finite_g2, finite_generated, is_locally_convex_map,
)
from .finite import SpaceMap, bits, factorize, popcount
from .intervals import ConvexityStructure
from .models import (
    Atlas, CylinderPoint, FiniteAtlas, PolyPath, check_G1, cylinder_atlas, essential_vertices,
    path_from_lift, plane_atlas, polypath_g2, validate_atlas,
)
from .straightening import DEFAULT_BUDGET, excise_self_intersections, inscribe_line_path, straighten

Q = Fraction


def _key(p):
    if isinstance(p, CylinderPoint):
        return "(" + ",".join(p.to_json()) + ")"
    if isinstance(p, tuple) and len(p) == 2 and all(isinstance(v, Fraction) for v in p):
        return f"({g.fmt(p[0])},{g.fmt(p[1])})"
    return str(p)


def _jp(p):
    if isinstance(p, CylinderPoint):
        return p.to_json()
    if isinstance(p, tuple):
        return [g.fmt(p[0]), g.fmt(p[1])]
    return p


@dataclass
class LtgReport:
    locally_convex: bool = False
    fsharp_closed: bool = False
    weakly_convex: bool = False
    geodesic_witnesses: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    stage: str | None = None
    pairs: int = 0

    @property
    def exit_code(self) -> int:
        if self.weakly_convex:
            return 0
        if self.stage == "NoGeodesicFound" and any("budget" in f for f in self.failures):
            return 3
        return 2

    def fail(self, stage, **info):
        if self.stage is None:
            self.stage = stage
        self.failures.append({"stage": stage, **info})
        return self

    def to_json(self):
        return {
            "locally_convex": self.locally_convex,
            "fsharp_closed": self.fsharp_closed,
            "weakly_convex": self.weakly_convex,
            "geodesic_witnesses": self.geodesic_witnesses,
            "failures": self.failures,
            "stage": self.stage,
            "pairs": self.pairs,
        }


# -- finite carriers ---------------------------------------------------------------------------------------

def _restrict(e: FiniteEtale, D: int) -> FiniteEtale:
    S = e.source
    sub = S.subspace(D)
    f = SpaceMap(sub, e.f.target, {p: e.f(p) for p in sub.points})
    return FiniteEtale(f, e.atlas)


def finite_geodesic(e: FiniteEtale, a, b):
    """Least connected D with a, b in D such that e|D is an étale geodesic from a to b.

    Certificate: D is connected and covered by opens mapped homeomorphically
    onto convex chart subsets, D is generated by {a, b} in the lifted
    convexity, and no proper connected part of D holds a and b. The map
    e|D is not asked to be closed: in a non-discrete finite space the
    closure of an open end point always leaks out of D.
    """
    S = e.source
    base = S.mask([a, b])
    cands = [m for m in range(S.full + 1) if m & base == base and S.is_connected(m)]
    for D in sorted(cands, key=lambda m: (popcount(m), m)):
        r = _restrict(e, D)
        if not r.is_etale(require_closed=False)[0]:
            continue
        if not finite_generated(r, a, b):
            continue
        if finite_g2(r, a, b)[0]:
            return S.ordered(D)
    return None


def lift_structure(e):
    """The chart cover of an étale map, as an atlas on its domain."""
    if isinstance(e, LineMap):
        return LineAtlas(e, e.chart_cover())
    if not isinstance(e, FiniteEtale):
        raise UnsupportedMapKind(f"unsupported map descriptor {type(e).__name__}")
    S = e.source
    cover = e.chart_cover()
    maximal = [(U, k) for U, k in cover if not any(V != U and V & U == U for V, _ in cover)]
    charts = []
    for U, k in maximal:
        sub = S.subspace(U)
        cs = e.atlas.charts[k]
        Y = e.f.target
        back = {}
        for x in sub.points:
            back[e.f(x)] = x
        table = {}
        for i, x in enumerate(sub.points):
            for y in sub.points[i + 1:]:
                iv = cs.interval(e.f(x), e.f(y))
                table[(x, y)] = [back[z] for z in iv]
        charts.append(ConvexityStructure(sub, table))
    return FiniteAtlas(S, charts)


@dataclass
class LineAtlas:
    """Chart cover of a line map: per chart and sheet, a parameter interval."""
    line: LineMap
    elements: list

    def __len__(self):
        return len(self.elements)

    def per_chart(self) -> dict[int, int]:
        out = {}
        for el in self.elements:
            out[el.chart] = out.get(el.chart, 0) + 1
        return out

    def validate(self):
        # every element is an interval of the line with its own order
        # convexity; what can fail is the cover
        missing = self.line.covers_domain()
        return not missing, [g.fmt(t) for t in missing]

    def to_json(self):
        return {"line": self.line.to_json(), "elements": [el.to_json() for el in self.elements]}


def lift_report(e, samples: int = 16, seed: int = 0) -> dict:
    """Validate the lifted atlas, G1 per chart, sampled G2, and fiber separation."""
    atlas = lift_structure(e)
    if isinstance(atlas, LineAtlas):
        ok, missing = atlas.validate()
        return {"atlas_ok": ok, "missing": missing, "charts": len(atlas),
                "fibers_separated": True, "g1": True, "g2": True}
    rep = validate_atlas(atlas)
    rng = random.Random(seed)
    g1 = all(check_G1(atlas, [cs.space.points[0], cs.space.points[-1]])[0] for cs in atlas.charts)
    S = e.source
    g2 = True
    pairs = list(combinations(S.points, 2))
    for a, b in rng.sample(pairs, min(samples, len(pairs))):
        D = finite_geodesic(e, a, b)
        if D is not None:
            g2 &= finite_g2(_restrict(e, S.mask(D)), a, b)[0]
    sep = all(etale_fibers(e, y)[2] for y in e.f.target.subset(e.f.image(S.full)))
    return {"atlas_ok": rep.ok, "charts": len(atlas), "g1": g1, "g2": g2, "fibers_separated": sep}


def _verify_finite(f: SpaceMap, atlas: FiniteAtlas, pairs, rep: LtgReport) -> LtgReport:
    if not f.source.is_connected():
        return rep.fail("SourceNotConnected")
    ok, bad = is_locally_convex_map(f, atlas)
    rep.locally_convex = ok
    if not ok:
        return rep.fail("NotLocallyConvex", points=bad)
    fac = factorize(f)
    fs = FiniteEtale(fac.fsharp, atlas)
    ok2, bad2 = is_locally_convex_map(fs)
    if not ok2:
        return rep.fail("FsharpNotLocallyConvex", points=bad2)
    w = fs.closed_witness()
    rep.fsharp_closed = w is None
    if w is not None:
        return rep.fail("FsharpNotClosed", point=w)
    image = f.target.ordered(f.image(f.source.full))
    if pairs is None:
        pairs = list(combinations(image, 2))
    rep.pairs = len(pairs)
    M = fac.midspace
    Y = f.target
    for y1, y2 in pairs:
        found = None
        # a geodesic of the midspace, pushed forward by the filtered factor
        for a in sorted(fs.fiber(y1), key=M.idx):
            for b in sorted(fs.fiber(y2), key=M.idx):
                D = finite_geodesic(fs, a, b)
                if D is not None:
                    found = {"lifts": [a, b], "domain": D, "image": sorted({fs.f(p) for p in D}, key=Y.idx)}
                    break
            if found:
                break
        if found is None:
            rep.fail("NoGeodesicFound", pair=[y1, y2])
        else:
            rep.geodesic_witnesses[f"{y1}|{y2}"] = found
    rep.weakly_convex = rep.stage is None
    return rep


# -- models --------------------------------------------------------------------------------------------------

def _segment_witness(atlas: Atlas, a, b, budget):
    """Straighten the direct arc and certify it."""
    path = path_from_lift(atlas.model, atlas, [a, b]) if a != b else None
    if path is None:
        return None
    tr = straighten(path, atlas, budget)
    ok, _ = polypath_g2(tr.final, atlas)
    return tr, ok


def _polygon_pairs(A: PlanePolygon, samples, seed):
    pts = list(A.vertices)
    rng = random.Random(seed)
    v = A.vertices
    extra = []
    if len(v) >= 3 and not A.reflex_vertices():
        for _ in range(samples):
            w = [rng.randrange(1, 32) for _ in v]
            s = sum(w)
            extra.append((sum(Q(wi, s) * p[0] for wi, p in zip(w, v)), sum(Q(wi, s) * p[1] for wi, p in zip(w, v))))
    return list(combinations(pts, 2)) + list(zip(extra[::2], extra[1::2]))


def _verify_polygon(A: PlanePolygon, atlas, pairs, budget, rep, samples=8, seed=0):
    ok, bad = is_locally_convex_map(A)
    rep.locally_convex = ok
    if not ok:
        return rep.fail("NotLocallyConvex", points=[_jp(p) for p in bad])
    # a closed polygon is closed, and its inclusion is its own filtered factor
    rep.fsharp_closed = True
    atlas = atlas or plane_atlas()
    if pairs is None:
        pairs = _polygon_pairs(A, samples, seed)
    rep.pairs = len(pairs)
    for p, q in pairs:
        p, q = g.pt(p), g.pt(q)
        if not (A.contains(p) and A.contains(q)):
            rep.fail("PointOutsideSet", pair=[_jp(p), _jp(q)])
            continue
        tr, ok = _segment_witness(atlas, p, q, budget)
        inside = g.segment_in_polygon(p, q, A.vertices)
        if ok and inside:
            rep.geodesic_witnesses[f"{_key(p)}|{_key(q)}"] = {"path": tr.final.to_json(), "steps": len(tr.steps)}
        else:
            rep.fail("NoGeodesicFound", pair=[_jp(p), _jp(q)])
    rep.weakly_convex = rep.stage is None
    return rep


def band_arc(band: HelixBand, p: CylinderPoint, q: CylinderPoint):
    """A lifted polyline in the base copy: p, down to the centre line, along it, out to q."""
    lp, lq = band.lift_in_base(p), band.lift_in_base(q)
    cp = (lp[0], band.h0 + band.slope * lp[0])
    cq = (lq[0], band.h0 + band.slope * lq[0])
    return essential_vertices([lp, cp, cq, lq])


def _verify_band(A: HelixBand, atlas, pairs, budget, rep, samples=6, seed=0):
    rep.locally_convex = True
    rep.fsharp_closed = True
    atlas = atlas or cylinder_atlas()
    if pairs is None:
        rng = random.Random(seed)
        pts = []
        for _ in range(2 * samples):
            u = Q(rng.randrange(-64, 64), 32)
            off = A.delta * Q(rng.randrange(-8, 9), 8)
            pts.append(A.point(u, off))
        pairs = list(zip(pts[::2], pts[1::2]))
    rep.pairs = len(pairs)
    for p, q in pairs:
        p = p if isinstance(p, CylinderPoint) else CylinderPoint(*p)
        q = q if isinstance(q, CylinderPoint) else CylinderPoint(*q)
        if not (A.contains(p) and A.contains(q)):
            rep.fail("PointOutsideSet", pair=[_jp(p), _jp(q)])
            continue
        lifted = band_arc(A, p, q)
        if len(lifted) == 1:
            continue
        arc = path_from_lift("cylinder", atlas, lifted)
        line = inscribe_line_path(arc, atlas, p, q)
        line = excise_self_intersections(line, atlas)
        try:
            tr = straighten(line, atlas, budget)
        except BudgetExhausted as exc:
            rep.fail("NoGeodesicFound", pair=[_jp(p), _jp(q)], budget=budget, steps=len(exc.trace.steps))
            continue
        ok, _ = polypath_g2(tr.final, atlas)
        # the base copy is a slanted strip, hence convex: the straight lift stays in it
        ends = tr.final.lift(atlas)
        inside = all(A.lift_in_base(CylinderPoint.from_lift(e)) is not None for e in ends)
        if ok and inside:
            rep.geodesic_witnesses[f"{_key(p)}|{_key(q)}"] = {
                "path": tr.final.to_json(), "steps": len(tr.steps), "winding": tr.winding}
        else:
            rep.fail("NoGeodesicFound", pair=[_jp(p), _jp(q)])
    rep.weakly_convex = rep.stage is None
    return rep


def line_witnesses(e: LineMap, p, q):
    """All geodesics from p to q carried by the domain, shortest first, then by winding."""
    out = []
    f1, f2 = e.fiber(p), e.fiber(q)
    for t1 in f1:
        for t2 in f2:
            cands = [(t1, t2)]
            if e.is_circle:
                per = e.domain[1]
                cands.append((t1, t2 + per if t2 < t1 else t2 - per))
            for a, b in cands:
                la, lb = e.lift(a), e.lift(b)
                if la == lb:
                    continue
                if e.model == "cylinder":
                    pp, qq = CylinderPoint.from_lift(la), CylinderPoint.from_lift(lb)
                    k = int(lb[0] - la[0] - (qq.w - pp.w))
                else:
                    k = 0
                out.append((g.norm2(g.sub(lb, la)), k, a, b, la, lb))
    out.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return out


def _verify_line(e: LineMap, pairs, budget, rep):
    ok, missing = is_locally_convex_map(e)
    rep.locally_convex = ok
    if not ok:
        return rep.fail("NotLocallyConvex", parameters=[g.fmt(t) for t in missing])
    rep.fsharp_closed = e.is_closed()
    if not rep.fsharp_closed:
        return rep.fail("FsharpNotClosed", **e.closed_witness())
    if pairs is None:
        span = e.domain_span()
        ts = sorted({span.lo + (span.hi - span.lo) * Q(k, 4) for k in range(5)})
        pts = list(dict.fromkeys(e(t) for t in ts))
        pairs = list(combinations(pts, 2))
    rep.pairs = len(pairs)
    for p, q in pairs:
        if e.model == "cylinder":
            p = p if isinstance(p, CylinderPoint) else CylinderPoint(*p)
            q = q if isinstance(q, CylinderPoint) else CylinderPoint(*q)
        cands = line_witnesses(e, p, q)
        if not cands:
            rep.fail("NoGeodesicFound", pair=[_jp(p), _jp(q)])
            continue
        best = [c for c in cands if c[0] == cands[0][0]]
        listed = []
        for _, k, a, b, la, lb in best:
            path = path_from_lift(e.model, e.atlas, [la, lb])
            tr = straighten(path, e.atlas, budget)
            ok, _ = polypath_g2(tr.final, e.atlas)
            if ok:
                listed.append({"winding": k, "parameters": [g.fmt(a), g.fmt(b)], "path": tr.final.to_json()})
        if not listed:
            rep.fail("NoGeodesicFound", pair=[_jp(p), _jp(q)])
            continue
        rep.geodesic_witnesses[f"{_key(p)}|{_key(q)}"] = {**listed[0], "alternatives": listed}
    rep.weakly_convex = rep.stage is None
    return rep


def verify_ltg(f, atlas=None, pairs=None, budget: int = DEFAULT_BUDGET) -> LtgReport:
    """Run the local-to-global pipeline; see the module docstring."""
    rep = LtgReport()
    if isinstance(f, FiniteEtale):
        return _verify_finite(f.f, f.atlas, pairs, rep)
    if isinstance(f, SpaceMap):
        if not isinstance(atlas, FiniteAtlas):
            raise UnsupportedMapKind("finite maps need a FiniteAtlas on the target")
        return _verify_finite(f, atlas, pairs, rep)
    if isinstance(f, PlanePolygon):
        return _verify_polygon(f, atlas, pairs, budget, rep)
    if isinstance(f, HelixBand):
        return _verify_band(f, atlas, pairs, budget, rep)
    if isinstance(f, LineMap):
        return _verify_line(f, pairs, budget, rep)
    raise UnsupportedMapKind(f"unsupported map descriptor {type(f).__name__}")


def tietze_check(A, samples: int = 8, seed: int = 0, budget: int = DEFAULT_BUDGET) -> dict:
    """Connected + locally convex => weakly convex, with witnesses and a brute-force cross-check."""
    if isinstance(A, PlanePolygon):
        out = {"kind": "polygon", "closed": True, "connected": True}
        ok, bad = is_locally_convex_map(A)
        out["locally_convex"] = ok
        out["nonconvex_vertices"] = [_jp(p) for p in bad]
        out["brute_force_convex"] = A.is_convex()
        if not ok:
            out.update(weakly_convex=False, stage="NotLocallyConvex")
            return out
        rep = _verify_polygon(A, None, None, budget, LtgReport(), samples, seed)
        out.update(weakly_convex=rep.weakly_convex, stage=rep.stage, pairs=rep.pairs,
                   witnesses=rep.geodesic_witnesses, failures=rep.failures)
        return out
    if isinstance(A, HelixBand):
        out = {"kind": "helix_band", "closed": True, "connected": True, "locally_convex": True,
               "nonconvex_vertices": []}
        rep = _verify_band(A, None, None, budget, LtgReport(), samples, seed)
        out.update(weakly_convex=rep.weakly_convex, stage=rep.stage, pairs=rep.pairs,
                   witnesses=rep.geodesic_witnesses, failures=rep.failures)
        w = A.convexity_witness()
        out["interval_convex"] = w is None
        out["interval_witness"] = w
        return out
    raise UnsupportedMapKind(f"unsupported subset descriptor {type(A).__name__}")


# -- fibers and disjointness --------------------------------------------------------------------------

def etale_disjointness(e, U, V):
    """(holds, witness) for: e not injective on U u V implies U and V are disjoint."""
    if isinstance(e, FiniteEtale):
        S = e.source
        U = U if isinstance(U, int) else S.mask(U)
        V = V if isinstance(V, int) else S.mask(V)
        pts = list(bits(U | V))
        inj = len({e.f.f[i] for i in pts}) == len(pts)
        if inj or not U & V:
            return True, None
        return False, {"overlap": S.ordered(U & V)}
    if isinstance(e, LineMap):
        inj, _ = e.injective_on([U.span, V.span])
        if inj:
            return True, None
        hit = e.spans_intersect(U, V)
        if hit is None:
            return True, None
        return False, {"overlap": g.fmt(hit)}
    raise UnsupportedMapKind(f"unsupported map descriptor {type(e).__name__}")


def _disjoint_choice(options, disjoint):
    """Backtracking: one option per point, pairwise disjoint; None if impossible."""
    chosen = []

    def go(i):
        if i == len(options):
            return True
        for o in options[i]:
            if all(disjoint(o, c) for c in chosen):
                chosen.append(o)
                if go(i + 1):
                    return True
                chosen.pop()
        return False

    return list(chosen) if go(0) else None


def etale_fibers(e, y):
    """(fiber, neighbourhoods, separated): the fiber and pairwise disjoint cover elements."""
    if isinstance(e, FiniteEtale):
        S = e.source
        fib = sorted(e.fiber(y), key=S.idx)
        cover = e.chart_cover()
        options = [[U for U, _ in sorted(cover, key=lambda c: (popcount(c[0]), c[0])) if U >> S.idx(x) & 1]
                   for x in fib]
        pick = _disjoint_choice(options, lambda a, b: not a & b)
        nbhd = None if pick is None else {x: S.ordered(U) for x, U in zip(fib, pick)}
        return fib, nbhd, pick is not None
    if isinstance(e, LineMap):
        fib = e.fiber(y)
        cover = e.chart_cover()
        options = [sorted((el for el in cover if e.element_contains(el, t)),
                          key=lambda el: (el.span.hi - el.span.lo, el.span.lo, el.chart)) for t in fib]
        pick = _disjoint_choice(options, lambda a, b: e.spans_intersect(a, b) is None)
        nbhd = None if pick is None else {g.fmt(t): el.to_json() for t, el in zip(fib, pick)}
        return fib, nbhd, pick is not None
    raise UnsupportedMapKind(f"unsupported map descriptor {type(e).__name__}")
