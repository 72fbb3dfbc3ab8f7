"""Locally convex maps, étale maps and geodesic certificates.

Three kinds of map are supported:

* finite-space maps (:class:`FiniteEtale` wraps a SpaceMap with a target
  :class:`FiniteAtlas`), decided exhaustively;
* subset inclusions described by :class:`PlanePolygon` or :class:`HelixBand`;
* straight line maps into the cylinder or plane (:class:`LineMap`), whose
  domain is an interval or a circle, decided by exact interval arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import geometry as g
from .errors import UnsupportedMapKind
from .finite import FiniteSpace, SpaceMap, bits, popcount
from .intervals import ConvexityStructure
from .models import (
    HALF, Atlas, CylinderPoint, FiniteAtlas, PolyPath, cylinder_atlas, polypath_g2, project,
)

Q = Fraction


# -- finite carriers --------------------------------------------------------------------------

def _open_onto_image(f: SpaceMap, U: int) -> bool:
    """Is U -> f(U) open, U an open set of the source?"""
    T = f.target
    fU = f.image(U)
    for z in bits(U):
        img = f.image(f.source.up[z])
        if T.up_closure(img) & fU != img:
            return False
    return True


def _opens_containing(space: FiniteSpace, x: int):
    ups = [m for m in space.opens() if m >> x & 1]
    return sorted(ups, key=lambda m: (popcount(m), m))


def finite_locally_convex(f: SpaceMap, atlas: FiniteAtlas):
    """Exhaustive local convexity of a finite map; witnesses are failing points."""
    bad = []
    for x in range(len(f.source)):
        if not any(_open_onto_image(f, U) and atlas.chart_for(f.image(U)) is not None
                   for U in _opens_containing(f.source, x)):
            bad.append(f.source.points[x])
    return not bad, bad


def _embeds(f: SpaceMap, U: int) -> bool:
    """f restricted to U is injective and an order embedding (a homeomorphism onto f(U))."""
    pts = list(bits(U))
    if len({f.f[i] for i in pts}) != len(pts):
        return False
    S, T = f.source, f.target
    return all((S.up[a] >> b & 1) == (T.up[f.f[a]] >> f.f[b] & 1) for a in pts for b in pts)


class FiniteEtale:
    """A map of finite spaces together with the atlas on its target."""

    def __init__(self, f: SpaceMap, atlas: FiniteAtlas):
        if f.target != atlas.space:
            raise ValueError("atlas lives on a different space")
        self.f, self.atlas = f, atlas
        self._cover = None

    @property
    def source(self):
        return self.f.source

    def chart_cover(self) -> list[tuple[int, int]]:
        """All (U, chart) with U open, mapped homeomorphically onto a convex chart subset."""
        if self._cover is None:
            out = []
            for U in self.source.opens():
                if U and _embeds(self.f, U):
                    k = self.atlas.chart_for(self.f.image(U))
                    if k is not None:
                        out.append((U, k))
            self._cover = out
        return self._cover

    def closed_witness(self):
        """A point whose closure maps onto a non-closed set, or None."""
        S, T = self.source, self.f.target
        for x in range(len(S)):
            img = self.f.image(S.down[x])
            if T.down_closure(img) != img:
                return S.points[x]
        return None

    def is_etale(self, require_closed: bool = True):
        wit = []
        if not self.source.is_connected():
            wit.append({"check": "connected"})
        if require_closed:
            x = self.closed_witness()
            if x is not None:
                wit.append({"check": "closed", "point": x})
        covered = 0
        for U, _ in self.chart_cover():
            covered |= U
        for i in bits(self.source.full & ~covered):
            wit.append({"check": "cover", "point": self.source.points[i]})
        return not wit, wit

    def compose(self, inner: "FiniteEtale") -> "FiniteEtale":
        """self o inner; ``inner`` must target the lifted atlas of ``self``."""
        return FiniteEtale(self.f.compose(inner.f), self.atlas)

    # lifted convexity on the domain
    def hull_mask(self, mask: int) -> int:
        cover = self.chart_cover()
        while True:
            new = mask
            for U, k in cover:
                part = mask & U
                if not part:
                    continue
                cs = self.atlas.charts[k]
                Y = self.f.target
                img = cs.space.mask(Y.subset(self.f.image(part)))
                h = Y.mask(cs.space.subset(cs.hull_mask(img)))
                for i in bits(U):
                    if h >> self.f.f[i] & 1:
                        new |= 1 << i
            if new == mask:
                return mask
            mask = new

    def is_convex_mask(self, mask: int) -> bool:
        return self.hull_mask(mask) == mask

    def fiber(self, y) -> set:
        j = self.f.target.idx(y)
        return {self.source.points[i] for i in range(len(self.source)) if self.f.f[i] == j}


def finite_g2(e: FiniteEtale, x, y):
    """Exhaustive G2: a proper connected subset holding x and y, if any."""
    S = e.source
    i, j = S.idx(x), S.idx(y)
    base = 1 << i | 1 << j
    full = S.full
    if not S.is_connected():
        return False, None
    best = None
    for m in range(full + 1):
        if m == full or m & base != base:
            continue
        if S.is_connected(m) and (best is None or (popcount(m), m) < (popcount(best), best)):
            best = m
    if best is None:
        return True, None
    return False, S.ordered(best)


def finite_generated(e: FiniteEtale, x, y) -> bool:
    """No proper closed connected A holding x, y has e(U n A) convex for every U in the cover.

    Only for connected F does this reduce to "the hull of F is everything";
    {x, y} is usually not connected, so the definition is checked directly.
    """
    S = e.source
    base = S.mask([x, y])
    cover = [U for U, _ in e.chart_cover()]
    for A in range(S.full):
        if A & base != base or not S.is_closed(A) or not S.is_connected(A):
            continue
        if all(not U & A or e.atlas.chart_for(e.f.image(U & A)) is not None for U in cover):
            return False
    return True


# -- line maps ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Span:
    """Parameter interval with endpoint flags; on a circle it is taken mod ``period``."""
    lo: Fraction
    hi: Fraction
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, t) -> bool:
        return (self.lo < t or (self.lo_closed and t == self.lo)) and \
            (t < self.hi or (self.hi_closed and t == self.hi))

    def to_json(self):
        return {"lo": g.fmt(self.lo), "hi": g.fmt(self.hi),
                "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}


@dataclass(frozen=True)
class CoverElement:
    chart: int
    sheet: object
    span: Span

    def to_json(self):
        return {"chart": self.chart, "sheet": self.sheet, **self.span.to_json()}


class LineMap:
    """t -> start + t * direction, projected to the model.

    ``domain`` is ("interval", t0, t1, closed0, closed1) or ("circle", period);
    a circle needs period * direction to be a whole number of turns.
    """

    def __init__(self, atlas: Atlas, start, direction, domain):
        self.atlas = atlas
        self.model = atlas.model
        self.start = g.pt(start)
        self.direction = g.pt(direction)
        if self.direction == (0, 0):
            raise UnsupportedMapKind("constant line maps are not étale candidates")
        kind = domain[0]
        if kind == "interval":
            _, t0, t1, c0, c1 = domain
            self.domain = ("interval", g.frac(t0), g.frac(t1), bool(c0), bool(c1))
            if self.domain[1] >= self.domain[2]:
                raise ValueError("empty parameter interval")
        elif kind == "circle":
            period = g.frac(domain[1])
            shift = g.scale(self.direction, period)
            if self.model != "cylinder" or shift[1] != 0 or shift[0].denominator != 1 or shift[0] == 0:
                raise UnsupportedMapKind("circle domains must close up around the cylinder")
            self.domain = ("circle", period)
        else:
            raise UnsupportedMapKind(f"unknown domain kind {kind!r}")

    # convenience constructors
    @classmethod
    def equator_loop(cls, degree: int, height=0, atlas=None):
        """Circle of length |k| wound k times around the equator."""
        if degree == 0:
            raise UnsupportedMapKind("degree 0 loops are constant")
        return cls(atlas or cylinder_atlas(), (0, height), (1 if degree > 0 else -1, 0), ("circle", abs(degree)))

    @classmethod
    def helix(cls, turns: int = 1, rise=1, atlas=None):
        return cls(atlas or cylinder_atlas(), (0, 0), (turns, rise), ("interval", 0, 1, True, True))

    @classmethod
    def segment_wrap(cls, length=1, height=0, atlas=None, closed=(True, True)):
        return cls(atlas or cylinder_atlas(), (0, height), (1, 0), ("interval", 0, length) + tuple(closed))

    @property
    def is_circle(self):
        return self.domain[0] == "circle"

    def lift(self, t):
        return g.add(self.start, g.scale(self.direction, g.frac(t)))

    def __call__(self, t):
        return project(self.model, self.lift(t))

    def _norm(self, t):
        if self.is_circle:
            p = self.domain[1]
            return t - math.floor(t / p) * p
        return t

    def in_domain(self, t) -> bool:
        if self.is_circle:
            return True
        _, t0, t1, c0, c1 = self.domain
        return Span(t0, t1, c0, c1).contains(t)

    def is_closed(self) -> bool:
        return self.is_circle or (self.domain[3] and self.domain[4])

    def domain_span(self):
        if self.is_circle:
            return Span(Q(0), self.domain[1], True, False)
        _, t0, t1, c0, c1 = self.domain
        return Span(t0, t1, c0, c1)

    def chart_cover(self) -> list[CoverElement]:
        """Per chart and per sheet, the open parameter set mapped into one chart copy.

        For an interval domain the spans are clipped to the domain (relatively
        open); for a circle they are reported with ``lo`` reduced mod the period.
        """
        if self.is_circle:
            p = self.domain[1]
            a, b = -p, 2 * p
        else:
            a, b = self.domain[1], self.domain[2]
        P, R = self.lift(a), self.lift(b)
        out = []
        for k, chart in enumerate(self.atlas.charts):
            for m, lo, hi in chart.parameter_intervals(P, R):
                tlo, thi = a + (b - a) * lo, a + (b - a) * hi
                if self.is_circle:
                    if lo <= 0 or hi >= 1:
                        continue
                    shift = math.floor(tlo / p) * p
                    span = Span(tlo - shift, thi - shift)
                    el = CoverElement(k, m, span)
                else:
                    _, t0, t1, c0, c1 = self.domain
                    lo_c = tlo < t0
                    hi_c = thi > t1
                    span = Span(max(tlo, t0), min(thi, t1), lo_c and c0, hi_c and c1)
                    if span.lo == span.hi and not (span.lo_closed and span.hi_closed):
                        continue
                    el = CoverElement(k, m, span)
                out.append(el)
        if self.is_circle:
            # the same piece shows up once per period of the unrolled range
            seen, uniq = set(), []
            for el in out:
                key = (el.chart, el.span.lo, el.span.hi - el.span.lo)
                if key not in seen:
                    seen.add(key)
                    uniq.append(el)
            out = uniq
        return sorted(out, key=lambda e: (e.span.lo, e.chart))

    def element_contains(self, el: CoverElement, t) -> bool:
        if self.is_circle:
            p = self.domain[1]
            t = self._norm(t)
            return el.span.contains(t) or el.span.contains(t + p)
        return el.span.contains(t)

    def _unrolled(self, el: CoverElement):
        """Spans representing the element in the parameter line."""
        if not self.is_circle:
            return [el.span]
        p = self.domain[1]
        return [Span(el.span.lo + j * p, el.span.hi + j * p) for j in (-1, 0, 1)]

    def covers_domain(self):
        """Uncovered parameters (empty list iff the chart cover covers the domain)."""
        cover = self.chart_cover()
        probes = set()
        dom = self.domain_span()
        probes.add(dom.lo)
        if not self.is_circle:
            probes.add(dom.hi)
        for el in cover:
            probes.update((el.span.lo, el.span.hi))
        missing = []
        for t in sorted(probes):
            if self.in_domain(t) and not any(self.element_contains(el, t) for el in cover):
                missing.append(t)
        return missing

    def closed_witness(self):
        """For a half-open domain: a closed piece next to the open end and the missed limit."""
        if self.is_closed():
            return None
        _, t0, t1, c0, c1 = self.domain
        # a piece short enough to map injectively into one chart
        d = self.direction
        step = HALF / 2 / max(abs(d[0]), abs(d[1]), Q(1))
        if not c1:
            piece, limit = (max(t0, t1 - step), t1), t1
        else:
            piece, limit = (t0, min(t1, t0 + step)), t0
        return {"check": "closed", "closed_piece": [g.fmt(piece[0]), g.fmt(piece[1])],
                "missing_limit": _jsonpt(self(limit))}

    def is_etale(self):
        wit = []
        w = self.closed_witness()
        if w is not None:
            wit.append(w)
        for t in self.covers_domain():
            wit.append({"check": "cover", "parameter": g.fmt(t)})
        return not wit, wit

    def fiber(self, y) -> list[Fraction]:
        """Parameters mapping to y, solved exactly."""
        D, P = self.direction, self.start
        if self.model == "plane":
            y = g.pt(y)
            cand = []
            if D[0] != 0:
                cand.append((y[0] - P[0]) / D[0])
            else:
                cand.append((y[1] - P[1]) / D[1])
            return [t for t in cand if self.lift(t) == y and self.in_domain(t)]
        y = y if isinstance(y, CylinderPoint) else CylinderPoint(*y)
        out = set()
        if D[0] == 0:
            t = (y.h - P[1]) / D[1]
            if (P[0] - y.w).denominator == 1 and self.in_domain(t):
                out.add(self._norm(t))
            return sorted(out)
        if self.is_circle:
            lo, hi = Q(0), self.domain[1]
        else:
            lo, hi = self.domain[1], self.domain[2]
        us = sorted((P[0] + D[0] * lo, P[0] + D[0] * hi))
        for n in range(math.floor(us[0] - y.w) - 1, math.ceil(us[1] - y.w) + 2):
            t = (y.w + n - P[0]) / D[0]
            if P[1] + D[1] * t != y.h:
                continue
            if self.is_circle:
                if 0 <= t < self.domain[1]:
                    out.add(t)
            elif self.in_domain(t):
                out.add(t)
        return sorted(out)

    def injective_on(self, spans) -> tuple[bool, object]:
        """Is the map injective on the union of the given spans? Witness: a colliding pair."""
        D = self.direction
        if self.model == "plane" or D[1] != 0:
            # distinct parameters always map to distinct points in the cover
            # and, with a vertical component, to distinct heights
            return True, None
        p = self.domain[1] if self.is_circle else None
        for A in spans:
            for B in spans:
                # t' - t for t in A, t' in B ranges over (B.lo - A.hi, B.hi - A.lo)
                lo, hi = B.lo - A.hi, B.hi - A.lo
                lo_c = B.lo_closed and A.hi_closed
                hi_c = B.hi_closed and A.lo_closed
                for n in range(math.floor(min(lo, hi) * abs(D[0])) - 1, math.ceil(max(lo, hi) * abs(D[0])) + 2):
                    if n == 0:
                        continue
                    delta = Q(n) / D[0]
                    if p is not None and (delta / p).denominator == 1:
                        continue
                    inside = (lo < delta or (lo_c and delta == lo)) and (delta < hi or (hi_c and delta == hi))
                    if inside:
                        t = _pick_in(A, B, delta)
                        return False, (t, t + delta)
        return True, None

    def spans_intersect(self, a: CoverElement, b: CoverElement):
        for A in self._unrolled(a):
            for B in [b.span]:
                lo, hi = max(A.lo, B.lo), min(A.hi, B.hi)
                if lo < hi:
                    return (lo + hi) / 2
                if lo == hi and A.contains(lo) and B.contains(lo):
                    return lo
        return None

    def to_json(self):
        dom = list(self.domain)
        dom = [dom[0]] + [g.fmt(v) if isinstance(v, Fraction) else v for v in dom[1:]]
        return {"kind": "line", "model": self.model, "start": _jsonpt(self.start),
                "direction": _jsonpt(self.direction), "domain": dom}


def _pick_in(A: Span, B: Span, delta):
    """Some t in A with t + delta in B (the sets are known to allow it)."""
    lo, hi = max(A.lo, B.lo - delta), min(A.hi, B.hi - delta)
    if lo < hi:
        return (lo + hi) / 2
    return lo


def _jsonpt(p):
    if isinstance(p, CylinderPoint):
        return p.to_json()
    return [g.fmt(p[0]), g.fmt(p[1])]


# -- subsets of models -------------------------------------------------------------------------------

class PlanePolygon:
    """Closed simple polygon in the plane."""

    model = "plane"

    def __init__(self, vertices):
        self.vertices = g.ccw(vertices)

    def contains(self, p) -> bool:
        return g.point_in_polygon(g.pt(p), self.vertices) >= 0

    def reflex_vertices(self) -> list:
        v, n = self.vertices, len(self.vertices)
        return [v[i] for i in range(n) if g.orient(v[i - 1], v[i], v[(i + 1) % n]) < 0]

    def locally_convex_oracle(self, p) -> bool:
        """Brute force at a vertex: points on both incident edges see each other."""
        v, n = self.vertices, len(self.vertices)
        i = v.index(p)
        a, b = v[i - 1], v[(i + 1) % n]
        lam = Q(1, 2)
        while True:
            x, y = g.lerp(p, a, lam), g.lerp(p, b, lam)
            # small enough when no other edge comes near the corner triangle
            near = any(g.segment_intersections(x, y, v[j], v[(j + 1) % n])
                       for j in range(n) if j not in (i, (i - 1) % n))
            if not near:
                break
            lam /= 2
        return g.point_in_polygon(g.lerp(x, y, HALF), v) >= 0

    def is_convex(self) -> bool:
        v = self.vertices
        return all(g.segment_in_polygon(a, b, v) for a, b in combinations(v, 2))

    def to_json(self):
        return {"kind": "polygon", "model": "plane", "vertices": [_jsonpt(p) for p in self.vertices]}


class HelixBand:
    """Closed band {(w, h) : |h - h0 - slope * (w + k)| <= delta for some integer k}."""

    model = "cylinder"

    def __init__(self, slope, delta, h0=0):
        self.slope, self.delta, self.h0 = g.frac(slope), g.frac(delta), g.frac(h0)
        if self.delta < 0:
            raise ValueError("negative thickness")

    @property
    def separated(self) -> bool:
        """Do the lifted copies stay apart (so the band is a ribbon, not a tube)?"""
        return abs(self.slope) > 2 * self.delta

    def lift_in_base(self, p: CylinderPoint):
        """The lift (u, h) of p lying in the base copy, or None."""
        if self.slope == 0:
            return (p.w, p.h) if abs(p.h - self.h0) <= self.delta else None
        k = math.floor((p.h - self.h0) / self.slope - p.w)
        for kk in (k - 1, k, k + 1, k + 2):
            u = p.w + kk
            if abs(p.h - self.h0 - self.slope * u) <= self.delta:
                return (u, p.h)
        return None

    def contains(self, p) -> bool:
        p = p if isinstance(p, CylinderPoint) else CylinderPoint(*p)
        return self.lift_in_base(p) is not None

    def point(self, u, offset=0):
        """Point of the base copy over lifted angle u, ``offset`` off the centre line."""
        u, offset = g.frac(u), g.frac(offset)
        return CylinderPoint(u, self.h0 + self.slope * u + offset)

    def convexity_witness(self):
        """Two band points whose chart interval leaves the band, if the copies are separated."""
        if not self.separated:
            return None
        a = CylinderPoint(0, self.h0)
        b = CylinderPoint(0, self.h0 + self.slope)
        mid = CylinderPoint(0, self.h0 + self.slope / 2)
        return {"points": [a.to_json(), b.to_json()], "outside": mid.to_json()}

    def to_json(self):
        return {"kind": "helix_band", "model": "cylinder", "slope": g.fmt(self.slope),
                "delta": g.fmt(self.delta), "h0": g.fmt(self.h0)}


# -- dispatch --------------------------------------------------------------------------------------

def is_locally_convex_map(f, atlas=None):
    """(ok, witnesses) for a finite map, a model subset, or a line map."""
    if isinstance(f, FiniteEtale):
        return finite_locally_convex(f.f, f.atlas)
    if isinstance(f, SpaceMap):
        if not isinstance(atlas, FiniteAtlas):
            raise UnsupportedMapKind("finite maps need a FiniteAtlas on the target")
        return finite_locally_convex(f, atlas)
    if isinstance(f, PlanePolygon):
        bad = f.reflex_vertices()
        return not bad, bad
    if isinstance(f, HelixBand):
        # each point has a box neighbourhood meeting one lifted copy in a
        # slanted strip piece, which is convex in the strip chart
        return True, []
    if isinstance(f, LineMap):
        missing = f.covers_domain()
        return not missing, missing
    raise UnsupportedMapKind(f"unsupported map descriptor {type(f).__name__}")


def is_etale(e):
    if isinstance(e, (FiniteEtale, LineMap)):
        return e.is_etale()
    if isinstance(e, PlanePolygon):
        ok, bad = is_locally_convex_map(e)
        return ok, [{"check": "cover", "point": _jsonpt(p)} for p in bad]
    raise UnsupportedMapKind(f"unsupported map descriptor {type(e).__name__}")


def check_G2(e, x=None, y=None, atlas=None):
    """(ok, witness): no proper connected part of the domain holds both ends.

    Finite carriers are searched exhaustively. A polyline uses the bend
    certificate. A line map on an interval from x to y is straight, so it
    passes; on a circle any arc between x and y is a proper witness.
    """
    if isinstance(e, FiniteEtale):
        return finite_g2(e, x, y)
    if isinstance(e, PolyPath):
        return polypath_g2(e, atlas)
    if isinstance(e, LineMap):
        if e.is_circle:
            x = Q(0) if x is None else g.frac(x)
            y = e.domain[1] / 2 if y is None else g.frac(y)
            lo, hi = sorted((x, y))
            return False, {"arc": [g.fmt(lo), g.fmt(hi)]}
        _, t0, t1, _, _ = e.domain
        x = t0 if x is None else g.frac(x)
        y = t1 if y is None else g.frac(y)
        if sorted((x, y)) != [t0, t1]:
            lo, hi = sorted((x, y))
            return False, {"arc": [g.fmt(lo), g.fmt(hi)]}
        return True, None
    raise UnsupportedMapKind(f"unsupported map descriptor {type(e).__name__}")
