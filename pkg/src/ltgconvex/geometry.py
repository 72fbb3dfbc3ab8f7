"""Exact rational plane geometry: points are pairs of Fractions."""
from __future__ import annotations

from fractions import Fraction

Q = Fraction


def frac(v) -> Fraction:
    """Parse ``v`` (int, Fraction, or a string like "3/4") as a Fraction.

    Floats are refused: every coordinate in the core must be exact.
    """
    if isinstance(v, float):
        raise TypeError(f"refusing float coordinate {v!r}; pass a 'p/q' string")
    return Fraction(v)


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def pt(x, y=None):
    if y is None:
        x, y = x
    return (frac(x), frac(y))


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def scale(a, s):
    return (a[0] * s, a[1] * s)


def lerp(a, b, t):
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def orient(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear."""
    v = cross(sub(b, a), sub(c, a))
    return (v > 0) - (v < 0)


def norm2(a):
    return dot(a, a)


def on_segment(p, a, b) -> bool:
    if orient(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segment_param(p, a, b):
    """Parameter t with p = a + t (b - a); assumes p on the line and a != b."""
    d = sub(b, a)
    return dot(sub(p, a), d) / norm2(d)


def segment_intersections(p, q, a, b) -> list[tuple[Fraction, Fraction]]:
    """Parameters (s, t) of the points p + s(q-p) = a + t(b-a) on both segments.

    A proper crossing or touch gives one pair. A collinear overlap gives its
    two extreme points (one if the overlap is a point). Degenerate segments
    are treated as points.
    """
    r, d = sub(q, p), sub(b, a)
    if norm2(r) == 0:
        if norm2(d) == 0:
            return [(Q(0), Q(0))] if p == a else []
        return [(Q(0), segment_param(p, a, b))] if on_segment(p, a, b) else []
    if norm2(d) == 0:
        return [(segment_param(a, p, q), Q(0))] if on_segment(a, p, q) else []
    den = cross(r, d)
    ap = sub(a, p)
    if den != 0:
        s = cross(ap, d) / den
        t = cross(ap, r) / den
        if 0 <= s <= 1 and 0 <= t <= 1:
            return [(s, t)]
        return []
    if cross(ap, r) != 0:
        return []
    # collinear: project a, b onto pq
    s0, s1 = segment_param(a, p, q), segment_param(b, p, q)
    lo, hi = max(min(s0, s1), Q(0)), min(max(s0, s1), Q(1))
    if lo > hi:
        return []
    out = []
    for s in sorted({lo, hi}):
        x = lerp(p, q, s)
        out.append((s, segment_param(x, a, b)))
    return out


def polygon_area2(poly) -> Fraction:
    n = len(poly)
    return sum((cross(poly[i], poly[(i + 1) % n]) for i in range(n)), Q(0))


def ccw(poly):
    poly = [pt(v) for v in poly]
    return poly if polygon_area2(poly) > 0 else poly[::-1]


def is_strictly_convex(poly) -> bool:
    n = len(poly)
    if n < 3:
        return False
    return all(orient(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) > 0 for i in range(n))


def point_in_polygon(p, poly) -> int:
    """+1 strictly inside, 0 on the boundary, -1 outside (any simple polygon)."""
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if on_segment(p, a, b):
            return 0
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return 1 if inside else -1


def segment_in_polygon(a, b, poly) -> bool:
    """Is the closed segment ab inside the closed simple polygon?

    Cut the segment at every boundary contact and test one interior point
    of each piece plus the endpoints.
    """
    if a == b:
        return point_in_polygon(a, poly) >= 0
    cuts = {Q(0), Q(1)}
    n = len(poly)
    for i in range(n):
        for s, _ in segment_intersections(a, b, poly[i], poly[(i + 1) % n]):
            cuts.add(s)
    cuts = sorted(cuts)
    probes = cuts + [(u + v) / 2 for u, v in zip(cuts, cuts[1:])]
    return all(point_in_polygon(lerp(a, b, s), poly) >= 0 for s in probes)


def convex_hull(points) -> list:
    """Counter-clockwise hull vertices (monotone chain), collinear points dropped."""
    ps = sorted(set(points))
    if len(ps) <= 2:
        return ps
    lower, upper = [], []
    for p in ps:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(ps):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def in_hull(p, hull) -> bool:
    """Closed membership in a hull returned by :func:`convex_hull`."""
    if len(hull) == 1:
        return p == hull[0]
    if len(hull) == 2:
        return on_segment(p, hull[0], hull[1])
    n = len(hull)
    return all(orient(hull[i], hull[(i + 1) % n], p) >= 0 for i in range(n))


def open_interval_in_halfplanes(p, q, poly):
    """Open parameter interval {t : p + t(q-p) strictly inside convex ccw poly}.

    Returns (lo, hi) with ``None`` for an unbounded side, or None if empty.
    """
    lo = hi = None
    d = sub(q, p)
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        e = sub(b, a)
        # inside iff cross(e, x - a) > 0
        c0 = cross(e, sub(p, a))
        c1 = cross(e, d)
        if c1 == 0:
            if c0 <= 0:
                return None
            continue
        t = -c0 / c1
        if c1 > 0:
            lo = t if lo is None else max(lo, t)
        else:
            hi = t if hi is None else min(hi, t)
    if lo is not None and hi is not None and lo >= hi:
        return None
    return lo, hi
