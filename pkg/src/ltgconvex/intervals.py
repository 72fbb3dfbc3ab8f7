"""Interval-operator convexity on finite carriers.

A :class:`ConvexityStructure` attaches to every pair of points of a finite
space a subset ``C(x, y)``.  :func:`check_axioms` decides the convexity
space axioms exactly: intervals are convex (C1), each interval is the
unique minimal connected set containing its end points (C2), the convex
open sets form a basis (C3), and ``C`` is continuous for the topology on
the power set whose basic opens are ``{A : A subset of U}``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import networkx as nx

from .errors import AxiomsNotVerified, InvalidTable, OrderViolation
from .finite import FiniteSpace, bits, popcount

#: Above this carrier size C2 witnesses are no longer enumerated exhaustively.
C2_EXHAUSTIVE_LIMIT = 12
#: Above this carrier size closure stability is checked on a seeded sample.
CLOSURE_EXHAUSTIVE_LIMIT = 12


class ConvexityStructure:
    """A finite space with an explicit interval table.

    ``intervals`` maps ordered pairs ``(x, y)`` to iterables of points.  A
    missing ``(y, x)`` entry is filled from ``(x, y)`` and a missing
    diagonal entry defaults to ``{x}``; any other missing pair is an
    :class:`InvalidTable`.
    """

    def __init__(self, space: FiniteSpace, intervals):
        self.space = space
        n = len(space)
        table = [[None] * n for _ in range(n)]
        for (x, y), pts in intervals.items():
            table[space.idx(x)][space.idx(y)] = space.mask(pts)
        for i in range(n):
            if table[i][i] is None:
                table[i][i] = 1 << i
            for j in range(n):
                if table[i][j] is None:
                    if table[j][i] is None:
                        raise InvalidTable(
                            f"no interval given for {space.points[i]!r}, {space.points[j]!r}"
                        )
                    table[i][j] = table[j][i]
        self.table = tuple(tuple(row) for row in table)

    @classmethod
    def _from_table(cls, space, table):
        self = cls.__new__(cls)
        self.space = space
        self.table = tuple(tuple(row) for row in table)
        return self

    def __repr__(self):
        return f"ConvexityStructure({self.space!r})"

    def interval(self, x, y) -> frozenset:
        s = self.space
        return s.subset(self.table[s.idx(x)][s.idx(y)])

    def is_convex_mask(self, mask: int) -> bool:
        table = self.table
        idx = list(bits(mask))
        for a, i in enumerate(idx):
            row = table[i]
            for j in idx[a:]:
                if row[j] & ~mask:
                    return False
        return True

    def is_convex(self, subset) -> bool:
        return self.is_convex_mask(self.space.mask(subset))

    def hull_mask(self, mask: int) -> int:
        table = self.table
        while True:
            new = mask
            idx = list(bits(mask))
            for a, i in enumerate(idx):
                row = table[i]
                for j in idx[a:]:
                    new |= row[j]
            if new == mask:
                return mask
            mask = new

    @cached_property
    def report(self) -> "AxiomReport":
        return check_axioms(self, strict=False)

    @property
    def validated(self) -> bool:
        return self.report.ok

    def restrict(self, subset) -> "ConvexityStructure":
        """Restriction to a convex subset, as a structure on the subspace."""
        s = self.space
        mask = subset if isinstance(subset, int) else s.mask(subset)
        sub = s.subspace(mask)
        intervals = {}
        for i in bits(mask):
            for j in bits(mask):
                intervals[(s.points[i], s.points[j])] = s.subset(self.table[i][j] & mask)
        return ConvexityStructure(sub, intervals)

    def to_dict(self):
        s = self.space
        out = {}
        for i in range(len(s)):
            for j in range(i, len(s)):
                key = f"{s.points[i]},{s.points[j]}"
                out[key] = s.ordered(self.table[i][j])
        return {"space": s.to_dict(), "intervals": out}

    @classmethod
    def from_dict(cls, doc):
        space = FiniteSpace.from_dict(doc["space"])
        by_name = {str(p): p for p in space.points}
        intervals = {}
        for key, pts in doc.get("intervals", {}).items():
            parts = key.split(",")
            if len(parts) != 2 or parts[0] not in by_name or parts[1] not in by_name:
                raise InvalidTable(f"bad interval key {key!r}")
            try:
                members = [by_name[str(p)] for p in pts]
            except KeyError as exc:
                raise InvalidTable(f"interval {key!r} names unknown point {exc}") from None
            intervals[(by_name[parts[0]], by_name[parts[1]])] = members
        return cls(space, intervals)


# -- construction helpers -----------------------------------------------------

def separators(space: FiniteSpace, i: int, j: int) -> int:
    """Points other than ``i, j`` whose removal disconnects ``i`` from ``j``."""
    out = 0
    rest = space.full
    for z in bits(rest & ~(1 << i | 1 << j)):
        if not space.component(rest & ~(1 << z), i) >> j & 1:
            out |= 1 << z
    return out


def least_connected_superset(space: FiniteSpace, i: int, j: int):
    """The smallest connected set containing ``i`` and ``j`` if one exists.

    Such a set is contained in every connected set through both points, so it
    consists of ``i``, ``j`` and the points separating them.  Returns ``None``
    when the separators together with the end points are not connected.
    """
    if i == j:
        return 1 << i
    if not space.component(space.full, i) >> j & 1:
        return None
    cand = separators(space, i, j) | 1 << i | 1 << j
    return cand if space.is_connected(cand) else None


def minimal_connected_supersets(space: FiniteSpace, i: int, j: int) -> list[int]:
    """All inclusion-minimal connected sets containing ``i`` and ``j`` (exhaustive)."""
    base = 1 << i | 1 << j
    others = [k for k in range(len(space)) if not base >> k & 1]
    found = []
    # Ascending cardinality: a connected set is minimal iff it contains no
    # previously found minimal set.
    for r in range(len(others) + 1):
        for extra in combinations(others, r):
            m = base
            for k in extra:
                m |= 1 << k
            if any(f & m == f for f in found):
                continue
            if space.is_connected(m):
                found.append(m)
    return sorted(found)


def least_connected_table(space: FiniteSpace):
    """Interval table of least connected supersets, or ``None`` if some pair has none."""
    n = len(space)
    table = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m = least_connected_superset(space, i, j)
            if m is None:
                return None
            table[i][j] = table[j][i] = m
    return ConvexityStructure._from_table(space, table)


def c2_obstruction(space: FiniteSpace):
    """First pair (canonical order) with no least connected superset, with its minimal ones.

    Returns ``None`` when the least-superset table exists.
    """
    n = len(space)
    for i in range(n):
        for j in range(i + 1, n):
            if least_connected_superset(space, i, j) is None:
                mins = minimal_connected_supersets(space, i, j)
                return {"pair": [space.points[i], space.points[j]],
                        "minimal_supersets": [space.ordered(m) for m in mins]}
    return None


def order_interval_table(space: FiniteSpace, order=None) -> ConvexityStructure:
    """``C(x, y) = {z : x <= z <= y}`` for a linear order on the carrier."""
    order = list(space.points if order is None else order)
    pos = {p: k for k, p in enumerate(order)}
    intervals = {}
    for x in order:
        for y in order:
            lo, hi = sorted((pos[x], pos[y]))
            intervals[(x, y)] = order[lo : hi + 1]
    return ConvexityStructure(space, intervals)


# -- axioms ---------------------------------------------------------------------

@dataclass
class AxiomReport:
    c1: bool
    c2: bool
    c3: bool
    continuity: bool
    symmetry: bool
    singleton: bool
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(
            (self.c1, self.c2, self.c3, self.continuity, self.symmetry, self.singleton)
        )

    def to_dict(self):
        return {
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "continuity": self.continuity,
            "symmetry": self.symmetry,
            "singleton": self.singleton,
            "ok": self.ok,
            "witnesses": self.witnesses,
        }


def _witness(space, axiom, points, sets=()):
    return {
        "axiom": axiom,
        "points": [space.points[i] for i in points],
        "sets": [space.ordered(m) for m in sets],
    }


def check_axioms(cs: ConvexityStructure, strict: bool = True) -> AxiomReport:
    """Decide C1, C2, C3, continuity, symmetry and the singleton law.

    With ``strict`` a failure of symmetry or of ``C(x, x) = {x}`` raises
    :class:`InvalidTable`; otherwise it is reported.  Witnesses record the
    first violation of each axiom in canonical pair order.
    """
    s, t = cs.space, cs.table
    n = len(s)
    wit = {}

    def fail(axiom, *args):
        wit.setdefault(axiom, _witness(s, axiom, *args))

    for i in range(n):
        if t[i][i] != 1 << i:
            fail("singleton", [i], [t[i][i]])
        for j in range(i + 1, n):
            if t[i][j] != t[j][i]:
                fail("symmetry", [i, j], [t[i][j], t[j][i]])
    if strict and ("singleton" in wit or "symmetry" in wit):
        first = wit.get("singleton") or wit["symmetry"]
        raise InvalidTable(f"{first['axiom']} law fails at {first['points']!r}")

    for i in range(n):
        for j in range(i, n):
            m = t[i][j]
            if "C1" not in wit and not cs.is_convex_mask(m):
                fail("C1", [i, j], [m])
            if "C2" not in wit:
                least = least_connected_superset(s, i, j)
                if least != m:
                    if n <= C2_EXHAUSTIVE_LIMIT:
                        fail("C2", [i, j], [m] + minimal_connected_supersets(s, i, j))
                    else:
                        fail("C2", [i, j], [m])
    for i in range(n):
        if not cs.is_convex_mask(s.up[i]):
            fail("C3", [i], [s.up[i]])
            break
    for i in range(n):
        for j in range(n):
            if "continuity" in wit:
                break
            u = s.up_closure(t[i][j])
            for a in bits(s.up[i]):
                row = t[a]
                bad = next((b for b in bits(s.up[j]) if row[b] & ~u), None)
                if bad is not None:
                    fail("continuity", [i, j, a, bad], [t[i][j], row[bad]])
                    break
    order = ["C1", "C2", "C3", "continuity", "symmetry", "singleton"]
    return AxiomReport(
        c1="C1" not in wit,
        c2="C2" not in wit,
        c3="C3" not in wit,
        continuity="continuity" not in wit,
        symmetry="symmetry" not in wit,
        singleton="singleton" not in wit,
        witnesses=[wit[k] for k in order if k in wit],
    )


def convex_hull(cs: ConvexityStructure, subset) -> frozenset:
    s = cs.space
    return s.subset(cs.hull_mask(s.mask(subset)))


# -- consequences of the axioms ---------------------------------------------------

def order_violations(cs: ConvexityStructure, x, y) -> list:
    """Violations of linearity of ``z <= t iff z in C(x, t)`` on ``C(x, y)``.

    Also checks ``z <= t iff t in C(z, y)``, that ``x`` is least and ``y``
    greatest, and ``C(x, y) = C(x, z) | C(z, y)`` for every ``z``.
    """
    s, t = cs.space, cs.table
    i, j = s.idx(x), s.idx(y)
    members = list(bits(t[i][j]))
    out = []
    for z in members:
        if t[i][z] | t[z][j] != t[i][j]:
            out.append({"kind": "decomposition", "point": s.points[z]})
        for w in members:
            le = bool(t[i][w] >> z & 1)
            if le != bool(t[z][j] >> w & 1):
                out.append({"kind": "equivalence", "points": [s.points[z], s.points[w]]})
            if z != w and le and t[i][z] >> w & 1:
                out.append({"kind": "antisymmetry", "points": [s.points[z], s.points[w]]})
            if not le and not t[i][z] >> w & 1:
                out.append({"kind": "totality", "points": [s.points[z], s.points[w]]})
            for v in members:
                if le and t[i][v] >> w & 1 and not t[i][v] >> z & 1:
                    out.append(
                        {"kind": "transitivity", "points": [s.points[z], s.points[w], s.points[v]]}
                    )
        if not t[i][z] >> i & 1:
            out.append({"kind": "least", "point": s.points[z]})
    if not t[i][j] >> i & 1 or not t[i][j] >> j & 1:
        out.append({"kind": "endpoints", "points": [x, y]})
    return out


def interval_order(cs: ConvexityStructure, x, y) -> list:
    """Points of ``C(x, y)`` listed from ``x`` to ``y`` in the interval order."""
    if not cs.validated:
        raise AxiomsNotVerified("interval_order needs a structure passing check_axioms")
    bad = order_violations(cs, x, y)
    if bad:
        raise OrderViolation(f"interval order is not linear: {bad[0]!r}")
    s, t = cs.space, cs.table
    i, j = s.idx(x), s.idx(y)
    members = sorted(bits(t[i][j]), key=lambda z: popcount(t[i][z]))
    return [s.points[z] for z in members]


def punctured_interval_connected(cs: ConvexityStructure, x, y) -> bool:
    """Whether ``C(x, y)`` minus ``y`` is connected; ``True`` when ``x == y``."""
    if not cs.validated:
        raise AxiomsNotVerified("punctured_interval_connected needs a validated structure")
    s = cs.space
    i, j = s.idx(x), s.idx(y)
    if i == j:
        return True
    return s.is_connected(cs.table[i][j] & ~(1 << j))


def closure_preserves_convexity(cs: ConvexityStructure, samples: int = 4096, seed: int = 0):
    """Check that closures of convex sets are convex.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is the
    first convex set, in mask order, whose closure is not convex.  Carriers
    above :data:`CLOSURE_EXHAUSTIVE_LIMIT` points are sampled with a seeded
    generator (hulls of random subsets).
    """
    s = cs.space
    n = len(s)
    if n <= CLOSURE_EXHAUSTIVE_LIMIT:
        candidates = range(1, 1 << n)
    else:
        rng = random.Random(seed)
        candidates = sorted({cs.hull_mask(rng.getrandbits(n) or 1) for _ in range(samples)})
    for m in candidates:
        if cs.is_convex_mask(m) and not cs.is_convex_mask(s.closure(m)):
            return False, s.subset(m)
    return True, None


def convex_opens_are_order_intervals(cs: ConvexityStructure, x, y):
    """Every convex open subset of ``C(x, y)`` is contiguous in the interval order."""
    s, t = cs.space, cs.table
    i, j = s.idx(x), s.idx(y)
    whole = t[i][j]
    order = [s.idx(p) for p in interval_order(cs, x, y)]
    pos = {z: k for k, z in enumerate(order)}
    for u in s.opens():
        m = u & whole
        if not m or not cs.is_convex_mask(m):
            continue
        ks = sorted(pos[z] for z in bits(m))
        if ks[-1] - ks[0] + 1 != len(ks):
            return False, s.subset(m)
    return True, None


@dataclass(frozen=True)
class Star:
    center: object
    ends: frozenset
    rays: dict = field(hash=False, compare=False)

    def to_dict(self):
        return {
            "center": self.center,
            "ends": sorted(self.ends, key=str),
            "rays": {str(e): sorted(r, key=str) for e, r in self.rays.items()},
        }


def enumerate_stars(cs: ConvexityStructure, center):
    """Maximal stars at ``center``.

    Ends are restricted to terminal points, those whose ray ``C(center, z)``
    is not strictly inside another ray, so each ray is as long as possible.
    A star is a maximal set of terminal ends whose rays pairwise meet only
    in the centre.  Returns ``(stars, star_finite)``; on a finite carrier
    every end set is finite.
    """
    if not cs.validated:
        raise AxiomsNotVerified("enumerate_stars needs a validated structure")
    s, t = cs.space, cs.table
    c = s.idx(center)
    rays = {z: t[c][z] for z in range(len(s)) if z != c}
    terminal = [
        z for z, r in rays.items()
        if not any(w != z and r & rays[w] == r and rays[w] != r for w in rays)
    ]
    g = nx.Graph()
    g.add_nodes_from(terminal)
    for a, b in combinations(terminal, 2):
        if rays[a] & rays[b] == 1 << c:
            g.add_edge(a, b)
    stars = []
    for clique in nx.find_cliques(g) if terminal else []:
        ends = sorted(clique)
        stars.append(
            Star(
                center=center,
                ends=frozenset(s.points[z] for z in ends),
                rays={s.points[z]: s.subset(rays[z]) for z in ends},
            )
        )
    stars.sort(key=lambda st: sorted(s.idx(p) for p in st.ends))
    return stars, True
