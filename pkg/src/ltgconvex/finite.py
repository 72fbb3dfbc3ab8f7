"""Finite T0 spaces, maps between them and the open/filtered factorization.

A finite T0 space is the same thing as a finite poset.  We use the
specialization order: ``x <= y`` iff ``x`` lies in the closure of ``{y}``.
Open sets are then the up-sets and the minimal open neighbourhood of ``x``
is ``up(x)``.  Closed sets are down-sets.

Subsets are handled internally as int bitmasks over the position of each
point in ``FiniteSpace.points``; that position is also the canonical point
order used for witnesses and representatives.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Sequence

from .errors import InvalidSpace, NotConnected, NotLocallyOpen, UnknownPoint

Point = Hashable


@lru_cache(maxsize=1 << 16)
def bits(mask: int) -> tuple:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class FiniteSpace:
    """A finite T0 (Alexandrov) space given by its specialization order.

    ``leq`` may be any generating set of pairs ``(a, b)`` meaning ``a <= b``;
    the reflexive-transitive closure is taken.  A cycle in the closure makes
    the relation non-antisymmetric and raises :class:`InvalidSpace`.
    """

    __slots__ = ("points", "index", "up", "down", "__dict__")

    def __init__(self, points: Iterable[Point], leq: Iterable[Sequence[Point]] = ()):
        self.points = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise InvalidSpace("duplicate point identifiers")
        self.index = {p: i for i, p in enumerate(self.points)}
        n = len(self.points)
        up = [1 << i for i in range(n)]
        for pair in leq:
            if len(pair) != 2:
                raise InvalidSpace(f"leq entry {pair!r} is not a pair")
            a, b = pair
            if a not in self.index or b not in self.index:
                raise InvalidSpace(f"leq mentions unknown point in {pair!r}")
            up[self.index[a]] |= 1 << self.index[b]
        # Warshall on bitmasks
        for k in range(n):
            kb = 1 << k
            for i in range(n):
                if up[i] & kb:
                    up[i] |= up[k]
        for i in range(n):
            for j in bits(up[i] & ~(1 << i)):
                if up[j] >> i & 1:
                    raise InvalidSpace(
                        f"leq is not antisymmetric: {self.points[i]!r} and "
                        f"{self.points[j]!r} are equivalent"
                    )
        down = [0] * n
        for i in range(n):
            for j in bits(up[i]):
                down[j] |= 1 << i
        self.up = tuple(up)
        self.down = tuple(down)

    @classmethod
    def _from_masks(cls, points, up):
        """Build from a transitively closed up-table without re-validating."""
        self = cls.__new__(cls)
        self.points = tuple(points)
        self.index = {p: i for i, p in enumerate(self.points)}
        n = len(self.points)
        down = [0] * n
        for i in range(n):
            for j in bits(up[i]):
                down[j] |= 1 << i
        self.up = tuple(up)
        self.down = tuple(down)
        return self

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FiniteSpace({len(self)} points, {len(self.hasse_edges())} covers)"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSpace)
            and self.points == other.points
            and self.up == other.up
        )

    def __hash__(self):
        return hash((self.points, self.up))

    @property
    def full(self) -> int:
        return (1 << len(self.points)) - 1

    # -- conversions ---------------------------------------------------
    def mask(self, subset: Iterable[Point]) -> int:
        m = 0
        for p in subset:
            try:
                m |= 1 << self.index[p]
            except KeyError:
                raise UnknownPoint(p) from None
        return m

    def subset(self, mask: int) -> frozenset:
        return frozenset(self.points[i] for i in bits(mask))

    def ordered(self, mask: int) -> list:
        """Points of ``mask`` in canonical order."""
        return [self.points[i] for i in bits(mask)]

    def idx(self, p: Point) -> int:
        try:
            return self.index[p]
        except KeyError:
            raise UnknownPoint(p) from None

    # -- order ----------------------------------------------------------
    def leq(self, a: Point, b: Point) -> bool:
        return bool(self.up[self.idx(a)] >> self.idx(b) & 1)

    def relation(self):
        """All pairs ``(a, b)`` with ``a <= b``, canonical order."""
        return [
            (self.points[i], self.points[j])
            for i in range(len(self))
            for j in bits(self.up[i])
        ]

    def hasse_edges(self):
        """Covering pairs ``(a, b)``: ``a < b`` with nothing in between."""
        out = []
        for i in range(len(self)):
            strict = self.up[i] & ~(1 << i)
            for j in bits(strict):
                between = strict & self.down[j] & ~(1 << j)
                if not between:
                    out.append((self.points[i], self.points[j]))
        return out

    def up_closure(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.up[i]
        return out

    def down_closure(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.down[i]
        return out

    # -- topology ---------------------------------------------------------
    def is_open(self, mask: int) -> bool:
        return self.up_closure(mask) == mask

    def is_closed(self, mask: int) -> bool:
        return self.down_closure(mask) == mask

    closure = down_closure

    def interior(self, mask: int) -> int:
        return mask & ~self.down_closure(self.full & ~mask)

    def opens(self) -> list[int]:
        """Every open set (up-set) as a bitmask, in increasing numeric order."""
        return self._opens

    @cached_property
    def _opens(self):
        out = [0]
        # Extend by points in reverse linear-extension order: a point may be
        # added only once everything above it is present.
        order = sorted(range(len(self)), key=lambda i: -popcount(self.down[i]))
        for i in order:
            above = self.up[i] & ~(1 << i)
            out += [m | 1 << i for m in out if m & above == above]
        return sorted(out)

    def is_connected(self, mask: int | None = None) -> bool:
        if mask is None:
            mask = self.full
        if not mask:
            return False
        return self.component(mask, (mask & -mask).bit_length() - 1) == mask

    def component(self, mask: int, start: int) -> int:
        """Connected component of index ``start`` within the subspace ``mask``."""
        seen = 1 << start
        frontier = seen
        while frontier:
            nxt = 0
            for i in bits(frontier):
                nxt |= (self.up[i] | self.down[i]) & mask
            frontier = nxt & ~seen
            seen |= nxt
        return seen

    def components(self, mask: int | None = None) -> list[int]:
        if mask is None:
            mask = self.full
        out = []
        rest = mask
        while rest:
            c = self.component(mask, (rest & -rest).bit_length() - 1)
            out.append(c)
            rest &= ~c
        return out

    def subspace(self, subset) -> "FiniteSpace":
        """Subspace on ``subset`` (points or bitmask) with the induced order."""
        mask = subset if isinstance(subset, int) else self.mask(subset)
        idxs = list(bits(mask))
        pos = {i: k for k, i in enumerate(idxs)}
        up = []
        for i in idxs:
            m = 0
            for j in bits(self.up[i] & mask):
                m |= 1 << pos[j]
            up.append(m)
        return FiniteSpace._from_masks([self.points[i] for i in idxs], up)

    def induced_up(self, mask: int) -> dict[int, int]:
        """Minimal open neighbourhoods inside the subspace ``mask``."""
        return {i: self.up[i] & mask for i in bits(mask)}

    def to_dict(self):
        return {"points": list(self.points), "leq": [list(e) for e in self.hasse_edges()]}

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["points"], doc.get("leq", []))
        except (KeyError, TypeError) as exc:
            raise InvalidSpace(f"malformed space document: {exc}") from None


class SpaceMap:
    """A total map between finite spaces."""

    def __init__(self, source: FiniteSpace, target: FiniteSpace, assignment):
        self.source = source
        self.target = target
        if not isinstance(assignment, dict):
            assignment = dict(zip(source.points, assignment))
        missing = [p for p in source.points if p not in assignment]
        if missing:
            raise InvalidSpace(f"assignment is not total, missing {missing!r}")
        self._assignment = {p: assignment[p] for p in source.points}
        self.f = tuple(target.idx(self._assignment[p]) for p in source.points)
        self._imgs = self._lo = self._cont = None

    @classmethod
    def _from_indices(cls, source, target, f):
        self = cls.__new__(cls)
        self.source = source
        self.target = target
        self.f = tuple(f)
        self._assignment = self._imgs = self._lo = self._cont = None
        return self

    @property
    def assignment(self) -> dict:
        if self._assignment is None:
            pts = self.target.points
            self._assignment = {p: pts[j] for p, j in zip(self.source.points, self.f)}
        return self._assignment

    @property
    def _up_images(self) -> tuple:
        """``f(up(x))`` for every source index, computed once."""
        if self._imgs is None:
            f = self.f
            imgs = []
            for u in self.source.up:
                m = 0
                for i in bits(u):
                    m |= 1 << f[i]
                imgs.append(m)
            self._imgs = tuple(imgs)
        return self._imgs

    def __call__(self, p):
        try:
            return self.assignment[p]
        except KeyError:
            raise UnknownPoint(p) from None

    def __repr__(self):
        return f"SpaceMap({self.assignment!r})"

    def __eq__(self, other):
        return (
            isinstance(other, SpaceMap)
            and self.source == other.source
            and self.target == other.target
            and self.f == other.f
        )

    def image(self, mask: int) -> int:
        out = 0
        f = self.f
        for i in bits(mask):
            out |= 1 << f[i]
        return out

    def preimage(self, mask: int) -> int:
        out = 0
        for i, j in enumerate(self.f):
            if mask >> j & 1:
                out |= 1 << i
        return out

    def compose(self, first: "SpaceMap") -> "SpaceMap":
        """``self`` after ``first``."""
        return SpaceMap._from_indices(first.source, self.target, [self.f[j] for j in first.f])

    def is_continuous(self) -> bool:
        if self._cont is None:
            S, T, f = self.source, self.target, self.f
            Tup = T.up
            self._cont = all(Tup[f[i]] >> f[j] & 1 for i, u in enumerate(S.up) for j in bits(u))
        return self._cont

    def is_open(self) -> bool:
        S, T = self.source, self.target
        return all(T.is_open(m) for m in self._up_images)

    def is_closed(self) -> bool:
        S, T = self.source, self.target
        return all(T.is_closed(self.image(S.down[i])) for i in range(len(S)))

    def is_injective(self) -> bool:
        return len(set(self.f)) == len(self.f)

    def is_surjective(self) -> bool:
        return len(set(self.f)) == len(self.target)

    def is_locally_open_onto_image(self) -> bool:
        """Every ``up(x)`` maps openly onto the subspace ``f(up(x))``.

        If some open ``U`` around ``x`` works then so does ``up(x)``, so the
        minimal neighbourhoods suffice.  The answer is cached.
        """
        if self._lo is None:
            self._lo = self.is_continuous() and self._up_pieces_open()
        return self._lo

    def _up_pieces_open(self) -> bool:
        # f(up(z)) must be open in every f(up(x)) with z in up(x)
        Sup, Tup = self.source.up, self.target.up
        imgs = self._up_images
        spread = []
        for piece in imgs:
            m = 0
            for b in bits(piece):
                m |= Tup[b]
            spread.append(m & ~piece)
        for x, img in enumerate(imgs):
            for z in bits(Sup[x]):
                if spread[z] & img:
                    return False
        return True

    def is_local_homeomorphism(self) -> bool:
        """Each ``up(x)`` maps bijectively and order-embedded onto ``up(f(x))``."""
        if not self.is_continuous():
            return False
        S, T = self.source, self.target
        for x in range(len(S)):
            U = S.up[x]
            if self.image(U) != T.up[self.f[x]] or popcount(U) != popcount(T.up[self.f[x]]):
                return False
            for a in bits(U):
                for b in bits(U):
                    if (S.up[a] >> b & 1) != (T.up[self.f[a]] >> self.f[b] & 1):
                        return False
        return True

    def germ(self, x: int) -> tuple[int, int]:
        """``(f(x), f(up(x)))``: the point together with its pushed-forward filter."""
        return self.f[x], self._up_images[x]

    def is_filtered(self) -> bool:
        if not self.is_locally_open_onto_image():
            return False
        germs = set(zip(self.f, self._up_images))
        return len(germs) == len(self.f)

    def to_dict(self):
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "map": {str(k): v for k, v in self.assignment.items()},
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            src = FiniteSpace.from_dict(doc["source"])
            tgt = FiniteSpace.from_dict(doc["target"])
            raw = doc["map"]
        except (KeyError, TypeError) as exc:
            raise InvalidSpace(f"malformed map document: {exc}") from None
        by_name = {str(p): p for p in src.points}
        tgt_name = {str(p): p for p in tgt.points}
        assignment = {}
        for k, v in raw.items():
            if str(k) not in by_name or str(v) not in tgt_name:
                raise UnknownPoint(f"{k!r} -> {v!r}")
            assignment[by_name[str(k)]] = tgt_name[str(v)]
        return cls(src, tgt, assignment)


@dataclass(frozen=True)
class MapReport:
    continuous: bool
    open: bool
    closed: bool
    locally_open_onto_image: bool
    filtered: bool

    def to_dict(self):
        return {
            "continuous": self.continuous,
            "open": self.open,
            "closed": self.closed,
            "locally_open_onto_image": self.locally_open_onto_image,
            "filtered": self.filtered,
        }


def classify_map(f: SpaceMap) -> MapReport:
    lo = f.is_locally_open_onto_image()
    return MapReport(
        continuous=f.is_continuous(),
        open=f.is_open(),
        closed=f.is_closed(),
        locally_open_onto_image=lo,
        filtered=lo and f.is_filtered(),
    )


@dataclass(frozen=True)
class FilterRep:
    """Principal filter on ``base``: all subsets containing ``generator``.

    Two principal filters coincide exactly when their generators do, so
    equality compares generators.
    """

    base: FiniteSpace
    generator: frozenset

    def __eq__(self, other):
        return (
            isinstance(other, FilterRep)
            and self.base.points == other.base.points
            and self.generator == other.generator
        )

    def __hash__(self):
        return hash(self.generator)

    def __contains__(self, subset):
        return self.generator <= frozenset(subset)

    def converges_to(self, p) -> bool:
        """A principal filter converges to ``p`` iff it is finer than ``up(p)``."""
        return self.base.mask(self.generator) & ~self.base.up[self.base.idx(p)] == 0


def pushforward_filter(f: SpaceMap, x) -> FilterRep:
    i = f.source.idx(x)
    return FilterRep(f.target, f.target.subset(f.image(f.source.up[i])))


@dataclass(frozen=True)
class Factorization:
    qf: SpaceMap
    midspace: FiniteSpace
    fsharp: SpaceMap

    def fibers(self):
        """Map each midspace point to the list of source points over it."""
        out = {p: [] for p in self.midspace.points}
        for p, r in self.qf.assignment.items():
            out[r].append(p)
        return out


def factorize(f: SpaceMap, verify: bool = True) -> Factorization:
    """Split ``f`` into an open surjection followed by a filtered map.

    Points of the source are identified when they share image point and
    pushed-forward neighbourhood filter.  Each class is named after its
    first member in canonical order.
    """
    if not f.is_locally_open_onto_image():
        raise NotLocallyOpen("map is not continuous and locally open onto its image")
    S = f.source
    n = len(S)
    rep_of = {}
    # classes are numbered by first appearance; setdefault sees the old size
    cls_index = [rep_of.setdefault(g, len(rep_of)) for g in zip(f.f, f._up_images)]
    k = len(rep_of)
    if k == n:
        # f is already filtered: the midspace is the source itself
        fac = Factorization(SpaceMap._from_indices(S, S, range(k)), S, SpaceMap._from_indices(S, f.target, f.f))
        fac.fsharp._lo = True
        return fac
    reps = [cls_index.index(c) for c in range(k)]
    up = [1 << c for c in range(k)]
    for x, u in enumerate(S.up):
        m = 0
        for y in bits(u):
            m |= 1 << cls_index[y]
        up[cls_index[x]] |= m
    for m in range(k):
        mb, um = 1 << m, up[m]
        for c in range(k):
            if up[c] & mb:
                up[c] |= um
    mid = FiniteSpace._from_masks([S.points[r] for r in reps], up)
    if any(u & d != 1 << c for c, (u, d) in enumerate(zip(mid.up, mid.down))):
        raise NotLocallyOpen("quotient by germs is not T0")
    qf = SpaceMap._from_indices(S, mid, cls_index)
    fs = SpaceMap._from_indices(mid, f.target, [f.f[r] for r in reps])
    if verify:
        assert fs.compose(qf).f == f.f
        assert qf.is_surjective() and qf.is_open() and qf.is_continuous()
        assert fs.is_filtered()
    return Factorization(qf, mid, fs)


def chain_cover(space: FiniteSpace, x, y, cover) -> list[int]:
    """Shortest chain of cover members linking ``x`` to ``y``.

    Consecutive members intersect.  Among shortest chains the
    lexicographically least index sequence is returned.
    """
    masks = []
    for k, U in enumerate(cover):
        m = U if isinstance(U, int) else space.mask(U)
        if not space.is_open(m):
            raise ValueError(f"cover member {k} is not open")
        masks.append(m)
    xi, yi = space.idx(x), space.idx(y)
    n = len(masks)
    adj = [[j for j in range(n) if j != i and masks[i] & masks[j]] for i in range(n)]
    dist = [None] * n
    queue = deque()
    for j in range(n):
        if masks[j] >> yi & 1:
            dist[j] = 0
            queue.append(j)
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if dist[j] is None:
                dist[j] = dist[i] + 1
                queue.append(j)
    starts = [j for j in range(n) if masks[j] >> xi & 1 and dist[j] is not None]
    if not starts:
        raise NotConnected(f"no chain of cover members joins {x!r} and {y!r}")
    best = min(dist[j] for j in starts)
    cur = min(j for j in starts if dist[j] == best)
    chain = [cur]
    while dist[cur]:
        cur = min(j for j in adj[cur] if dist[j] == dist[cur] - 1)
        chain.append(cur)
    return chain


# -- standard small spaces -------------------------------------------------

def fence(n: int, closed_ends: bool = True) -> FiniteSpace:
    """Zigzag poset on ``0..n-1``: the finite model of a closed interval.

    With ``closed_ends`` the even points are closed (minimal) and the odd
    points open; otherwise the parities swap.
    """
    rel = []
    for i in range(n - 1):
        low_first = (i % 2 == 0) == closed_ends
        rel.append((i, i + 1) if low_first else (i + 1, i))
    return FiniteSpace(range(n), rel)


def chain(n: int) -> FiniteSpace:
    """A linearly ordered carrier ``0 < 1 < ... < n-1`` realized as a fence.

    Adjacent points are comparable and others are not, so order intervals
    are exactly the minimal connected sets, as in a linear continuum.
    """
    return fence(n, closed_ends=True)


def fence_circle(n: int) -> FiniteSpace:
    """Cyclic fence on ``0..n-1`` (``n`` even, ``n >= 4``): even points closed."""
    if n < 4 or n % 2:
        raise InvalidSpace("a fence circle needs an even number >= 4 of points")
    rel = []
    for i in range(0, n, 2):
        rel.append((i, (i + 1) % n))
        rel.append((i, (i - 1) % n))
    return FiniteSpace(range(n), rel)


def pseudocircle() -> FiniteSpace:
    """The 4-point circle: closed points 0, 2 below open points 1, 3."""
    return fence_circle(4)


def wrap_map(degree: int = 2, base: int = 4) -> SpaceMap:
    """Degree-``degree`` wrap of the ``degree*base`` fence circle onto the ``base`` one."""
    src = fence_circle(degree * base)
    tgt = fence_circle(base)
    return SpaceMap(src, tgt, {i: i % base for i in src.points})


def sierpinski() -> FiniteSpace:
    """Points ``'o'`` (open) and ``'c'`` (closed), ``c <= o``."""
    return FiniteSpace(["o", "c"], [("c", "o")])


def discrete(n: int) -> FiniteSpace:
    return FiniteSpace(range(n))


def identity_map(space: FiniteSpace) -> SpaceMap:
    return SpaceMap(space, space, {p: p for p in space.points})


def constant_map(space: FiniteSpace, target: FiniteSpace | None = None, value=None) -> SpaceMap:
    if target is None:
        target = FiniteSpace([0])
    if value is None:
        value = target.points[0]
    return SpaceMap(space, target, {p: value for p in space.points})


def tree_space(edges, n_vertices: int | None = None) -> FiniteSpace:
    """Face poset of a 1-dimensional complex: vertices closed, edges open.

    Vertex ``i`` is named ``"v{i}"`` and the edge ``{a, b}`` (``a < b``) is
    named ``"e{a}-{b}"``.
    """
    verts = set()
    for a, b in edges:
        verts.update((a, b))
    if n_vertices is not None:
        verts.update(range(n_vertices))
    points = [f"v{v}" for v in sorted(verts)]
    rel = []
    for a, b in edges:
        a, b = min(a, b), max(a, b)
        e = f"e{a}-{b}"
        points.append(e)
        rel += [(f"v{a}", e), (f"v{b}", e)]
    return FiniteSpace(points, rel)


def star_cover(space: FiniteSpace) -> list[int]:
    """For each maximal point ``m`` the smallest open set containing ``down(m)``."""
    out = []
    for i in range(len(space)):
        if space.up[i] == 1 << i:
            out.append(space.up_closure(space.down[i]))
    return out


def continuous_maps(source: FiniteSpace, target: FiniteSpace):
    """Every continuous (order-preserving) map, in lexicographic order of index tuples."""
    n = len(source)
    # assign points in index order; values allowed by the already-assigned ones
    below = [[j for j in range(i) if source.up[j] >> i & 1] for i in range(n)]
    above = [[j for j in range(i) if source.up[i] >> j & 1] for i in range(n)]
    Tup, Tdown, full = target.up, target.down, target.full
    f = [0] * n
    if n == 0:
        yield SpaceMap._from_indices(source, target, ())
        return

    def go(i):
        allowed = full
        for j in below[i]:
            allowed &= Tup[f[j]]
        for j in above[i]:
            allowed &= Tdown[f[j]]
        for v in bits(allowed):
            f[i] = v
            if i + 1 == n:
                fm = SpaceMap._from_indices(source, target, f)
                fm._cont = True  # monotone by construction
                yield fm
            else:
                yield from go(i + 1)

    yield from go(0)
