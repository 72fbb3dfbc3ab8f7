"""Enumeration of finite posets (finite T0 spaces) up to isomorphism.

Canonical form: refine point colours by (up-degree, down-degree) and the
multisets of neighbouring colours, then try every ordering that respects
the colour classes and keep the lexicographically least relation table.
Exhaustive within classes, so it is exact; classes are small in practice.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import permutations, product

from .finite import FiniteSpace, bits, popcount


def _refine(n, up, down):
    colour = [(popcount(up[i]), popcount(down[i])) for i in range(n)]
    while True:
        new = [
            (
                colour[i],
                tuple(sorted(colour[j] for j in bits(up[i]) if j != i)),
                tuple(sorted(colour[j] for j in bits(down[i]) if j != i)),
            )
            for i in range(n)
        ]
        ranks = {c: r for r, c in enumerate(sorted(set(new)))}
        new = [ranks[c] for c in new]
        if len(set(new)) == len(set(colour)):
            return new
        colour = new


def _relabel(up, order):
    pos = {old: new for new, old in enumerate(order)}
    out = []
    for old in order:
        m = 0
        for j in bits(up[old]):
            m |= 1 << pos[j]
        out.append(m)
    return tuple(out)


def canonical_form(up) -> tuple:
    """Canonical relation table (tuple of up-masks) of a closed up-table."""
    n = len(up)
    if n == 0:
        return ()
    down = [0] * n
    for i in range(n):
        for j in bits(up[i]):
            down[j] |= 1 << i
    colour = _refine(n, up, down)
    cells = {}
    for i in range(n):
        cells.setdefault(colour[i], []).append(i)
    groups = [cells[c] for c in sorted(cells)]
    best = None
    for parts in product(*(permutations(g) for g in groups)):
        order = [i for part in parts for i in part]
        cand = _relabel(up, order)
        if best is None or cand < best:
            best = cand
    return best


def space_from_table(table) -> FiniteSpace:
    return FiniteSpace._from_masks(range(len(table)), list(table))


def canonical_space(space: FiniteSpace) -> FiniteSpace:
    return space_from_table(canonical_form(space.up))


def is_isomorphic(a: FiniteSpace, b: FiniteSpace) -> bool:
    return len(a) == len(b) and canonical_form(a.up) == canonical_form(b.up)


def _downsets(up, n):
    down = [0] * n
    for i in range(n):
        for j in bits(up[i]):
            down[j] |= 1 << i
    out = [0]
    for i in sorted(range(n), key=lambda i: popcount(down[i])):
        below = down[i] & ~(1 << i)
        out += [m | 1 << i for m in out if m & below == below]
    return out


@lru_cache(maxsize=None)
def poset_tables(n: int) -> tuple:
    """Canonical tables of all posets on ``n`` points, sorted."""
    if n == 0:
        return ((),)
    found = set()
    for table in poset_tables(n - 1):
        new_bit = 1 << (n - 1)
        for d in _downsets(table, n - 1):
            up = [m | new_bit if d >> i & 1 else m for i, m in enumerate(table)]
            up.append(new_bit)
            found.add(canonical_form(up))
    return tuple(sorted(found))


def posets(n: int) -> list[FiniteSpace]:
    """All posets on ``n`` points up to isomorphism, in canonical order."""
    return [space_from_table(t) for t in poset_tables(n)]


def connected_posets(n: int) -> list[FiniteSpace]:
    return [s for s in posets(n) if s.is_connected()]


def posets_upto(max_points: int, connected: bool = False, min_points: int = 1):
    """Posets ordered by size, then canonical order."""
    for n in range(min_points, max_points + 1):
        yield from (connected_posets(n) if connected else posets(n))
