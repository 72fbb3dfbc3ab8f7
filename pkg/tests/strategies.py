"""Hypothesis strategies and brute-force oracles shared by the test modules."""
import random
from itertools import combinations, product

import networkx as nx

from hypothesis import assume, strategies as st

from ltgconvex.finite import FiniteSpace, SpaceMap, bits
from ltgconvex.intervals import least_connected_table


@st.composite
def spaces(draw, min_points=1, max_points=6):
    n = draw(st.integers(min_points, max_points))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    perm = draw(st.permutations(range(n)))
    return FiniteSpace(range(n), [(perm[i], perm[j]) for i, j in chosen])


@st.composite
def maps(draw, max_source=6, max_target=5):
    src = draw(spaces(max_points=max_source))
    tgt = draw(spaces(max_points=max_target))
    values = draw(st.lists(st.integers(0, len(tgt) - 1), min_size=len(src), max_size=len(src)))
    return SpaceMap(src, tgt, dict(zip(src.points, values)))


@st.composite
def continuous_maps(draw, max_source=6, max_target=5):
    """Monotone maps, built by sending points to targets above earlier choices."""
    src = draw(spaces(max_points=max_source))
    tgt = draw(spaces(max_points=max_target))
    order = sorted(range(len(src)), key=lambda i: bin(src.down[i]).count("1"))
    f = [None] * len(src)
    for i in order:
        cands = [b for b in range(len(tgt)) if all(tgt.up[f[j]] >> b & 1
                 for j in range(len(src)) if j != i and src.down[i] >> j & 1)]
        assume(cands)
        f[i] = draw(st.sampled_from(cands))
    return SpaceMap(src, tgt, {src.points[i]: tgt.points[f[i]] for i in range(len(src))})


@st.composite
def tree_structures(draw, max_points=7):
    """Height-one posets whose comparability graph is a tree, with path intervals."""
    n = draw(st.integers(1, max_points))
    seed = draw(st.integers(0, 2**32 - 1))
    flip = draw(st.booleans())
    return random_tree_structure(n, seed, flip)


def random_tree_structure(n, seed, flip=False):
    rng = random.Random(seed)
    g = nx.Graph()
    g.add_node(0)
    for v in range(1, n):
        g.add_edge(v, rng.randrange(v))
    colour = nx.bipartite.color(g) if n > 1 else {0: 0}
    rel = [(a, b) if colour[a] != flip else (b, a) for a, b in g.edges]
    s = FiniteSpace(range(n), rel)
    cs = least_connected_table(s)
    assert cs is not None
    return cs


def all_subsets(n):
    return range(1 << n)


# -- oracles straight from the definitions ----------------------------------------

def brute_opens(space):
    """Open sets as all subsets closed upward, by checking every subset."""
    n = len(space)
    out = []
    for m in all_subsets(n):
        if all(not (m >> i & 1) or all(m >> j & 1 for j in range(n) if space.leq(space.points[i], space.points[j]))
               for i in range(n)):
            out.append(m)
    return out


def brute_closed(space):
    n = len(space)
    opens = set(brute_opens(space))
    return [m for m in all_subsets(n) if ((1 << n) - 1) & ~m in opens]


def brute_classify(f):
    S, T = f.source, f.target
    opens_s, opens_t = brute_opens(S), set(brute_opens(T))
    closed_t = set(brute_closed(T))
    continuous = all(f.preimage(v) in set(opens_s) for v in opens_t)
    is_open = all(f.image(u) in opens_t for u in opens_s)
    closed = all(f.image(c) in closed_t for c in brute_closed(S))

    def open_onto_image(U):
        img = f.image(U)
        traces = {v & img for v in opens_t}
        return all(f.image(W) in traces for W in opens_s if W & ~U == 0)

    lo = continuous and all(
        any(U >> x & 1 and open_onto_image(U) for U in opens_s) for x in range(len(S))
    )

    def generator(x):
        g = T.full
        for U in opens_s:
            if U >> x & 1:
                g &= f.image(U)
        return g

    germs = [(f.f[x], generator(x)) for x in range(len(S))]
    filtered = lo and len(set(germs)) == len(germs)
    return dict(continuous=continuous, open=is_open, closed=closed,
                locally_open_onto_image=lo, filtered=filtered)


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def brute_connected(space, mask):
    """Connectedness from the definition: no split into two relatively open pieces."""
    members = [i for i in range(len(space)) if mask >> i & 1]
    if not members:
        return False
    opens = brute_opens(space)
    traces = {u & mask for u in opens}
    for a in traces:
        if a and a != mask and (mask & ~a) in traces:
            return False
    return True


def _upset(up, m):
    out = 0
    for i in range(len(up)):
        if m >> i & 1:
            out |= up[i]
    return out


def open_surjection_filtered_factorizations(f):
    """Every partition of the source giving an open surjection followed by a filtered map.

    Written on bitmasks from the definitions: the quotient order is the
    transitive closure of the pushed relation, q must send minimal open
    neighbourhoods to up-sets, and p must be monotone, open onto the image
    of each minimal neighbourhood, and separate (point, filter) germs.
    """
    S, T = f.source, f.target
    n = len(S)
    fibres = {}
    for i, v in enumerate(f.f):
        fibres.setdefault(v, []).append(i)
    # a block never mixes image points, so partition each fibre on its own
    for choice in product(*(list(set_partitions(fib)) for fib in fibres.values())):
        part = [block for blocks in choice for block in blocks]
        k = len(part)
        label = [0] * n
        for b, block in enumerate(part):
            for i in block:
                label[i] = b
        qimg = [0] * n
        for i in range(n):
            for j in bits(S.up[i]):
                qimg[i] |= 1 << label[j]
        up = [0] * k
        for i in range(n):
            up[label[i]] |= qimg[i]
        for m in range(k):
            for c in range(k):
                if up[c] >> m & 1:
                    up[c] |= up[m]
        if any(up[c] >> d & 1 and up[d] >> c & 1 for c in range(k) for d in range(k) if c != d):
            continue  # not T0
        if any(_upset(up, qimg[i]) != qimg[i] for i in range(n)):
            continue  # q not open
        p = [f.f[block[0]] for block in part]
        pimg = []
        for c in range(k):
            m = 0
            for d in range(k):
                if up[c] >> d & 1:
                    m |= 1 << p[d]
            pimg.append(m)
        if any(T.up[p[c]] >> p[d] & 1 == 0 for c in range(k) for d in range(k) if up[c] >> d & 1):
            continue  # p not monotone
        if any(_upset(T.up, pimg[d]) & pimg[c] & ~pimg[d]
               for c in range(k) for d in range(k) if up[c] >> d & 1):
            continue  # p not open onto the image of a minimal neighbourhood
        if len(set(zip(p, pimg))) < k:
            continue  # two points share a germ
        yield sorted(sorted(b) for b in part)
