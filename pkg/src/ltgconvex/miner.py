"""Counterexample search over small finite spaces.

Instances are enumerated by size, then in canonical poset order, so the
first witnesses found are the minimal ones.  The gallery keeps every
witness of the smallest size that has any.  With a ``budget`` smaller
than the instance count, a seeded sample is taken (order preserved).
"""
from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product

from .etale import FiniteEtale
from .finite import FiniteSpace, SpaceMap, continuous_maps
from .intervals import (
    c2_obstruction, check_axioms, closure_preserves_convexity, least_connected_table,
    order_violations, punctured_interval_connected,
)
from .ltg import etale_disjointness
from .models import FiniteAtlas
from .posets import canonical_form, connected_posets

MAX_POINTS = 7


@dataclass(frozen=True)
class MinerConfig:
    max_points: int = 4
    target_property: str = "C2-fails"
    seed: int = 0
    budget: int | None = None

    def __post_init__(self):
        if not 1 <= self.max_points <= MAX_POINTS:
            raise ValueError(f"max_points must lie in 1..{MAX_POINTS}")
        if self.target_property not in TARGETS:
            raise ValueError(f"unknown target {self.target_property!r}; choose from {sorted(TARGETS)}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")


def _validated(space):
    cs = least_connected_table(space)
    if cs is None or not check_axioms(cs).ok:
        return None
    return cs


# Each test returns a list of gallery entries for one instance (empty = no witness).

def _c2_fails(space: FiniteSpace):
    obstruction = c2_obstruction(space)
    if obstruction is None:
        return []
    return [{"instance": space.to_dict(), **obstruction,
             "checks": [{"check": "c2-table-exists", "expect": 2}]}]


def double_covers(base: FiniteSpace):
    """Connected 2-sheeted covers from Z/2 voltages on the Hasse edges, up to isomorphism."""
    n = len(base)
    edges = base.hasse_edges()
    seen = set()
    for volts in product((0, 1), repeat=len(edges)):
        if not any(volts):
            continue  # the trivial cover is disconnected
        leq = [(base.index[a] + n * s, base.index[b] + n * (s ^ v))
               for (a, b), v in zip(edges, volts) for s in (0, 1)]
        cover = FiniteSpace(range(2 * n), leq)
        if not cover.is_connected():
            continue
        key = canonical_form(list(cover.up))
        if key in seen:
            continue
        seen.add(key)
        yield SpaceMap(cover, base, {p: base.points[p % n] for p in cover.points})


def _filtered_fails(base: FiniteSpace):
    out = []
    for f in double_covers(base):
        if f.is_local_homeomorphism() and not f.is_filtered():
            out.append({"instance": f.to_dict(),
                        "checks": [{"check": "local-homeomorphism", "expect": 0},
                                   {"check": "filtered", "expect": 2}]})
    return out


def _etale_disjointness(space):
    """First étale map from ``space`` (targets in canonical order) with overlapping folded cover opens."""
    for m in range(1, len(space) + 1):
        for target in connected_posets(m):
            cs = _validated(target)
            if cs is None:
                continue
            atlas = FiniteAtlas.single(cs)
            for f in continuous_maps(space, target):
                e = FiniteEtale(f, atlas)
                if f.is_injective() or not e.is_etale()[0]:
                    continue
                cover = [U for U, _ in e.chart_cover()]
                for i, U in enumerate(cover):
                    for V in cover[i + 1:]:
                        ok, wit = etale_disjointness(e, U, V)
                        if not ok:
                            doc = dict(f.to_dict(), intervals=cs.to_dict()["intervals"])
                            return [{"instance": doc, "cover_pair": [space.ordered(U), space.ordered(V)],
                                     "witness": wit,
                                     "checks": [{"check": "etale", "expect": 0},
                                                {"check": "disjointness", "expect": 2}]}]
    return []


def _closure_convexity(space):
    cs = _validated(space)
    if cs is None:
        return []
    ok, witness = closure_preserves_convexity(cs)
    if ok:
        return []
    return [{"instance": cs.to_dict(), "witness": sorted(witness, key=space.idx),
             "checks": [{"check": "closure-convexity", "expect": 2}]}]


def _pairs_failing(space, test, check):
    cs = _validated(space)
    if cs is None:
        return []
    pts = space.points
    bad = [[x, y] for i, x in enumerate(pts) for y in pts[i + 1:] if not test(cs, x, y)]
    if not bad:
        return []
    return [{"instance": cs.to_dict(), "pairs": bad, "checks": [{"check": check, "expect": 2}]}]


def _punctured_interval(space):
    return _pairs_failing(space, punctured_interval_connected, "punctured-interval")


def _interval_order(space):
    return _pairs_failing(space, lambda cs, x, y: not order_violations(cs, x, y), "interval-order")


TARGETS = {
    "C2-fails": _c2_fails,
    "filtered-fails-for-local-homeo": _filtered_fails,
    "closure-convexity": _closure_convexity,
    "etale-disjointness": _etale_disjointness,
    "punctured-interval": _punctured_interval,
    "interval-order": _interval_order,
}


def _run(job):
    target, n, index = job
    return TARGETS[target](connected_posets(n)[index])


def workers() -> int:
    try:
        return max(1, int(os.environ.get("CONVEXITY_KERNEL_THREADS", "1")))
    except ValueError:
        return 1


def mine(cfg: MinerConfig, max_workers: int | None = None) -> dict:
    """Search instances up to ``cfg.max_points`` points and return the gallery."""
    jobs = [(cfg.target_property, n, i)
            for n in range(1, cfg.max_points + 1) for i in range(len(connected_posets(n)))]
    total = len(jobs)
    if cfg.budget is not None and cfg.budget < total:
        rng = random.Random(cfg.seed)
        keep = sorted(rng.sample(range(total), cfg.budget))
        jobs = [jobs[k] for k in keep]
    nw = max_workers or workers()
    gallery, size = [], None
    # sizes are processed in order so the search can stop at the first size with witnesses
    for n in range(1, cfg.max_points + 1):
        batch = [j for j in jobs if j[1] == n]
        if nw > 1 and len(batch) > 1:
            with ProcessPoolExecutor(nw) as pool:
                results = list(pool.map(_run, batch, chunksize=max(1, len(batch) // (4 * nw))))
        else:
            results = [_run(j) for j in batch]
        found = [dict(entry, points=n, index=j[2]) for j, entries in zip(batch, results) for entry in entries]
        if found:
            gallery, size = found, n
            break
    return {
        "config": asdict(cfg),
        "instances": total,
        "examined": len(jobs) if size is None else sum(1 for j in jobs if j[1] <= size),
        "minimal_size": size,
        "gallery": gallery,
    }
