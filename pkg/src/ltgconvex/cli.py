"""Command-line front end.

Exit codes: 0 pass, 2 the checked property fails, 1 bad input,
3 straightening budget exhausted.  Reports are JSON with sorted keys,
written to ``--out`` when given and to stdout otherwise.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import geometry as g
from .errors import BudgetExhausted, ConvexityError, NotLocallyOpen, ParseError, UnknownCheck
from .etale import FiniteEtale, HelixBand, LineMap, PlanePolygon, is_etale, is_locally_convex_map
from .finite import FiniteSpace, SpaceMap, classify_map, factorize
from .intervals import (
    ConvexityStructure, c2_obstruction, check_axioms, closure_preserves_convexity, enumerate_stars,
    least_connected_table, order_violations, punctured_interval_connected,
)
from .io import load_atlas, load_instance, read_json, write_json
from .ltg import etale_disjointness, tietze_check, verify_ltg
from .miner import TARGETS, MinerConfig, mine
from .models import (
    Atlas, CylinderPoint, FiniteAtlas, PolyPath, cylinder_atlas, plane_atlas, polypath_g2, validate_atlas,
)
from .straightening import DEFAULT_BUDGET, excise_self_intersections, straighten

PASS, INPUT_ERROR, FAIL, BUDGET = 0, 1, 2, 3


def _structure(obj) -> tuple[ConvexityStructure | None, dict]:
    """A convexity structure from a structure or a bare space (least-superset table)."""
    if isinstance(obj, ConvexityStructure):
        return obj, {}
    if isinstance(obj, FiniteSpace):
        cs = least_connected_table(obj)
        if cs is None:
            return None, {"table_exists": False, "obstruction": c2_obstruction(obj)}
        return cs, {"table_exists": True}
    raise UnknownCheck(f"expected a finite space or convexity structure, got {type(obj).__name__}")


def _need(obj, *types):
    if not isinstance(obj, types):
        names = "/".join(t.__name__ for t in types)
        raise UnknownCheck(f"this check needs a {names} instance, got {type(obj).__name__}")
    return obj


def check_axioms_report(obj):
    cs, extra = _structure(obj)
    if cs is None:
        ob = extra["obstruction"]
        wit = {"axiom": "C2", "points": ob["pair"], "sets": ob["minimal_supersets"]}
        return False, {"ok": False, "c2": False, "witnesses": [wit], **extra}
    rep = check_axioms(cs, strict=False)
    return rep.ok, {**rep.to_dict(), **extra}


def _c2_table(obj):
    space = _need(obj, FiniteSpace, ConvexityStructure)
    space = space.space if isinstance(space, ConvexityStructure) else space
    ob = c2_obstruction(space)
    return ob is None, {"table_exists": ob is None, "obstruction": ob}


def _map_property(name):
    def run(obj):
        f = obj.f if isinstance(obj, FiniteEtale) else _need(obj, SpaceMap)
        rep = classify_map(f).to_dict()
        rep["local_homeomorphism"] = f.is_local_homeomorphism()
        return rep[name], rep
    return run


def _validated(obj):
    cs, extra = _structure(obj)
    if cs is None or not check_axioms(cs, strict=False).ok:
        raise UnknownCheck("this check needs a structure that passes the axioms")
    return cs


def _closure(obj):
    cs = _validated(obj)
    ok, wit = closure_preserves_convexity(cs)
    return ok, {"ok": ok, "witness": None if wit is None else cs.space.ordered(cs.space.mask(wit))}


def _pairs(obj, test):
    cs = _validated(obj)
    pts = cs.space.points
    bad = [[x, y] for i, x in enumerate(pts) for y in pts[i + 1:] if not test(cs, x, y)]
    return not bad, {"ok": not bad, "failing_pairs": bad}


def _stars(obj):
    cs = _validated(obj)
    out = {}
    finite = True
    for p in cs.space.points:
        stars, ok = enumerate_stars(cs, p)
        finite = finite and ok
        out[str(p)] = [s.to_dict() for s in stars]
    return finite, {"star_finite": finite, "stars": out}


def _atlas(obj, seed):
    if isinstance(obj, ConvexityStructure):
        obj = FiniteAtlas.single(obj)
    rep = validate_atlas(_need(obj, Atlas, FiniteAtlas), seed=seed)
    return rep.ok, rep.to_dict()


def _locally_convex(obj):
    ok, bad = is_locally_convex_map(obj)
    return ok, {"ok": ok, "witnesses": [_jsonable(b) for b in bad]}


def _etale(obj):
    ok, wit = is_etale(obj)
    return ok, {"ok": ok, "witnesses": _jsonable(wit)}


def _disjointness(obj):
    e = _need(obj, FiniteEtale, LineMap)
    cover = e.chart_cover()
    elems = [U for U, _ in cover] if isinstance(e, FiniteEtale) else cover
    bad = []
    for i, U in enumerate(elems):
        for V in elems[i + 1:]:
            ok, wit = etale_disjointness(e, U, V)
            if not ok:
                bad.append(wit)
    return not bad, {"ok": not bad, "pairs": len(elems) * (len(elems) - 1) // 2, "violations": bad}


def _g2(obj, atlas):
    path = _need(obj, PolyPath)
    ok, wit = polypath_g2(path, atlas or _default_atlas(path.model))
    return ok, {"ok": ok, "witness": _jsonable(wit)}


def _jsonable(x):
    if isinstance(x, CylinderPoint):
        return x.to_json()
    if isinstance(x, tuple) and len(x) == 2 and all(isinstance(v, Fraction) for v in x):
        return [g.fmt(x[0]), g.fmt(x[1])]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return g.fmt(x)
    return x


def _default_atlas(model):
    return cylinder_atlas() if model == "cylinder" else plane_atlas()


CHECKS = {
    "check-axioms": lambda o, a, s: check_axioms_report(o),
    "axioms": lambda o, a, s: check_axioms_report(o),
    "c2-table-exists": lambda o, a, s: _c2_table(o),
    "continuous": lambda o, a, s: _map_property("continuous")(o),
    "open": lambda o, a, s: _map_property("open")(o),
    "closed": lambda o, a, s: _map_property("closed")(o),
    "locally-open": lambda o, a, s: _map_property("locally_open_onto_image")(o),
    "filtered": lambda o, a, s: _map_property("filtered")(o),
    "local-homeomorphism": lambda o, a, s: _map_property("local_homeomorphism")(o),
    "closure-convexity": lambda o, a, s: _closure(o),
    "punctured-interval": lambda o, a, s: _pairs(o, punctured_interval_connected),
    "interval-order": lambda o, a, s: _pairs(o, lambda cs, x, y: not order_violations(cs, x, y)),
    "stars": lambda o, a, s: _stars(o),
    "atlas": lambda o, a, s: _atlas(o, s),
    "locally-convex": lambda o, a, s: _locally_convex(o),
    "etale": lambda o, a, s: _etale(o),
    "disjointness": lambda o, a, s: _disjointness(o),
    "g2": lambda o, a, s: _g2(o, a),
}


# -- commands ----------------------------------------------------------------------------------------------

def cmd_check(input_path, check, atlas_path=None, seed=0, out=None):
    if check not in CHECKS:
        raise UnknownCheck(f"unknown check {check!r}; known: {', '.join(sorted(CHECKS))}")
    atlas_doc = read_json(atlas_path) if atlas_path else None
    obj = load_instance(read_json(input_path), atlas_doc)
    atlas = load_atlas(atlas_doc) if atlas_doc is not None and not isinstance(obj, FiniteEtale) else None
    ok, report = CHECKS[check](obj, atlas, seed)
    report = {"check": check, "pass": bool(ok), "report": _jsonable(report)}
    _emit(report, out)
    return PASS if ok else FAIL


def cmd_factorize(input_path, out=None):
    obj = load_instance(read_json(input_path))
    f = obj.f if isinstance(obj, FiniteEtale) else _need(obj, SpaceMap)
    try:
        fac = factorize(f)
    except NotLocallyOpen as exc:
        report = {"factorized": False, "reason": str(exc), "classification": classify_map(f).to_dict()}
        _emit(report, out)
        return FAIL
    report = {
        "factorized": True,
        "midspace": fac.midspace.to_dict(),
        "qf": fac.qf.to_dict()["map"],
        "fsharp": fac.fsharp.to_dict()["map"],
        "fibers": {str(k): v for k, v in fac.fibers().items()},
        "classification": classify_map(f).to_dict(),
    }
    _emit(report, out)
    return PASS


def _emit(report, out):
    text = write_json(report, out)
    if not out:
        sys.stdout.write(text)


def render_steps(trace) -> str:
    rows = ["step  rule  index  removed"]
    for k, s in enumerate(trace.steps):
        rows.append(f"{k:>4}  {s['rule']:<4}  {s['index']:>5}  {_fmt_pt(s['removed'])}")
    return "\n".join(rows)


def _fmt_pt(p):
    if isinstance(p, (list, tuple)):
        return "(" + ", ".join(str(v) for v in p) + ")"
    return str(p)


def cmd_straighten(input_path, atlas_path=None, budget=DEFAULT_BUDGET, out=None):
    path = _need(load_instance(read_json(input_path)), PolyPath)
    atlas = load_atlas(read_json(atlas_path)) if atlas_path else _default_atlas(path.model)
    path.validate(atlas)
    simple = excise_self_intersections(path, atlas)
    try:
        trace = straighten(simple, atlas, budget)
    except BudgetExhausted as exc:
        if exc.trace is not None:
            if out:
                write_json(exc.trace.to_json(), out)
            print(f"budget exhausted after {len(exc.trace.steps)} steps ({exc.trace.status})")
        else:
            print(str(exc))
        return BUDGET
    if out:
        write_json(trace.to_json(), out)
    print(render_steps(trace))
    print(f"steps: {len(trace.steps)}")
    if path.model == "cylinder":
        print(f"winding: {trace.winding}")
    return PASS


def _read_pairs(pairs_path, obj):
    if not pairs_path:
        return None
    doc = read_json(pairs_path)
    if not isinstance(doc, list) or not all(isinstance(p, list) and len(p) == 2 for p in doc):
        raise ParseError("pairs file must be a list of two-element lists")
    if isinstance(obj, (FiniteEtale, SpaceMap)):
        tgt = obj.f.target if isinstance(obj, FiniteEtale) else obj.target
        names = {str(p): p for p in tgt.points}
        try:
            return [(names[str(a)], names[str(b)]) for a, b in doc]
        except KeyError as exc:
            raise ParseError(f"unknown point {exc}") from None
    return [(tuple(a), tuple(b)) for a, b in doc]


def cmd_verify_ltg(input_path, atlas_path=None, pairs_path=None, budget=DEFAULT_BUDGET, out=None):
    atlas_doc = read_json(atlas_path) if atlas_path else None
    obj = load_instance(read_json(input_path), atlas_doc)
    atlas = None
    if atlas_doc is not None and not isinstance(obj, (FiniteEtale, LineMap)):
        atlas = load_atlas(atlas_doc)
    rep = verify_ltg(obj, atlas, _read_pairs(pairs_path, obj), budget)
    _emit(rep.to_json(), out)
    return rep.exit_code


def cmd_tietze(input_path, seed=0, budget=DEFAULT_BUDGET, out=None):
    obj = _need(load_instance(read_json(input_path)), PlanePolygon, HelixBand)
    rep = tietze_check(obj, seed=seed, budget=budget)
    _emit(_jsonable(rep), out)
    return PASS if rep["weakly_convex"] else FAIL


def cmd_mine(max_points=4, target="C2-fails", seed=0, budget=None, out=None):
    try:
        cfg = MinerConfig(max_points, target, seed, budget)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    _emit(mine(cfg), out)
    return PASS


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ltgconvex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="run one named check on an instance")
    c.add_argument("check_id", metavar="CHECK", help=", ".join(sorted(CHECKS)))
    c.add_argument("--input", required=True)
    c.add_argument("--atlas")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")

    f = sub.add_parser("factorize", help="open surjection followed by a filtered map")
    f.add_argument("--input", required=True)
    f.add_argument("--out")

    s = sub.add_parser("straighten", help="excise loops, then straighten a polyline")
    s.add_argument("--input", required=True)
    s.add_argument("--atlas")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--out", "--trace", dest="out")

    v = sub.add_parser("verify-ltg", help="local-to-global convexity pipeline")
    v.add_argument("--input", required=True)
    v.add_argument("--atlas")
    v.add_argument("--pairs")
    v.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    v.add_argument("--out")

    t = sub.add_parser("tietze", help="closed connected locally convex subset check")
    t.add_argument("--input", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    t.add_argument("--out")

    m = sub.add_parser("mine", help="search small finite spaces for witnesses")
    m.add_argument("--target", default="C2-fails", help=", ".join(sorted(TARGETS)))
    m.add_argument("--max-points", type=int, default=4)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--budget", type=int)
    m.add_argument("--out")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else INPUT_ERROR
    try:
        if args.command == "check":
            return cmd_check(args.input, args.check_id, args.atlas, args.seed, args.out)
        if args.command == "factorize":
            return cmd_factorize(args.input, args.out)
        if args.command == "straighten":
            return cmd_straighten(args.input, args.atlas, args.budget, args.out)
        if args.command == "verify-ltg":
            return cmd_verify_ltg(args.input, args.atlas, args.pairs, args.budget, args.out)
        if args.command == "tietze":
            return cmd_tietze(args.input, args.seed, args.budget, args.out)
        return cmd_mine(args.max_points, args.target, args.seed, args.budget, args.out)
    except (ConvexityError, KeyError, ValueError, TypeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
