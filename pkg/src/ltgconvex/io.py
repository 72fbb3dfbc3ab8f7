"""JSON documents in and out.

Every document is UTF-8 JSON written with sorted keys, so equal reports are
byte-identical.  Rationals travel as "p/q" strings.  Instances are
recognised by their keys:

* ``{"points", "leq"}``: a finite space
* ``{"space", "intervals"}``: a convexity structure
* ``{"source", "target", "map"}``: a finite map, optionally with a target
  ``"atlas"`` (list of convexity structures) or target ``"intervals"``
* ``{"kind": "polygon" | "helix_band" | "line", ...}``: model subsets and maps
* ``{"model", "breakpoints", "charts"}``: a polyline
* ``{"model", "atlas"}``: an atlas (cylinder, plane or finite)
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError
from .etale import FiniteEtale, HelixBand, LineMap, PlanePolygon
from .finite import FiniteSpace, SpaceMap
from .intervals import ConvexityStructure
from .models import Atlas, FiniteAtlas, PolyPath, cylinder_atlas, plane_atlas


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(obj, path=None) -> str:
    text = dumps(obj)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc.reason}") from None
    return loads(text)


def _need(doc, *keys):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ParseError(f"missing keys {missing}")


def load_atlas(doc):
    _need(doc, "model")
    model = doc["model"]
    if model == "finite":
        if "atlas" in doc:
            return FiniteAtlas.from_json(doc)
        return FiniteAtlas.single(ConvexityStructure.from_dict(doc))
    if model in ("cylinder", "plane"):
        if "atlas" not in doc:
            return cylinder_atlas() if model == "cylinder" else plane_atlas()
        return Atlas.from_json(doc)
    raise ParseError(f"unknown model {model!r}")


def _target_atlas(doc, target: FiniteSpace):
    if "atlas" in doc:
        charts = [ConvexityStructure.from_dict(c) for c in doc["atlas"]]
        return FiniteAtlas(target, charts)
    if "intervals" in doc:
        return FiniteAtlas.single(ConvexityStructure.from_dict({"space": doc["target"],
                                                                "intervals": doc["intervals"]}))
    return None


def load_instance(doc, atlas_doc=None):
    """Turn a parsed document into the object it describes."""
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object")
    kind = doc.get("kind")
    if kind == "polygon":
        return PlanePolygon(doc["vertices"])
    if kind == "helix_band":
        return HelixBand(doc["slope"], doc["delta"], doc.get("h0", 0))
    if kind == "line":
        src = atlas_doc if atlas_doc is not None else doc
        atlas = load_atlas({"model": doc["model"], **({"atlas": src["atlas"]} if "atlas" in src else {})})
        return LineMap(atlas, doc["start"], doc["direction"], doc["domain"])
    if kind is not None:
        raise ParseError(f"unknown instance kind {kind!r}")
    if "source" in doc and "map" in doc:
        f = SpaceMap.from_dict(doc)
        atlas = _target_atlas(doc, f.target)
        if atlas is None and atlas_doc is not None:
            atlas = load_atlas(atlas_doc)
        return f if atlas is None else FiniteEtale(f, atlas)
    if "space" in doc and "intervals" in doc:
        return ConvexityStructure.from_dict(doc)
    if "points" in doc and "leq" in doc:
        return FiniteSpace.from_dict(doc)
    if "breakpoints" in doc:
        return PolyPath.from_json(doc)
    if "model" in doc:
        return load_atlas(doc)
    raise ParseError("unrecognised instance document")
