"""JSON input documents.

Every number is a string ``"p/q"`` (or an integer).  Parsing collects all
problems before failing, each tagged with a JSON path.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .chambers import PSEF, SCALING, BoundarySpace, FamilyDescriptor
from .errors import ValidationError
from .gallery import Fixture
from .mmp import AbstractModel, ModelGraph
from .polyhedra import Cone, convex_hull
from .ratlin import QVector, qstr
from .surface import CurveRecord, SurfaceData

KINDS = ("surface", "abstract", "infinite-family")
_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


@dataclass
class InputDocument:
    name: str
    kind: str
    payload: object
    space: BoundarySpace | None = None
    model_names: dict = field(default_factory=dict)
    notes: tuple = ()
    truncation: tuple | None = None

    def to_fixture(self) -> Fixture:
        return Fixture(self.name, self.kind, self.payload, self.space, {}, dict(self.model_names), self.notes)


class _Reader:
    """Walks a decoded JSON tree, recording errors instead of raising."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, msg: str):
        self.errors.append(f"{msg} at path {path}")

    def rational(self, x, path: str) -> Fraction | None:
        if isinstance(x, bool) or not isinstance(x, (int, str)):
            self.fail(path, "expected a rational string")
            return None
        s = str(x)
        if not _RATIONAL.match(s):
            self.fail(path, f"malformed rational {s!r}")
            return None
        s = s.replace(" ", "")
        if "/" in s and int(s.split("/")[1]) == 0:
            self.fail(path, "zero denominator")
            return None
        return Fraction(s)

    def vector(self, x, path: str, dim: int | None = None) -> QVector | None:
        if not isinstance(x, list):
            self.fail(path, "expected a list")
            return None
        vals = [self.rational(a, f"{path}[{i}]") for i, a in enumerate(x)]
        if any(v is None for v in vals):
            return None
        if dim is not None and len(vals) != dim:
            self.fail(path, f"expected {dim} entries, got {len(vals)}")
            return None
        return tuple(vals)

    def vectors(self, x, path: str, dim: int | None = None) -> list | None:
        if not isinstance(x, list):
            self.fail(path, "expected a list")
            return None
        out = [self.vector(v, f"{path}[{i}]", dim) for i, v in enumerate(x)]
        return None if any(v is None for v in out) else out

    def get(self, obj: dict, key: str, path: str, default=..., kind=None):
        if key not in obj:
            if default is ...:
                self.fail(f"{path}.{key}", "missing field")
                return None
            return default
        val = obj[key]
        if kind is not None and not isinstance(val, kind):
            self.fail(f"{path}.{key}", f"expected {kind.__name__ if isinstance(kind, type) else 'a value of the right type'}")
            return None
        return val


def _cone(rd: _Reader, data, path: str, dim: int) -> Cone | None:
    if data is None:
        return None
    if not isinstance(data, dict):
        rd.fail(path, "expected an object")
        return None
    if "generators" in data:
        gens = rd.vectors(data["generators"], f"{path}.generators", dim)
        return None if gens is None else Cone(dim, generators=tuple(gens))
    if "halfspaces" in data:
        hs = rd.vectors(data["halfspaces"], f"{path}.halfspaces", dim)
        return None if hs is None else Cone(dim, halfspaces=tuple(hs))
    rd.fail(path, "cone needs generators or halfspaces")
    return None


def _space(rd: _Reader, doc: dict, r: int | None, mode: str) -> BoundarySpace | None:
    if "polytope" not in doc:
        return None
    poly = doc["polytope"]
    if not isinstance(poly, dict) or "vertices" not in poly:
        rd.fail("$.polytope", "expected an object with vertices")
        return None
    verts = rd.vectors(poly["vertices"], "$.polytope.vertices", r)
    if not verts:
        if verts is not None:
            rd.fail("$.polytope.vertices", "polytope needs at least one vertex")
        return None
    flags = doc.get("flags", {})
    return BoundarySpace(convex_hull(verts), bool(flags.get("rational_flag", True)), mode)


def _boundary(rd: _Reader, doc: dict, rho: int, curves_by_name: dict):
    bd = rd.get(doc, "boundary", "$", default={}, kind=dict) or {}
    offset = None
    if "offset" in bd:
        offset = rd.vector(bd["offset"], "$.boundary.offset", rho)
    gens = []
    for i, g in enumerate(bd.get("generators", [])):
        path = f"$.boundary.generators[{i}]"
        if not isinstance(g, dict):
            rd.fail(path, "expected an object")
            continue
        if "class" in g:
            v = rd.vector(g["class"], f"{path}.class", rho)
            if v is not None:
                gens.append((str(g.get("name", f"B{i + 1}")), v))
        elif "curve" in g:
            c = curves_by_name.get(g["curve"])
            if c is None or c.get("divisor") is None:
                rd.fail(f"{path}.curve", f"dangling name {g['curve']!r} (no curve with a divisor class)")
            else:
                gens.append((str(g["curve"]), c["divisor"]))
        else:
            rd.fail(path, "generator needs class or curve")
    return offset, gens


def _parse_surface(rd: _Reader, doc: dict) -> dict:
    basis = rd.get(doc, "basis", "$", kind=list) or []
    rho = len(basis)
    curves_raw = rd.get(doc, "curves", "$", kind=list) or []
    pairing = doc.get("pairing")
    pairing_m = None
    if pairing is not None:
        pairing_m = rd.vectors(pairing, "$.pairing", len(curves_raw))
        if pairing_m is not None and len(pairing_m) != rho:
            rd.fail("$.pairing", f"expected {rho} rows (one per basis element), got {len(pairing_m)}")
            pairing_m = None
    curves = {}
    records = []
    for j, c in enumerate(curves_raw):
        path = f"$.curves[{j}]"
        if not isinstance(c, dict) or "name" not in c:
            rd.fail(path, "curve needs a name")
            continue
        cls = None
        if "class" in c:
            cls = rd.vector(c["class"], f"{path}.class", rho)
            if cls is not None and pairing_m is not None and cls != tuple(row[j] for row in pairing_m):
                rd.fail(f"{path}.class", f"curve {c['name']} class disagrees with the pairing matrix")
        elif pairing_m is not None:
            cls = tuple(row[j] for row in pairing_m)
        else:
            rd.fail(path, "curve class missing and no pairing matrix")
        div = rd.vector(c["divisor"], f"{path}.divisor", rho) if c.get("divisor") is not None else None
        si = rd.rational(c["self_intersection"], f"{path}.self_intersection") if c.get("self_intersection") is not None else None
        curves[c["name"]] = {"divisor": div}
        if cls is not None:
            records.append((c["name"], cls, div, si))
    K = rd.vector(rd.get(doc, "canonical_class", "$"), "$.canonical_class", rho)
    offset, gens = _boundary(rd, doc, rho, curves)
    psef = _cone(rd, doc.get("psef_cone"), "$.psef_cone", rho)
    H = rd.vector(doc["scaling_class"], "$.scaling_class", rho) if doc.get("scaling_class") is not None else None
    A = rd.vector(doc["ample_class"], "$.ample_class", rho) if doc.get("ample_class") is not None else None
    flags = doc.get("flags", {})
    return dict(basis=basis, records=records, K=K, offset=offset, gens=gens, psef=psef, H=H, A=A, flags=flags)


def _parse_abstract(rd: _Reader, doc: dict) -> dict:
    basis = rd.get(doc, "basis", "$", kind=list) or []
    rho = len(basis)
    K = rd.vector(rd.get(doc, "canonical_class", "$"), "$.canonical_class", rho)
    offset, gens = _boundary(rd, doc, rho, {})
    psef = _cone(rd, doc.get("psef_cone"), "$.psef_cone", rho)
    if psef is None and "psef_cone" not in doc:
        rd.fail("$.psef_cone", "missing field")
    models = []
    ids = set()
    for i, m in enumerate(rd.get(doc, "models", "$", kind=list) or []):
        path = f"$.models[{i}]"
        if not isinstance(m, dict) or "id" not in m:
            rd.fail(path, "model needs an id")
            continue
        ids.add(m["id"])
        nef = []
        for k, h in enumerate(m.get("nef", [])):
            v = rd.vector(h.get("functional"), f"{path}.nef[{k}].functional", rho) if isinstance(h, dict) else None
            if v is not None:
                nef.append((str(h.get("curve", f"c{k}")), v))
        models.append(AbstractModel(str(m["id"]), tuple(nef)))
    flops = []
    for i, f in enumerate(doc.get("flops", [])):
        path = f"$.flops[{i}]"
        if not (isinstance(f, list) and len(f) == 3):
            rd.fail(path, "flop is [model, model, curve]")
            continue
        for k in (0, 1):
            if f[k] not in ids:
                rd.fail(f"{path}[{k}]", f"dangling name {f[k]!r}")
        flops.append(tuple(f))
    return dict(basis=basis, K=K, offset=offset, gens=gens, psef=psef, models=models, flops=flops)


def parse_object(doc) -> InputDocument:
    rd = _Reader()
    if not isinstance(doc, dict):
        raise ValidationError(["document must be a JSON object at path $"])
    name = str(doc.get("name", "unnamed"))
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ValidationError([f"kind must be one of {', '.join(KINDS)} at path $.kind"])
    mode = doc.get("mode", PSEF)
    if mode not in (PSEF, SCALING):
        rd.fail("$.mode", f"unknown mode {mode!r}")
    model_names = doc.get("model_names", {})
    notes = tuple(doc.get("notes", []))

    if kind == "infinite-family":
        formula = [rd.vector(c, f"$.formula[{i}]") for i, c in enumerate(rd.get(doc, "formula", "$", kind=list) or [])]
        dim = len(formula)
        acc = rd.vectors(doc.get("accumulation_rays", []), "$.accumulation_rays", dim)
        fixed = rd.vectors(doc.get("fixed_points", []), "$.fixed_points", dim)
        psef_hs = rd.vectors(doc.get("psef_halfspaces", []), "$.psef_halfspaces", dim)
        proj = rd.vectors(doc["projection"], "$.projection", dim) if doc.get("projection") is not None else None
        trunc = doc.get("truncation")
        if trunc is not None and not (isinstance(trunc, list) and len(trunc) == 2 and all(isinstance(t, int) for t in trunc)):
            rd.fail("$.truncation", "expected [n_min, n_max]")
            trunc = None
        space = _space(rd, doc, dim, mode)
        if rd.errors or any(f is None for f in formula):
            raise ValidationError(rd.errors)
        fam = FamilyDescriptor(tuple(formula), tuple(acc), tuple(fixed), None if proj is None else tuple(proj),
                               tuple(psef_hs), notes)
        return InputDocument(name, kind, fam, space, model_names, notes, None if trunc is None else tuple(trunc))

    if kind == "surface":
        p = _parse_surface(rd, doc)
    else:
        p = _parse_abstract(rd, doc)
    space = _space(rd, doc, len(p["gens"]), mode)
    if rd.errors:
        raise ValidationError(rd.errors)
    if kind == "surface":
        flags = p["flags"]
        curves = []
        for n, cls, div, si in p["records"]:
            try:
                curves.append(CurveRecord(n, cls, div, si))
            except (ValueError, ZeroDivisionError) as exc:
                rd.fail(f"$.curves[{n}]", str(exc))
        if rd.errors:
            raise ValidationError(rd.errors)
        try:
            payload = SurfaceData(
                basis_names=tuple(p["basis"]),
                curves=tuple(curves),
                canonical_class=p["K"],
                boundary_generators=tuple(p["gens"]),
                boundary_offset=p["offset"],
                psef_cone=p["psef"],
                nef_check_complete=bool(flags.get("nef_check_complete", True)),
                pair_flag=str(flags.get("pair_flag", "KLT")),
                base_name=str(doc.get("base", "S")),
                scaling_class=p["H"],
                ample_class=p["A"],
            )
        except ValidationError as exc:
            raise ValidationError([f"{e} at path $" for e in exc.errors]) from None
    else:
        try:
            payload = ModelGraph(
                basis_names=tuple(p["basis"]),
                canonical_class=p["K"],
                boundary_generators=tuple(p["gens"]),
                boundary_offset=p["offset"] or tuple(Fraction(0) for _ in p["basis"]),
                psef_cone=p["psef"],
                models=tuple(p["models"]),
                flops=tuple(p["flops"]),
                base_name=str(doc.get("base", "S")),
            )
        except ValidationError as exc:
            raise ValidationError([f"{e} at path $" for e in exc.errors]) from None
    return InputDocument(name, kind, payload, space, model_names, notes)


def parse(text: str) -> InputDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}"]) from None
    return parse_object(doc)


# -- export -------------------------------------------------------------------


def _v(v) -> list:
    return [qstr(x) for x in v]


def _cone_doc(c: Cone | None):
    if c is None:
        return None
    if c.generators is not None:
        return {"generators": [_v(g) for g in c.generators]}
    return {"halfspaces": [_v(h) for h in c.halfspaces]}


def _common(name, kind, space, model_names, notes) -> dict:
    out = {"name": name, "kind": kind}
    if space is not None:
        out["polytope"] = {"vertices": [_v(v) for v in space.polytope.vertices]}
        out["mode"] = space.mode
        out["flags"] = {"rational_flag": space.rational_flag}
    if model_names:
        out["model_names"] = dict(sorted(model_names.items()))
    if notes:
        out["notes"] = list(notes)
    return out


def export_object(name: str, kind: str, payload, space=None, model_names=None, notes=(), truncation=None) -> dict:
    out = _common(name, kind, space, model_names or {}, notes)
    if kind == "surface":
        X: SurfaceData = payload
        out["basis"] = list(X.basis_names)
        out["pairing"] = [[qstr(c.curve_class[i]) for c in X.curves] for i in range(X.rho)]
        curves = []
        for c in X.curves:
            entry = {"name": c.name}
            if c.divisor_class is not None:
                entry["divisor"] = _v(c.divisor_class)
            if c.self_intersection is not None:
                entry["self_intersection"] = qstr(c.self_intersection)
            curves.append(entry)
        out["curves"] = curves
        out["canonical_class"] = _v(X.canonical_class)
        out["boundary"] = {
            "offset": _v(X.boundary_offset),
            "generators": [{"name": n, "class": _v(v)} for n, v in X.boundary_generators],
        }
        out["psef_cone"] = _cone_doc(X.psef_cone)
        if X.scaling_class is not None:
            out["scaling_class"] = _v(X.scaling_class)
        if X.ample_class is not None:
            out["ample_class"] = _v(X.ample_class)
        out["base"] = X.base_name
        out.setdefault("flags", {}).update(
            {"nef_check_complete": X.nef_check_complete, "pair_flag": X.pair_flag}
        )
    elif kind == "abstract":
        G: ModelGraph = payload
        out["basis"] = list(G.basis_names)
        out["canonical_class"] = _v(G.canonical_class)
        out["boundary"] = {
            "offset": _v(G.boundary_offset),
            "generators": [{"name": n, "class": _v(v)} for n, v in G.boundary_generators],
        }
        out["psef_cone"] = _cone_doc(G.psef_cone)
        out["models"] = [
            {"id": m.id, "nef": [{"curve": n, "functional": _v(h)} for n, h in m.nef_halfspaces]}
            for m in G.models
        ]
        out["flops"] = [list(f) for f in G.flops]
        out["base"] = G.base_name
    else:
        fam: FamilyDescriptor = payload
        out["formula"] = [_v(c) for c in fam.formula]
        out["accumulation_rays"] = [_v(r) for r in fam.accumulation_rays]
        out["fixed_points"] = [_v(p) for p in fam.fixed_points]
        out["psef_halfspaces"] = [_v(h) for h in fam.psef_halfspaces]
        if fam.projection is not None:
            out["projection"] = [_v(r) for r in fam.projection]
        if truncation is not None:
            out["truncation"] = list(truncation)
    return out


def export_document(doc: InputDocument) -> dict:
    return export_object(doc.name, doc.kind, doc.payload, doc.space, doc.model_names, doc.notes, doc.truncation)


def export_fixture(fx: Fixture, truncation=None) -> dict:
    return export_object(fx.name, fx.kind, fx.payload, fx.space, fx.model_names, fx.notes, truncation)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
