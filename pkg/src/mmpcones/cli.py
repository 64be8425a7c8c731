"""Command line front end.

Every command prints one JSON report on stdout.  Exit status is 0 on
success, 2 when the input is malformed and 3 when the input is well formed
but the computation is mathematically undefined.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import documents, gallery
from .chambers import (
    BoundarySpace,
    chambers_meeting,
    decompose_minimal,
    decomposition_to_json,
    family_model_graph,
    label_point,
)
from .documents import InputDocument, dumps
from .errors import MathematicalRefusal, PreconditionError, ValidationError
from .mmp import MINIMAL, canonical_model, minimal_label, root_model, run_scaling_mmp, verify_minimal_model
from .plot import decomposition_svg
from .polyhedra import cell_meets, convex_hull
from .ratlin import q, qstr
from .surface import SurfaceData, zariski_decompose

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_REFUSAL = 3

_TERM = re.compile(r"\s*([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*([A-Za-z_][\w\-+']*?)(?=\s*[+-]|\s*$)")


def parse_divisor(X: SurfaceData, text: str):
    """``"2C0+1C1"`` as a class; names are curves (their divisor classes) or basis elements."""
    named = {c.name: c.divisor_class for c in X.curves if c.divisor_class is not None}
    for i, n in enumerate(X.basis_names):
        named.setdefault(n, tuple(Fraction(int(i == j)) for j in range(X.rho)))
    pos = 0
    total = [Fraction(0)] * X.rho
    text = text.strip()
    if not text:
        raise ValidationError(["empty divisor at path <divisor>"])
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValidationError([f"cannot parse divisor near {text[pos:]!r} at path <divisor>"])
        sign, coeff, name = m.groups()
        if name not in named:
            raise ValidationError([f"dangling name {name!r} at path <divisor>"])
        c = Fraction(coeff) if coeff else Fraction(1)
        if sign == "-":
            c = -c
        total = [t + c * x for t, x in zip(total, named[name])]
        pos = m.end()
    return tuple(total)


def parse_coefficients(text: str) -> tuple:
    parts = [p for p in re.split(r"[\s,]+", text.strip()) if p]
    try:
        return tuple(q(p) for p in parts)
    except ValueError as exc:
        raise ValidationError([f"{exc} at path <b>"]) from None


def parse_region(text: str, dim: int):
    """``box x0 x1 y0 y1``, ``point x y`` or ``polytope x,y;x,y;...``."""
    words = text.split()
    if not words:
        raise ValidationError(["empty region at path <region>"])
    kind, rest = words[0], words[1:]
    try:
        if kind == "box":
            vals = [q(w) for w in rest]
            if len(vals) != 2 * dim:
                raise ValidationError([f"box needs {2 * dim} numbers at path <region>"])
            ranges = [(vals[2 * i], vals[2 * i + 1]) for i in range(dim)]
            pts = [()]
            for a, b in ranges:
                pts = [p + (x,) for p in pts for x in (a, b)]
            return convex_hull(pts)
        if kind == "point":
            vals = tuple(q(w) for w in rest)
            if len(vals) != dim:
                raise ValidationError([f"point needs {dim} numbers at path <region>"])
            return convex_hull([vals])
        if kind == "polytope":
            pts = [tuple(q(x) for x in p.split(",")) for p in " ".join(rest).split(";") if p.strip()]
            if not pts or any(len(p) != dim for p in pts):
                raise ValidationError([f"polytope vertices need {dim} coordinates at path <region>"])
            return convex_hull(pts)
    except ValueError as exc:
        raise ValidationError([f"{exc} at path <region>"]) from None
    raise ValidationError([f"unknown region kind {kind!r} at path <region>"])


def _load(path: str) -> tuple[InputDocument, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError([f"cannot read {path}: {exc.strerror}"]) from None
    return documents.parse(text), text


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _graph_of(doc: InputDocument):
    if doc.kind == "infinite-family":
        if doc.truncation is None:
            raise PreconditionError("infinite family needs a truncation to be decomposed")
        return family_model_graph(doc.payload, *doc.truncation)
    return doc.payload


def _decompose(doc: InputDocument) -> dict:
    if doc.space is None:
        raise ValidationError(["document declares no polytope at path $.polytope"])
    X = _graph_of(doc)
    dec = decompose_minimal(doc.space, X)
    out = decomposition_to_json(dec, doc.model_names)
    out["notes"] = list(doc.notes) + out["notes"]
    return out


# -- commands -----------------------------------------------------------------


def cmd_zariski(args) -> tuple[dict, str]:
    doc, text = _load(args.document)
    if doc.kind != "surface":
        raise ValidationError(["zariski needs a surface document at path $.kind"])
    D = parse_divisor(doc.payload, args.divisor)
    z = zariski_decompose(doc.payload, D)
    return {"divisor": [qstr(x) for x in D], **z.to_json()}, text


def cmd_mmp(args) -> tuple[dict, str]:
    doc, text = _load(args.document)
    b = parse_coefficients(args.coefficients)
    names = doc.model_names
    if doc.kind == "surface":
        X = doc.payload
        if X.scaling_class is None:
            raise ValidationError(["surface document declares no scaling_class at path $.scaling_class"])
        if len(b) != X.r:
            raise ValidationError([f"expected {X.r} boundary coefficients at path <b>"])
        root = root_model(X)
        run = run_scaling_mmp(root, b, X.scaling_class)
        out = {"run": run.to_json(), "minimal_model": None, "canonical_model": None}
        label = minimal_label(run.model)
        out["run"]["outcome"]["model"] = names.get(label, label)
        if run.outcome == MINIMAL:
            v = verify_minimal_model(root, run.model, b)
            out["minimal_model"] = {"id": names.get(label, label), "verified": v.ok, "report": list(v.report)}
            out["canonical_model"] = canonical_model(run.model, b).label
            out["fixed_part"] = sorted(zariski_decompose(X, X.log_class(b)).support)
        return out, text
    X = _graph_of(doc)
    if len(b) != X.r:
        raise ValidationError([f"expected {X.r} boundary coefficients at path <b>"])
    space = doc.space or BoundarySpace(convex_hull([b]))
    lab = label_point(space, X, b)
    return {"minimal_models": sorted(names.get(m, m) for m in lab.minimal),
            "canonical_model": lab.canonical.label}, text


def cmd_chambers(args) -> tuple[dict, str]:
    doc, text = _load(args.document)
    return _decompose(doc), text


def cmd_walk(args) -> tuple[dict, str]:
    doc, text = _load(args.document)
    if doc.kind == "infinite-family":
        region = parse_region(args.region, doc.payload.dim)
        return {"chambers": chambers_meeting(doc.payload, region)}, text
    if doc.space is None:
        raise ValidationError(["document declares no polytope at path $.polytope"])
    region = parse_region(args.region, doc.space.r)
    dec = decompose_minimal(doc.space, _graph_of(doc))
    hits = []
    for i, c in enumerate(dec.canonical.cells):
        if cell_meets(c.cell.closure, c.cell.open_facets, region, ()):
            hits.append({"index": i, "canonical_id": c.canonical_label})
    return {"chambers": hits}, text


def _gallery_document(name: str) -> tuple[dict, object]:
    fx = gallery.get(name)
    trunc = (-3, 3) if name == "example3" else None
    return documents.export_fixture(fx, trunc), fx


def cmd_gallery(args) -> tuple[dict, str]:
    if args.action == "list":
        items = [{"name": n, "kind": f().kind, "description": f().description} for n, f in sorted(gallery.GALLERY.items())]
        return {"fixtures": items}, ""
    if not args.name:
        raise ValidationError([f"gallery {args.action} needs a fixture name"])
    try:
        docobj, fx = _gallery_document(args.name)
    except KeyError as exc:
        raise ValidationError([str(exc.args[0])]) from None
    text = dumps(docobj)
    if args.action == "export":
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            return {"written": args.output}, text
        return docobj, text
    doc = documents.parse_object(docobj)
    if args.name == "example4":
        return gallery.example4_report(), text
    if args.name == "corrupted":
        X = doc.payload
        run = run_scaling_mmp(root_model(X), (), X.scaling_class)
        out = {"run": run.to_json()}
        try:
            zariski_decompose(X, X.log_class(()))
        except MathematicalRefusal as exc:
            out["zariski"] = {"refused": str(exc)}
        return out, text
    if doc.space is None:
        raise PreconditionError(f"fixture {args.name} has no boundary polytope to decompose")
    out = _decompose(doc)
    if args.name == "example3":
        box = parse_region("box 1 2 -1/2 1/2", 2)
        out["walk"] = {"region": "box 1 2 -1/2 1/2", "chambers": chambers_meeting(doc.payload, box)}
    return out, text


def cmd_plot(args) -> tuple[dict, str]:
    try:
        text = Path(args.decomposition).read_text(encoding="utf-8")
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError([f"cannot read decomposition: {exc}"]) from None
    dec = data.get("result", data)
    try:
        svg = decomposition_svg(dec, args.layer)
    except (KeyError, ValueError) as exc:
        raise ValidationError([f"cannot plot: {exc}"]) from None
    Path(args.output).write_text(svg, encoding="utf-8")
    return {"written": args.output, "layer": args.layer}, text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmpcones", description="Exact chamber decompositions for log surfaces")
    p.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("zariski", help="Zariski decomposition of a divisor")
    s.add_argument("document")
    s.add_argument("divisor", help='e.g. "2C0+1C1"')
    s.set_defaults(func=cmd_zariski)

    s = sub.add_parser("mmp", help="scaling MMP at boundary coefficients")
    s.add_argument("document")
    s.add_argument("coefficients", help='e.g. "1/4" or "1/2,1/3"')
    s.set_defaults(func=cmd_mmp)

    s = sub.add_parser("chambers", help="canonical and minimal model chambers")
    s.add_argument("document")
    s.set_defaults(func=cmd_chambers)

    s = sub.add_parser("walk", help="chambers meeting a region")
    s.add_argument("document")
    s.add_argument("region", help='"box x0 x1 y0 y1", "point x y" or "polytope x,y;x,y;..."')
    s.set_defaults(func=cmd_walk)

    s = sub.add_parser("gallery", help="built-in fixtures")
    s.add_argument("action", choices=("list", "run", "export"))
    s.add_argument("name", nargs="?")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gallery)

    s = sub.add_parser("plot", help="SVG picture of a decomposition")
    s.add_argument("decomposition")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--layer", choices=("cells", "canonical_cells"), default="cells")
    s.set_defaults(func=cmd_plot)
    return p


def run(argv=None) -> tuple[int, str]:
    """Run a command; returns (exit code, report text)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    report = {"command": args.command}
    try:
        result, text = args.func(args)
        report["input_digest"] = _digest(text)
        report["result"] = result
        report["warnings"] = list(result.get("notes", [])) if isinstance(result, dict) else []
        code = EXIT_OK
    except ValidationError as exc:
        report["error"] = {"kind": "validation", "messages": exc.errors}
        code = EXIT_VALIDATION
    except MathematicalRefusal as exc:
        report["error"] = {"kind": "refusal", "type": type(exc).__name__, "message": str(exc)}
        code = EXIT_REFUSAL
    if args.timing:
        report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return code, dumps(report)


def main(argv=None) -> int:
    code, text = run(argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
