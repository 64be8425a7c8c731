"""Chamber decompositions of boundary polytopes.

The region V is cut by every rational wall on which some curve on some
reachable model pairs to zero with K+B.  Each cell of that arrangement is
labeled by running the model pipeline at a rational point of its relative
interior; cells with equal canonical model merge into the V_j and, inside
those, cells with equal minimal model into the W_{j,k}.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (
    AccumulationLocusError,
    NoPathError,
    PreconditionError,
)
from .mmp import (
    MINIMAL,
    CanonicalModelId,
    ModelGraph,
    ModelNode,
    canonical_model,
    minimal_label,
    reachable_models,
    root_model,
    run_scaling_mmp,
    verify_minimal_model,
)
from .polyhedra import (
    OUTSIDE,
    CellComplexCell,
    Cone,
    Halfspace,
    Polytope,
    _strict_nonempty,
    convex_hull,
    membership,
    polytope_contains_polytope,
    polytope_intersect_halfspaces,
)
from .ratlin import QVector, dot, is_zero, neg, primitive, q, qstr, vec
from .surface import SurfaceData

SCALING = "scaling"
PSEF = "psef"
NO_CANONICAL = "no canonical model"


@dataclass(frozen=True)
class BoundarySpace:
    """The polytope of boundary coefficients and how it is to be decomposed.

    ``mode`` is ``"psef"`` for the region where K+B is pseudo-effective, or
    ``"scaling"`` to label all of the polytope by scaling-MMP end models.
    """

    polytope: Polytope
    rational_flag: bool = True
    mode: str = PSEF

    @property
    def r(self) -> int:
        return self.polytope.dim


@dataclass(frozen=True)
class Wall:
    """Hyperplane ``<normal, b> = offset`` in boundary-coefficient space."""

    normal: QVector
    offset: Fraction
    origins: tuple = ()

    def value(self, b: Sequence) -> Fraction:
        return dot(self.normal, b) - self.offset

    def side(self, sign: int) -> Halfspace:
        if sign > 0:
            return Halfspace(self.normal, self.offset)
        return Halfspace(neg(self.normal), -self.offset)

    def to_json(self) -> dict:
        return {
            "normal": [qstr(x) for x in self.normal],
            "offset": qstr(self.offset),
            "origins": list(self.origins),
        }


def _normalize_wall(normal: QVector, offset: Fraction) -> tuple[QVector, Fraction] | None:
    if is_zero(normal):
        return None
    joint = primitive(tuple(normal) + (offset,))
    if next(x for x in joint[:-1] if x != 0) < 0:
        joint = neg(joint)
    return joint[:-1], joint[-1]


def _affine_pairing(X, model: ModelNode, c: QVector) -> tuple[QVector, Fraction]:
    """``b -> <K + B(b), c>`` on ``model`` as (normal, offset) with value normal.b - offset."""
    if model.is_abstract:
        g = model.graph
        base = dot(g.canonical_class, c) + dot(g.boundary_offset, c)
        normal = tuple(dot(v, c) for _, v in g.boundary_generators)
    else:
        Y = model.surface
        base = dot(Y.canonical_class, c) + dot(Y.boundary_offset, c)
        normal = tuple(dot(v, c) for _, v in Y.boundary_generators)
    return normal, -base


def _push_class(model: ModelNode, h: QVector) -> QVector:
    for step in model.chain:
        h = tuple(dot(row, h) for row in step.projection)
    return h


def _psef_halfspaces(X) -> list[Halfspace]:
    if X.psef_cone is None:
        return []
    K = X.canonical_class
    off = X.boundary_offset
    out = []
    for h in X.psef_cone.hrep_rows:
        normal = tuple(dot(h, v) for _, v in X.boundary_generators)
        out.append(Halfspace(normal, -(dot(h, K) + dot(h, off))))
    return out


def effective_region(space: BoundarySpace, X) -> Polytope:
    """Points of the boundary polytope where K+B is pseudo-effective."""
    return polytope_intersect_halfspaces(space.polytope, _psef_halfspaces(X))


def _models(X) -> list[ModelNode]:
    if isinstance(X, ModelGraph):
        return X.nodes()
    return reachable_models(root_model(X))


def collect_walls(space: BoundarySpace, X, region: Polytope | None = None) -> list[Wall]:
    """All rational walls meeting ``region`` (default: the boundary polytope)."""
    region = space.polytope if region is None else region
    raw: list[tuple[QVector, Fraction, str]] = []
    for m in _models(X):
        funcs = m.curve_functionals()
        label = minimal_label(m)
        for name, c, _ in funcs:
            n, off = _affine_pairing(X, m, c)
            raw.append((n, off, f"{label}:{name}"))
        if space.mode == SCALING and not m.is_abstract:
            H = _push_class(m, X.scaling_class)
            for i, (ni, ci, _) in enumerate(funcs):
                for nj, cj, _ in funcs[i + 1:]:
                    ai, oi = _affine_pairing(X, m, ci)
                    aj, oj = _affine_pairing(X, m, cj)
                    hi, hj = dot(H, ci), dot(H, cj)
                    # <D,ci><H,cj> - <D,cj><H,ci>, with <D,c> = a.b - o
                    normal = tuple(x * hj - y * hi for x, y in zip(ai, aj))
                    raw.append((normal, oi * hj - oj * hi, f"{label}:tie({ni},{nj})"))
    for h in _psef_halfspaces(X):
        raw.append((h.normal, h.offset, "psef-boundary"))
    merged: dict[tuple, list[str]] = {}
    for normal, offset, origin in raw:
        key = _normalize_wall(normal, offset)
        if key is None:
            continue
        merged.setdefault(key, [])
        if origin not in merged[key]:
            merged[key].append(origin)
    walls = []
    for (normal, offset), origins in sorted(merged.items()):
        w = Wall(normal, offset, tuple(origins))
        if region.is_empty:
            continue
        vals = [w.value(v) for v in region.vertices]
        if min(vals) <= 0 <= max(vals):
            walls.append(w)
    return walls


# -- arrangement --------------------------------------------------------------


@dataclass(frozen=True)
class ArrangementCell:
    signs: tuple
    closure: Polytope
    stricts: tuple  # Halfspaces that are > 0 on the cell

    @property
    def sample(self) -> QVector:
        return self.closure.barycenter()

    def contains(self, x: Sequence) -> bool:
        return self.closure.contains(x) and all(h.value(x) > 0 for h in self.stricts)

    def as_cell(self) -> CellComplexCell:
        open_facets = tuple(
            h for h in self.stricts if min(h.value(v) for v in self.closure.vertices) == 0
        )
        return CellComplexCell(self.closure, open_facets)


def enumerate_cells(region: Polytope, walls: Sequence[Wall]) -> list[ArrangementCell]:
    """Every nonempty sign-vector cell of ``walls`` inside ``region``."""
    if region.is_empty:
        return []
    cells = [ArrangementCell((), region, ())]
    for w in walls:
        nxt = []
        for cell in cells:
            vals = [w.value(v) for v in cell.closure.vertices]
            for s in (1, 0, -1):
                if s == 0:
                    if not (min(vals) <= 0 <= max(vals)):
                        continue
                    if all(v == 0 for v in vals):
                        piece = cell.closure
                    else:
                        piece = polytope_intersect_halfspaces(cell.closure, [], [Halfspace(w.normal, w.offset)])
                    stricts = cell.stricts
                else:
                    if max(s * v for v in vals) <= 0:
                        continue
                    if min(s * v for v in vals) >= 0:
                        piece = cell.closure
                    else:
                        piece = polytope_intersect_halfspaces(cell.closure, [w.side(s)])
                    stricts = cell.stricts + (Halfspace(w.side(s).normal, w.side(s).offset, True),)
                if _strict_nonempty(piece, stricts):
                    nxt.append(ArrangementCell(cell.signs + (s,), piece, stricts))
        cells = nxt
    return sorted(cells, key=lambda c: (c.closure.vertices, c.signs))


def _is_face_of(a: tuple, b: tuple) -> bool:
    """Cell with signs ``a`` lies in the closure of the cell with signs ``b``."""
    return all(x == 0 or x == y for x, y in zip(a, b))


def _groups(cells: Sequence[ArrangementCell], keys: Sequence) -> list[list[int]]:
    parent = list(range(len(cells)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if keys[i] == keys[j] and (
                _is_face_of(cells[i].signs, cells[j].signs) or _is_face_of(cells[j].signs, cells[i].signs)
            ):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(cells)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _meets_hyperplane(cell: ArrangementCell, h: Halfspace) -> bool:
    piece = polytope_intersect_halfspaces(cell.closure, [], [Halfspace(h.normal, h.offset)])
    return _strict_nonempty(piece, cell.stricts)


def represent_union(
    members: Sequence[int], cells: Sequence[ArrangementCell], walls: Sequence[Wall]
) -> CellComplexCell | None:
    """Closure-plus-strict-facets form of a union of cells, or None if it is not one."""
    closure = convex_hull([v for i in members for v in cells[i].closure.vertices])
    candidates = list(closure.facets)
    for w in walls:
        for s in (1, -1):
            h = w.side(s)
            vals = [h.value(v) for v in closure.vertices]
            if min(vals) == 0 and max(vals) > 0:
                candidates.append(h)
    stricts = []
    seen = set()
    for h in candidates:
        if is_zero(h.normal):
            continue
        key = primitive(h.normal + (h.offset,))
        if key in seen:
            continue
        seen.add(key)
        if not any(_meets_hyperplane(cells[i], h) for i in members):
            stricts.append(Halfspace(h.normal, h.offset, True))
    member_set = set(members)
    for k, c in enumerate(cells):
        if k in member_set:
            continue
        inter = polytope_intersect_halfspaces(c.closure, list(closure.facets), closure.equations)
        if not inter.is_empty and _strict_nonempty(inter, list(c.stricts) + stricts):
            return None
    return CellComplexCell(closure, tuple(stricts))


# -- labels -------------------------------------------------------------------


@dataclass(frozen=True)
class PointLabel:
    canonical: object  # CanonicalModelId or a string for non-minimal outcomes
    minimal: frozenset


def label_point(space: BoundarySpace, X, b: Sequence) -> PointLabel:
    """Run the model pipeline at the boundary coefficients ``b``."""
    b = vec(b)
    if isinstance(X, ModelGraph):
        D = X.log_class(b)
        if membership(X.psef_cone, D) == OUTSIDE:
            raise PreconditionError("K+B is not pseudo-effective at this point")
        mins = [m for m in X.nodes() if verify_minimal_model(None, m, b)]
        if not mins:
            raise PreconditionError("declared data incomplete: no declared model is minimal here")
        ids = {canonical_model(m, b) for m in mins}
        if len(ids) != 1:
            raise PreconditionError("declared minimal models disagree on the canonical model")
        return PointLabel(ids.pop(), frozenset(m.id for m in mins))
    root = root_model(X)
    run = run_scaling_mmp(root, b, X.scaling_class)
    mid = frozenset({minimal_label(run.model)})
    if run.outcome == MINIMAL:
        return PointLabel(canonical_model(run.model, b), mid)
    if space.mode == SCALING:
        return PointLabel(f"base {X.base_name}", mid)
    return PointLabel(NO_CANONICAL, mid)


def _label_text(canonical) -> str:
    return canonical.label if isinstance(canonical, CanonicalModelId) else str(canonical)


# -- decompositions -----------------------------------------------------------


@dataclass
class LabeledCell:
    cell: CellComplexCell
    canonical: object
    canonical_label: str
    minimal: frozenset | None = None
    parts: tuple = ()

    def contains(self, x) -> bool:
        return self.cell.contains(x)

    def to_json(self, names: dict) -> dict:
        out = self.cell.to_json()
        out["canonical_id"] = self.canonical_label
        if self.minimal is not None:
            out["minimal_id"] = sorted(names.get(m, m) for m in self.minimal)
        return out


@dataclass
class ChamberDecomposition:
    region: Polytope
    walls: list
    arrangement: list
    labels: list  # PointLabel per arrangement cell
    cells: list = field(default_factory=list)  # LabeledCell
    notes: list = field(default_factory=list)

    def locate(self, x) -> LabeledCell:
        hits = [c for c in self.cells if c.contains(x)]
        if len(hits) != 1:
            raise ValueError(f"point lies in {len(hits)} cells")
        return hits[0]


@dataclass
class MinimalDecomposition(ChamberDecomposition):
    canonical: ChamberDecomposition | None = None
    models: dict = field(default_factory=dict)  # minimal model -> (closure, CellComplexCell | None)
    containment: dict = field(default_factory=dict)  # minimal model -> canonical cell indices


def _label_keys(labels: Sequence[PointLabel]) -> dict:
    """Distinct display strings for distinct canonical ids."""
    names: dict = {}
    used: dict[str, int] = {}
    for lab in labels:
        if lab.canonical in names:
            continue
        text = _label_text(lab.canonical)
        if text in used:
            used[text] += 1
            text = f"{text}#{used[text]}"
        else:
            used[text] = 1
        names[lab.canonical] = text
    return names


def _merge(region, walls, arrangement, labels, key: Callable, make_label: Callable) -> tuple[list, list]:
    keys = [key(lab) for lab in labels]
    out = []
    notes = []
    seen_keys: dict = {}
    for members in _groups(arrangement, keys):
        k = keys[members[0]]
        seen_keys[k] = seen_keys.get(k, 0) + 1
        rep = represent_union(members, arrangement, walls)
        if rep is None:
            notes.append(f"{make_label(labels[members[0]])}: union is not closure minus open facets; cells listed separately")
            for i in members:
                out.append((arrangement[i].as_cell(), labels[i], (i,)))
        else:
            out.append((rep, labels[members[0]], tuple(members)))
    for k, count in seen_keys.items():
        if count > 1:
            notes.append("a label occurs in several disconnected chambers; kept as separate entries")
    return out, notes


def _arrangement(space: BoundarySpace, X) -> tuple[Polytope, list, list, list, list]:
    notes = []
    if space.mode == SCALING:
        region = space.polytope
        V = effective_region(space, X)
        if V.is_empty:
            notes.append("K+B is nowhere pseudo-effective over the base; cells labeled by scaling-MMP outcomes")
    else:
        region = effective_region(space, X)
    if region.is_empty:
        raise PreconditionError("V is empty")
    walls = collect_walls(space, X, region)
    arrangement = enumerate_cells(region, walls)
    labels = [label_point(space, X, c.sample) for c in arrangement]
    return region, walls, arrangement, labels, notes


def decompose_canonical(space: BoundarySpace, X) -> ChamberDecomposition:
    region, walls, arrangement, labels, notes = _arrangement(space, X)
    names = _label_keys(labels)
    merged, more = _merge(region, walls, arrangement, labels, lambda lab: lab.canonical,
                          lambda lab: names[lab.canonical])
    cells = [LabeledCell(rep, lab.canonical, names[lab.canonical], None, parts) for rep, lab, parts in merged]
    if space.rational_flag:
        for c in cells:
            assert all(isinstance(x, Fraction) for v in c.cell.closure.vertices for x in v)
    return ChamberDecomposition(region, walls, arrangement, labels, cells, notes + more)


def decompose_minimal(space: BoundarySpace, X, canonical: ChamberDecomposition | None = None) -> MinimalDecomposition:
    if canonical is None:
        canonical = decompose_canonical(space, X)
    region, walls, arrangement, labels = canonical.region, canonical.walls, canonical.arrangement, canonical.labels
    names = _label_keys(labels)
    merged, notes = _merge(region, walls, arrangement, labels, lambda lab: (lab.canonical, lab.minimal),
                           lambda lab: names[lab.canonical])
    cells = [LabeledCell(rep, lab.canonical, names[lab.canonical], lab.minimal, parts) for rep, lab, parts in merged]
    models = {}
    containment = {}
    all_models = sorted({m for lab in labels for m in lab.minimal})
    for m in all_models:
        members = [i for i, lab in enumerate(labels) if m in lab.minimal]
        closure = convex_hull([v for i in members for v in arrangement[i].closure.vertices])
        rep = represent_union(members, arrangement, walls)
        if rep is None:
            notes.append(f"W({m}) is not convex")
        models[m] = (closure, rep)
        containment[m] = [j for j, c in enumerate(canonical.cells) if polytope_contains_polytope(c.cell.closure, closure)]
        if not containment[m]:
            notes.append(f"W({m}) is not contained in the closure of a single canonical chamber")
    return MinimalDecomposition(region, walls, arrangement, labels, cells, canonical.notes + notes,
                                canonical=canonical, models=models, containment=containment)


def decomposition_to_json(dec: MinimalDecomposition, model_names: dict | None = None) -> dict:
    names = model_names or {}
    return {
        "region": dec.region.to_json(),
        "walls": [w.to_json() for w in dec.walls],
        "canonical_cells": [c.to_json(names) for c in dec.canonical.cells],
        "cells": [c.to_json(names) for c in dec.cells],
        "minimal_models": [
            {"minimal_id": names.get(m, m), "closure": closure.to_json()}
            for m, (closure, _) in sorted(dec.models.items())
        ],
        "notes": list(dec.notes),
    }


# -- flops --------------------------------------------------------------------


def flop_path(graph: ModelGraph, m1: str, m2: str, b: Sequence) -> list[tuple[str, str, str]]:
    """Shortest chain of declared flops from ``m1`` to ``m2`` through minimal models for ``b``."""
    b = vec(b)
    n1, n2 = graph.node(m1), graph.node(m2)
    for n in (n1, n2):
        v = verify_minimal_model(None, n, b)
        if not v:
            raise PreconditionError(f"{n.id} is not a minimal model: " + "; ".join(v.report))
    if canonical_model(n1, b) != canonical_model(n2, b):
        raise PreconditionError("models have different canonical models")
    if m1 == m2:
        return []
    allowed = {m.id for m in graph.nodes() if verify_minimal_model(None, m, b)}
    adj: dict[str, list] = {}
    for a, c, curve in graph.flops:
        adj.setdefault(a, []).append((c, curve))
        adj.setdefault(c, []).append((a, curve))
    prev = {m1: None}
    queue = deque([m1])
    while queue:
        cur = queue.popleft()
        if cur == m2:
            break
        for nxt, curve in sorted(adj.get(cur, [])):
            if nxt in allowed and nxt not in prev:
                prev[nxt] = (cur, curve)
                queue.append(nxt)
    if m2 not in prev:
        raise NoPathError(f"no declared flop path from {m1} to {m2}")
    path = []
    cur = m2
    while prev[cur] is not None:
        p, curve = prev[cur]
        path.append((p, cur, curve))
        cur = p
    return path[::-1]


# -- infinite families --------------------------------------------------------


def _poly(coeffs: Sequence[Fraction], n: int) -> Fraction:
    return sum((c * n**k for k, c in enumerate(coeffs)), Fraction(0))


@dataclass(frozen=True)
class FamilyDescriptor:
    """Index -> generator formula with exact polynomial coordinates.

    ``formula[i]`` lists the coefficients of coordinate ``i`` as a
    polynomial in ``n`` (constant term first).  Chamber ``n`` is the cone
    spanned by the generators of index ``n-1`` and ``n``.
    """

    formula: tuple
    accumulation_rays: tuple = ()
    fixed_points: tuple = ()
    projection: tuple | None = None
    psef_halfspaces: tuple = ()
    notes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "formula", tuple(vec(c) for c in self.formula))
        object.__setattr__(self, "accumulation_rays", tuple(vec(r) for r in self.accumulation_rays))
        object.__setattr__(self, "fixed_points", tuple(vec(p) for p in self.fixed_points))
        object.__setattr__(self, "psef_halfspaces", tuple(vec(h) for h in self.psef_halfspaces))
        if self.projection is not None:
            object.__setattr__(self, "projection", tuple(vec(r) for r in self.projection))

    @property
    def dim(self) -> int:
        return len(self.formula)

    def generator(self, n: int) -> QVector:
        return tuple(_poly(c, n) for c in self.formula)

    def project(self, v: Sequence) -> QVector:
        if self.projection is None:
            raise ValueError("family has no projection")
        return tuple(dot(row, v) for row in self.projection)

    def chamber_cone(self, n: int) -> Cone:
        return Cone(self.dim, generators=(self.generator(n - 1), self.generator(n)))


def _det2(a: Sequence, b: Sequence) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def _ray_halfspaces(ray: QVector) -> tuple[list[Halfspace], list[Halfspace]]:
    """The closed ray through ``ray`` as (inequalities, equations) in the plane."""
    perp = (-ray[1], ray[0])
    return [Halfspace(ray, 0)], [Halfspace(perp, 0)]


def chambers_meeting(family: FamilyDescriptor, region: Polytope, max_steps: int = 100000) -> list[int]:
    """Indices of the chambers whose closed cone meets the compact ``region``."""
    if family.dim != 2:
        raise ValueError("chamber enumeration is implemented for planar families")
    for ray in family.accumulation_rays:
        ineq, eqs = _ray_halfspaces(ray)
        if not polytope_intersect_halfspaces(region, ineq, eqs).is_empty:
            raise AccumulationLocusError("region meets accumulation locus; enumeration infinite")
    region = polytope_intersect_halfspaces(region, [Halfspace(h, 0) for h in family.psef_halfspaces])
    if region.is_empty:
        return []
    sigma = 1 if _det2(family.generator(0), family.generator(1)) > 0 else -1

    def meets(n: int) -> bool:
        a, b = family.generator(n - 1), family.generator(n)
        hs = [
            Halfspace((sigma * -a[1], sigma * a[0]), 0),  # sigma det(a, x) >= 0
            Halfspace((sigma * b[1], sigma * -b[0]), 0),  # sigma det(x, b) >= 0
        ]
        return not polytope_intersect_halfspaces(region, hs).is_empty

    def all_before(n: int) -> bool:
        g = family.generator(n)
        return all(sigma * _det2(g, p) < 0 for p in region.vertices)

    def all_beyond(n: int) -> bool:
        g = family.generator(n)
        return all(sigma * _det2(g, p) > 0 for p in region.vertices)

    found = []
    n = 0
    for _ in range(max_steps):
        if meets(n):
            found.append(n)
        if all_before(n):
            break
        n += 1
    else:
        raise AccumulationLocusError("chamber enumeration did not terminate")
    n = -1
    for _ in range(max_steps):
        if all_beyond(n):
            break
        if meets(n):
            found.append(n)
        n -= 1
    else:
        raise AccumulationLocusError("chamber enumeration did not terminate")
    return sorted(found)


def family_model_graph(family: FamilyDescriptor, n_min: int, n_max: int) -> ModelGraph:
    """Declared models M{n}, n in [n_min, n_max], whose nef cones are the chambers."""
    from .mmp import AbstractModel

    models = []
    for n in range(n_min, n_max + 1):
        a, b = family.generator(n - 1), family.generator(n)
        s = 1 if _det2(a, b) > 0 else -1
        models.append(AbstractModel(f"M{n}", (
            (f"l{n - 1}", (-s * a[1], s * a[0])),
            (f"l{n}", (s * b[1], -s * b[0])),
        )))
    flops = [(f"M{n}", f"M{n + 1}", f"l{n}") for n in range(n_min, n_max)]
    return ModelGraph(
        basis_names=("x", "y"),
        canonical_class=(0, 0),
        boundary_generators=(("x", (1, 0)), ("y", (0, 1))),
        boundary_offset=(0, 0),
        psef_cone=Cone(2, halfspaces=family.psef_halfspaces),
        models=tuple(models),
        flops=tuple(flops),
    )


def q_point(*xs) -> QVector:
    return tuple(q(x) for x in xs)
