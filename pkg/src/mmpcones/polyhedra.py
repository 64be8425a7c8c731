"""Exact polyhedral cones and polytopes.

Conversion between generator and inequality descriptions uses the
double description method with the algebraic adjacency test.  All inputs
are small, so nothing here tries to be clever about complexity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .ratlin import (
    QVector,
    add,
    coordinates,
    dot,
    is_zero,
    kernel_basis,
    lp_minimize,
    neg,
    primitive,
    q,
    qstr,
    rank,
    rref,
    scale,
    sub,
    unit,
    vec,
)

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"


class DegenerateApexError(ValueError):
    pass


class ObservationPointError(ValueError):
    pass


def double_description(constraints: Sequence[Sequence], dim: int) -> tuple[list[QVector], list[QVector]]:
    """Generators of ``{x : <a, x> >= 0 for a in constraints}``.

    Returns ``(lineality, rays)``: a basis of the lineality space and the
    extreme rays modulo it, as primitive integer vectors.
    """
    lin: list[QVector] = [unit(dim, i) for i in range(dim)]
    rays: list[QVector] = []
    done: list[QVector] = []
    for a in constraints:
        a = vec(a)
        if len(a) != dim:
            raise ValueError("constraint has the wrong dimension")
        if is_zero(a):
            continue
        vals = [dot(a, l) for l in lin]
        k = next((i for i, v in enumerate(vals) if v != 0), None)
        if k is not None:
            l0, v0 = lin[k], vals[k]
            if v0 < 0:
                l0, v0 = neg(l0), -v0
            lin = [sub(l, scale(vals[i] / v0, l0)) for i, l in enumerate(lin) if i != k]
            rays = [sub(r, scale(dot(a, r) / v0, l0)) for r in rays]
            rays.append(l0)
        else:
            pos = [r for r in rays if dot(a, r) > 0]
            zer = [r for r in rays if dot(a, r) == 0]
            negs = [r for r in rays if dot(a, r) < 0]
            target = dim - len(lin) - 2
            new = pos + zer
            for p in pos:
                zp = {i for i, b in enumerate(done) if dot(b, p) == 0}
                ap = dot(a, p)
                for n in negs:
                    common = [done[i] for i in zp if dot(done[i], n) == 0]
                    if target < 0 or len(common) < target or rank(common) != target:
                        continue
                    new.append(add(scale(ap, n), scale(-dot(a, n), p)))
            rays = new
        done.append(a)
        lin = [primitive(l) for l in lin]
        seen = set()
        uniq = []
        for r in rays:
            r = primitive(r)
            if not is_zero(r) and r not in seen:
                seen.add(r)
                uniq.append(r)
        rays = uniq
    return lin, rays


def _project_off(v: QVector, lin: Sequence[QVector]) -> QVector:
    """Orthogonal projection of ``v`` onto the complement of span(lin)."""
    if not lin:
        return v
    gram = [[dot(a, b) for b in lin] for a in lin]
    rhs = [dot(a, v) for a in lin]
    aug = [row + [r] for row, r in zip(gram, rhs)]
    red, _ = rref(aug)
    coeffs = [row[-1] for row in red]
    out = v
    for c, l in zip(coeffs, lin):
        out = sub(out, scale(c, l))
    return out


@dataclass(frozen=True, eq=False)
class Cone:
    """Closed convex cone in Q^dim given by generators and/or halfspaces.

    A halfspace ``h`` stands for ``<h, x> >= 0``.
    """

    dim: int
    generators: tuple | None = None
    halfspaces: tuple | None = None

    def __post_init__(self):
        if self.generators is None and self.halfspaces is None:
            raise ValueError("a cone needs generators or halfspaces")
        for name in ("generators", "halfspaces"):
            vs = getattr(self, name)
            if vs is not None:
                vs = tuple(vec(v) for v in vs)
                if any(len(v) != self.dim for v in vs):
                    raise ValueError(f"{name} have the wrong dimension")
                object.__setattr__(self, name, vs)

    @cached_property
    def vrep(self) -> tuple[list[QVector], list[QVector]]:
        """(lineality basis, extreme rays)."""
        return double_description(self.hrep_rows, self.dim)

    @cached_property
    def hrep(self) -> tuple[list[QVector], list[QVector]]:
        """(equations, facet inequalities)."""
        if self.generators is not None:
            return double_description(self.generators, self.dim)
        lin, rays = double_description(self.halfspaces, self.dim)
        return double_description(rays + lin + [neg(l) for l in lin], self.dim)

    @property
    def hrep_rows(self) -> list[QVector]:
        if self.generators is None:
            return list(self.halfspaces)
        eqs, ineqs = self.hrep
        return ineqs + eqs + [neg(e) for e in eqs]

    @property
    def all_generators(self) -> list[QVector]:
        lin, rays = self.vrep
        return rays + lin + [neg(l) for l in lin]

    @cached_property
    def key(self) -> tuple:
        """Canonical form: exact equality of cones is equality of keys."""
        lin, rays = self.vrep
        lin_rref = tuple(tuple(row) for row in rref(lin)[0]) if lin else ()
        proj = sorted({primitive(_project_off(r, lin)) for r in rays})
        return (self.dim, lin_rref, tuple(p for p in proj if not is_zero(p)))

    def __eq__(self, other):
        return isinstance(other, Cone) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def linear_dim(self) -> int:
        """Dimension of the linear span."""
        gens = self.all_generators
        return rank(gens) if gens else 0

    def is_full_dimensional(self) -> bool:
        return self.linear_dim == self.dim

    def contains(self, v: Sequence) -> bool:
        return membership(self, v) != OUTSIDE

    def to_json(self) -> dict:
        lin, rays = self.vrep
        gens = rays + lin + [neg(l) for l in lin]
        return {"generators": [[qstr(x) for x in g] for g in gens]}


def dual_cone(c: Cone) -> Cone:
    if c.generators is not None:
        return Cone(c.dim, halfspaces=c.generators)
    return Cone(c.dim, generators=c.halfspaces)


def membership(c: Cone, v: Sequence) -> str:
    v = vec(v)
    if len(v) != c.dim:
        raise ValueError(f"dimension mismatch: cone in Q^{c.dim}, vector of length {len(v)}")
    vals = [dot(h, v) for h in c.hrep_rows]
    if any(x < 0 for x in vals):
        return OUTSIDE
    if all(x > 0 for x in vals):
        return INTERIOR
    return BOUNDARY


def face(c: Cone, functionals: Sequence[Sequence]) -> Cone:
    """The face ``c`` intersected with the kernels of ``functionals``."""
    rows = list(c.hrep_rows)
    for f in functionals:
        rows += [vec(f), neg(vec(f))]
    return Cone(c.dim, halfspaces=tuple(rows))


def cone_sum(dim: int, *cones: Cone) -> Cone:
    gens = []
    for c in cones:
        gens += c.all_generators
    return Cone(dim, generators=tuple(gens))


def linear_image(c: Cone, matrix: Sequence[Sequence]) -> Cone:
    """Image of ``c`` under ``x -> matrix @ x``."""
    gens = [tuple(dot(row, g) for row in matrix) for g in c.all_generators]
    return Cone(len(matrix), generators=tuple(gens))


def visible_boundary(c: Cone, v0: Sequence) -> list[Cone]:
    """Facets of ``c`` visible from the outside point ``v0``.

    A facet with inward normal ``h`` is visible exactly when ``<h, v0> < 0``.
    """
    v0 = vec(v0)
    if not c.is_full_dimensional():
        raise ValueError("visible_boundary needs a full-dimensional cone")
    if membership(c, v0) != OUTSIDE:
        raise ObservationPointError("observation point inside cone")
    _, facets = c.hrep
    return [face(c, [h]) for h in facets if dot(h, v0) < 0]


def segment_exit_parameter(c: Cone, v: Sequence, v0: Sequence) -> Fraction:
    """Largest s in [0, 1] with ``v + s (v0 - v)`` still in ``c`` (``v`` in ``c``)."""
    d = sub(vec(v0), vec(v))
    best = Fraction(1)
    for h in c.hrep_rows:
        hv, hd = dot(h, v), dot(h, d)
        if hd < 0:
            best = min(best, hv / -hd)
    return best


# -- polytopes ---------------------------------------------------------------


@dataclass(frozen=True)
class Halfspace:
    """``<normal, x> >= offset`` (``>`` when strict)."""

    normal: tuple
    offset: Fraction
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "normal", vec(self.normal))
        object.__setattr__(self, "offset", q(self.offset))

    def value(self, x: Sequence) -> Fraction:
        return dot(self.normal, x) - self.offset

    def holds(self, x: Sequence) -> bool:
        v = self.value(x)
        return v > 0 if self.strict else v >= 0

    def flipped(self) -> "Halfspace":
        return Halfspace(neg(self.normal), -self.offset, self.strict)

    def to_json(self) -> dict:
        return {"normal": [qstr(a) for a in self.normal], "offset": qstr(self.offset), "strict": self.strict}


def _homogenize(points: Iterable[Sequence]) -> list[QVector]:
    return [(Fraction(1),) + tuple(p) for p in points]


@dataclass(frozen=True)
class Polytope:
    dim: int
    vertices: tuple = ()

    def __post_init__(self):
        vs = tuple(sorted(set(vec(v) for v in self.vertices)))
        if any(len(v) != self.dim for v in vs):
            raise ValueError("vertex of the wrong dimension")
        object.__setattr__(self, "vertices", vs)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @cached_property
    def _hrep(self) -> tuple[list[QVector], list[QVector]]:
        if self.is_empty:
            raise ValueError("empty polytope has no inequality description")
        return double_description(_homogenize(self.vertices), self.dim + 1)

    @property
    def equations(self) -> list[Halfspace]:
        eqs, _ = self._hrep
        return [Halfspace(e[1:], -e[0]) for e in eqs]

    @property
    def facets(self) -> list[Halfspace]:
        _, ineqs = self._hrep
        return [Halfspace(h[1:], -h[0]) for h in ineqs if not all(h[0] + dot(h[1:], v) == 0 for v in self.vertices)]

    @property
    def affine_dim(self) -> int:
        if self.is_empty:
            return -1
        return rank(_homogenize(self.vertices)) - 1

    def barycenter(self) -> QVector:
        n = len(self.vertices)
        out = self.vertices[0]
        for v in self.vertices[1:]:
            out = add(out, v)
        return scale(Fraction(1, n), out)

    def contains(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        x = vec(x)
        if any(e.value(x) != 0 for e in self.equations):
            return False
        return all(h.value(x) >= 0 for h in self.facets)

    def facet_vertices(self, h: Halfspace) -> list[QVector]:
        return [v for v in self.vertices if h.value(v) == 0]

    def bounding_box(self) -> list[tuple[Fraction, Fraction]]:
        return [(min(v[i] for v in self.vertices), max(v[i] for v in self.vertices)) for i in range(self.dim)]

    def to_json(self) -> dict:
        return {"vertices": [[qstr(x) for x in v] for v in self.vertices]}


def convex_hull(points: Sequence[Sequence]) -> Polytope:
    """Polytope whose vertices are the extreme points of ``points``."""
    pts = sorted(set(vec(p) for p in points))
    if not pts:
        raise ValueError("convex_hull needs at least one point")
    dim = len(pts[0])
    if len(pts) == 1:
        return Polytope(dim, tuple(pts))
    eqs, ineqs = double_description(_homogenize(pts), dim + 1)
    rows = ineqs + eqs
    # A generator of a pointed cone is extreme iff its tight rows have rank d - 1.
    verts = []
    for p in pts:
        hp = (Fraction(1),) + p
        tight = [r for r in rows if dot(r, hp) == 0]
        if tight and rank(tight) == dim:
            verts.append(p)
    return Polytope(dim, tuple(verts))


def empty_polytope(dim: int) -> Polytope:
    return Polytope(dim, ())


def polytope_intersect_halfspaces(
    p: Polytope, hs: Sequence[Halfspace], equalities: Sequence[Halfspace] = ()
) -> Polytope:
    """Closed intersection; strict flags are ignored here."""
    if p.is_empty:
        return p
    eqs, ineqs = p._hrep
    rows = list(ineqs) + list(eqs) + [neg(e) for e in eqs]
    rows.append(unit(p.dim + 1, 0))
    for h in hs:
        rows.append((-h.offset,) + h.normal)
    for h in equalities:
        row = (-h.offset,) + h.normal
        rows += [row, neg(row)]
    lin, rays = double_description(rows, p.dim + 1)
    if lin:
        raise AssertionError("bounded intersection cannot contain a line")
    verts = [tuple(x / r[0] for x in r[1:]) for r in rays if r[0] > 0]
    return Polytope(p.dim, tuple(verts))


def affine_hull_contains(points: Sequence[Sequence], x: Sequence) -> bool:
    pts = [vec(p) for p in points]
    x = vec(x)
    diffs = [sub(p, pts[0]) for p in pts[1:]]
    target = sub(x, pts[0])
    if not diffs:
        return is_zero(target)
    return rank(diffs + [target]) == rank(diffs)


def cone_over_polytope(apex: Sequence, base: Polytope) -> Polytope:
    """Convex hull of the apex and the base, as in the proof's induction step."""
    apex = vec(apex)
    if base.is_empty:
        raise DegenerateApexError("empty base")
    if affine_hull_contains(base.vertices, apex):
        raise DegenerateApexError("apex lies in the affine hull of the base")
    return convex_hull(list(base.vertices) + [apex])


def polytope_contains_polytope(outer: Polytope, inner: Polytope) -> bool:
    return all(outer.contains(v) for v in inner.vertices)


@dataclass(frozen=True)
class CellComplexCell:
    """A relatively open-ish cell: closure minus the zero sets of strict facets."""

    closure: Polytope
    open_facets: tuple = field(default_factory=tuple)

    def contains(self, x: Sequence) -> bool:
        return self.closure.contains(x) and all(h.value(x) > 0 for h in self.open_facets)

    def is_nonempty(self) -> bool:
        return _strict_nonempty(self.closure, self.open_facets)

    def to_json(self) -> dict:
        return {
            "closure": self.closure.to_json(),
            "strict_facets": [
                Halfspace(h.normal, h.offset, True).to_json() for h in self.open_facets
            ],
        }


def _strict_nonempty(closure: Polytope, stricts: Sequence[Halfspace]) -> bool:
    """``closure`` with ``stricts`` (all >= 0 on it) has a point where all are > 0."""
    if closure.is_empty:
        return False
    b = closure.barycenter()
    return all(h.value(b) > 0 for h in stricts)


def cell_meets(closure: Polytope, stricts: Sequence[Halfspace], other: Polytope, other_stricts: Sequence[Halfspace]) -> bool:
    """Whether two cells (closure + strict conditions) intersect."""
    both = polytope_intersect_halfspaces(closure, list(other.facets), other.equations) if not other.is_empty else other
    if both.is_empty:
        return False
    return _strict_nonempty(both, list(stricts) + list(other_stricts))


def coordinates_or_none(basis, v):
    try:
        return coordinates(basis, v)
    except ValueError:
        return None


def orthogonal_complement(vectors: Sequence[Sequence], dim: int) -> list[QVector]:
    return kernel_basis(list(vectors), dim) if vectors else [unit(dim, i) for i in range(dim)]


def is_extreme_point_lp(p: Sequence, others: Sequence[Sequence]) -> bool:
    """``p`` is not a convex combination of ``others`` (exact LP feasibility)."""
    p = vec(p)
    pts = [vec(o) for o in others if vec(o) != p]
    if not pts:
        return True
    a_eq = [[o[i] for o in pts] for i in range(len(p))] + [[Fraction(1)] * len(pts)]
    b_eq = list(p) + [Fraction(1)]
    return lp_minimize([Fraction(0)] * len(pts), a_eq, b_eq).status == "infeasible"
