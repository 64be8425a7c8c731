"""Shared oracles and sampling helpers for the test suites."""

import random
from fractions import Fraction as F

from mmpcones import gallery
from mmpcones.chambers import decompose_minimal, label_point
from mmpcones.polyhedra import Cone, Polytope
from mmpcones.surface import CurveRecord, SurfaceData


def grid_points(poly: Polytope, n: int) -> list:
    """Rational points of ``poly`` on a barycentric grid of resolution ``n``.

    One-dimensional: n+1 evenly spaced points.  Two-dimensional: the
    polygon is fanned into triangles from its first vertex (in angular
    order) and each triangle gets the points (i a + j b + k c) / n.
    """
    verts = list(poly.vertices)
    if poly.dim == 1:
        lo, hi = verts[0][0], verts[-1][0]
        return [(lo + (hi - lo) * F(i, n),) for i in range(n + 1)]
    if len(verts) == 1:
        return verts
    if len(verts) == 2:
        a, b = verts
        return [tuple(x + (y - x) * F(i, n) for x, y in zip(a, b)) for i in range(n + 1)]
    ordered = _angular(verts)
    pts = set()
    a = ordered[0]
    for b, c in zip(ordered[1:], ordered[2:]):
        for i in range(n + 1):
            for j in range(n + 1 - i):
                k = n - i - j
                pts.add(tuple((i * x + j * y + k * z) / n for x, y, z in zip(a, b, c)))
    return sorted(pts)


def _angular(verts):
    cx = sum(v[0] for v in verts) / len(verts)
    cy = sum(v[1] for v in verts) / len(verts)
    import math

    return sorted(verts, key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))


def relint_samples(closure: Polytope, count: int, rng: random.Random) -> list:
    """Random rational convex combinations with all weights positive."""
    out = []
    vs = closure.vertices
    for _ in range(count):
        w = [F(rng.randint(1, 50)) for _ in vs]
        s = sum(w)
        out.append(tuple(sum(wi * v[d] for wi, v in zip(w, vs)) / s for d in range(closure.dim)))
    return out


def ray_meets_segment(r, p, q) -> bool:
    """Exact test: does the closed ray {s r : s >= 0} meet the segment [p, q]?"""
    d = (q[0] - p[0], q[1] - p[1])
    det = r[0] * (-d[1]) + d[0] * r[1]
    if det == 0:
        # parallel: meet only if collinear with the ray and overlapping it
        if r[0] * p[1] - r[1] * p[0] != 0:
            return False
        return any(r[0] * x[0] + r[1] * x[1] >= 0 for x in (p, q))
    # s r - u d = p
    s = (p[0] * (-d[1]) + d[0] * p[1]) / det
    u = (r[0] * p[1] - r[1] * p[0]) / det
    return s >= 0 and 0 <= u <= 1


def point_in_cone2(a, b, x) -> bool:
    """x in cone<a, b> for a, b spanning less than a half plane."""
    det = a[0] * b[1] - a[1] * b[0]
    s = 1 if det > 0 else -1
    return s * (a[0] * x[1] - a[1] * x[0]) >= 0 and s * (x[0] * b[1] - x[1] * b[0]) >= 0


def brute_force_chambers(poly: Polytope, lo: int = -50, hi: int = 50) -> list:
    """Example 3 chambers meeting a convex polygon, by vertex-in-cone and ray-edge tests."""
    fam = gallery.example3_family()
    verts = list(poly.vertices)
    edges = list(zip(verts, verts[1:] + verts[:1])) if len(verts) > 1 else [(verts[0], verts[0])]
    found = []
    for n in range(lo, hi + 1):
        a, b = fam.generator(n - 1), fam.generator(n)
        if any(point_in_cone2(a, b, v) for v in verts) or any(
            ray_meets_segment(r, p, q) for r in (a, b) for p, q in edges
        ):
            found.append(n)
    return found


def zariski_suite():
    """(name, surface, boundary) triples whose scaling runs end at minimal models."""
    out = []
    rng = random.Random(7)
    for k in range(6):
        b0, b1 = F(rng.randint(0, 8), 8), F(rng.randint(0, 8), 8)
        out.append((f"example1_sections_{k}", gallery.example1_sections(b0, b1), ()))
    for fx in gallery.generated_fixtures():
        out.append((fx.name, fx.payload, ()))
    return out


def decomposition_fixtures():
    """(name, space, model data) for every fixture with a non-empty V."""
    out = []
    for name in ("example2", "one_curve", "f1", "two_curve_chain"):
        fx = gallery.get(name)
        out.append((name, fx.space, fx.payload))
    fx = gallery.example3()
    out.append(("example3", fx.space, gallery.example3_graph()))
    return out


def check_grid_cover(space, X, dec, n):
    """Every grid point lies in exactly one cell, whose label matches a fresh pipeline run."""
    pts = grid_points(dec.region, n)
    bad = []
    for p in pts:
        hits = [c for c in dec.cells if c.contains(p)]
        if len(hits) != 1:
            bad.append((p, len(hits)))
            continue
        lab = label_point(space, X, p)
        if (lab.canonical, lab.minimal) != (hits[0].canonical, hits[0].minimal):
            bad.append((p, "label"))
    return len(pts), bad


def decompose(name):
    for n, space, X in decomposition_fixtures():
        if n == name:
            return space, X, decompose_minimal(space, X)
    raise KeyError(name)


def one_exceptional(**kw):
    """Blow-up of the plane at a point: E.E = -1, L a line through the point."""
    return SurfaceData(
        basis_names=("h", "e"),
        curves=(
            CurveRecord("E", (0, -1), divisor_class=(0, 1)),
            CurveRecord("L", (1, 1), divisor_class=(1, -1)),
        ),
        canonical_class=(-3, 1),
        psef_cone=Cone(2, generators=((0, 1), (1, -1))),
        **kw,
    )
