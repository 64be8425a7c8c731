"""Worked examples and auxiliary fixtures.

Each fixture carries its payload (surface data, an abstract model graph or
an infinite family), the boundary polytope to decompose, and expected
outputs tagged with where they come from: ``literal`` values are stated
numbers from the worked examples, ``derived`` values come from an
independent computation named in the tag.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .chambers import SCALING, BoundarySpace, FamilyDescriptor, family_model_graph
from .mmp import AbstractModel, ModelGraph
from .polyhedra import Cone, Polytope, convex_hull, is_extreme_point_lp
from .ratlin import is_negative_definite, qstr, solve_linear
from .surface import CurveRecord, SurfaceData

F = Fraction


@dataclass
class Fixture:
    name: str
    kind: str  # "surface" | "abstract" | "infinite-family"
    payload: object
    space: BoundarySpace | None = None
    expected: dict = field(default_factory=dict)  # key -> (value, provenance)
    model_names: dict = field(default_factory=dict)
    notes: tuple = ()
    description: str = ""


def example1() -> Fixture:
    """Ruled surface over a curve S blown up at a point of one of two disjoint sections.

    The fiber through the point splits into C0 and C1, two (-1)-curves
    meeting once.  K+B is not pseudo-effective over S anywhere, so the fixture
    decomposes the boundary line in scaling mode.
    """
    X = SurfaceData(
        basis_names=("C0", "S1"),
        curves=(
            CurveRecord("C0", (-1, 0), divisor_class=(1, 0)),
            CurveRecord("C1", (1, 1), divisor_class=(-1, 0)),
        ),
        canonical_class=(1, -2),
        boundary_generators=(("C1", (-1, 0)),),
        boundary_offset=(F(1, 2), 0),
        psef_cone=Cone(2, generators=((1, 0), (-1, 0))),
        base_name="S",
        scaling_class=(-1, 2),
    )
    return Fixture(
        name="example1",
        kind="surface",
        payload=X,
        space=BoundarySpace(Polytope(1, ((0,), (1,))), True, SCALING),
        expected={
            "wall": ((F(1, 2),), "literal: wall at t = 1/2"),
            "subchambers": ((("t<1/2", "X0"), ("t=1/2", "X"), ("t>1/2", "X1")), "literal"),
            "canonical_label": ("base S", "literal"),
            "self_intersections": ((-1, -1), "derived: blow-up formulas"),
        },
        model_names={"root": "X", "root/-C0": "X0", "root/-C1": "X1"},
        notes=("K+B is not pseudo-effective over S anywhere on the segment; cells are labeled by scaling-MMP outcomes",),
        description="ruled surface with two disjoint sections, blown up once",
    )


def example1_sections(b0, b1) -> SurfaceData:
    """Example 1's surface with boundary 2S1 + b0 C0 + b1 C1.

    The two sections make K+B numerically a multiple of C0 over S, so it is
    pseudo-effective and the run ends at a minimal model.
    """
    X = example1().payload
    return SurfaceData(
        basis_names=X.basis_names,
        curves=X.curves,
        canonical_class=X.canonical_class,
        boundary_offset=(F(b0) - F(b1), 2),
        psef_cone=X.psef_cone,
        base_name=X.base_name,
        scaling_class=X.scaling_class,
    )


def example2() -> Fixture:
    """A flop between two Calabi-Yau threefolds, seen through its nef cones.

    The boundary is B_t = (1-t)H- + tH+ with t in [0,1].  The flopping
    curve l is positive on H- and negative on H+ on X- (and the reverse on
    X+); m- and m+ are further curves bounding each nef cone away from the
    segment.
    """
    G = ModelGraph(
        basis_names=("H-", "H+"),
        canonical_class=(0, 0),
        boundary_generators=(("t", (-1, 1)),),
        boundary_offset=(1, 0),
        psef_cone=Cone(2, halfspaces=((1, 2), (2, 1))),
        models=(
            AbstractModel("X-", (("l", (1, -1)), ("m-", (1, 2)))),
            AbstractModel("X+", (("l", (-1, 1)), ("m+", (2, 1)))),
        ),
        flops=(("X-", "X+", "l"),),
    )
    return Fixture(
        name="example2",
        kind="abstract",
        payload=G,
        space=BoundarySpace(Polytope(1, ((0,), (1,)))),
        expected={
            "canonical_cells": ((("[0,1/2)"), ("{1/2}"), ("(1/2,1]")), "literal"),
            "minimal_closures": ({"X-": ((0,), (F(1, 2),)), "X+": ((F(1, 2),), (1,))}, "literal"),
            "flop_path_length": (1, "literal"),
        },
        description="flop of a Calabi-Yau threefold",
    )


EXAMPLE3_TRAPEZOID = ((F(-5, 2), F(7, 2)), (F(7, 2), F(-5, 2)), (-5, 7), (7, -5))


def example3_family() -> FamilyDescriptor:
    return FamilyDescriptor(
        formula=((1, 1), (0, -1)),
        accumulation_rays=((1, -1), (-1, 1)),
        psef_halfspaces=((1, 1),),
        notes=("boundary points (1,-1) and (-1,1) of the pseudo-effective cone are not effective",),
    )


def example3() -> Fixture:
    """Chambers of the pseudo-effective cone of a versal deformation of an I2 fiber.

    Rays r_n = (n+1, -n) cut the half plane x+y >= 0 into infinitely many
    chambers accumulating at (1,-1) and (-1,1).  The truncated graph keeps
    chambers -3..3 and the polytope is a trapezoid that meets exactly them.
    """
    fam = example3_family()
    return Fixture(
        name="example3",
        kind="infinite-family",
        payload=fam,
        space=BoundarySpace(convex_hull(EXAMPLE3_TRAPEZOID)),
        expected={
            "r4": ((5, -4), "literal: formula at n = 4"),
            "box_chambers": ((0, 1, 2), "derived: brute force over n in [-50,50]"),
            "point_chambers": ((0,), "derived: determinant signs"),
            "outside": ((1, -2), "derived: 1 - 2 < 0"),
        },
        notes=fam.notes,
        description="versal deformation of a singular fiber of type I2",
    )


def example3_graph(n_min: int = -3, n_max: int = 3) -> ModelGraph:
    return family_model_graph(example3_family(), n_min, n_max)


def example4_family() -> FamilyDescriptor:
    return FamilyDescriptor(
        formula=((1, 1), (0, -1), (0, F(3, 2), F(3, 2))),
        fixed_points=((0, 0, 1),),
        projection=((1, 0, 0), (0, 1, 0)),
    )


def example4() -> Fixture:
    """Effective cone of a generic (2,2,3) hypersurface, as a slice polytope.

    The slice has vertices A = (0,0,1) and C_n = (n+1, -n, 3/2 n(n+1));
    forgetting the last coordinate recovers the rays of the previous example.
    """
    fam = example4_family()
    return Fixture(
        name="example4",
        kind="infinite-family",
        payload=fam,
        expected={
            "C2": ((3, -2, 9), "literal: formula at n = 2"),
            "A": ((0, 0, 1), "literal"),
            "truncation": (8, "suite parameter"),
        },
        description="generic hypersurface of degrees (2,2,3)",
    )


def example4_points(bound: int = 8) -> list:
    fam = example4_family()
    return [fam.fixed_points[0]] + [fam.generator(n) for n in range(-bound, bound + 1)]


def example4_report(bound: int = 8) -> dict:
    """Vertex and projection checks on the truncation |n| <= bound."""
    fam = example4_family()
    pts = example4_points(bound)
    hull = convex_hull(pts)
    lp_vertices = [is_extreme_point_lp(p, pts) for p in pts]
    projected = [fam.project(p) for p in pts]
    rays3 = example3_family()
    return {
        "bound": bound,
        "points": [[qstr(x) for x in p] for p in pts],
        "lp_vertices": lp_vertices,
        "hull_vertices": [p in hull.vertices for p in pts],
        "projection": [[qstr(x) for x in p] for p in projected],
        "projection_matches_rays": projected[0] == (0, 0) and all(
            projected[i + 1] == rays3.generator(n) for i, n in enumerate(range(-bound, bound + 1))
        ),
    }


# -- auxiliary fixtures ------------------------------------------------------


def one_curve() -> Fixture:
    """A single (-3)-curve E next to a line, with boundary bE for b in [0,1].

    K.E = 1, so (K + bE).E = 1 - 3b and E is contracted exactly when b > 1/3.
    """
    X = _negative_graph_surface(((-3,),), (F(0),), generators=(("E1", (0, 1)),))
    return Fixture("one_curve", "surface", X, BoundarySpace(Polytope(1, ((0,), (1,)))),
                   expected={"wall": ((F(1, 3),), "derived: 1 - 3b = 0")},
                   description="one (-3)-curve")


def f1_ruled() -> Fixture:
    """The Hirzebruch surface F1 with boundary 3h + xL + yh.

    Basis h (pulled-back line), e (exceptional).  E.E = -1 and L = h - e
    is the ruling, which has square 0 and ends runs as a Mori fiber space.
    """
    X = SurfaceData(
        basis_names=("h", "e"),
        curves=(
            CurveRecord("E", (0, -1), divisor_class=(0, 1)),
            CurveRecord("L", (1, 1), divisor_class=(1, -1)),
        ),
        canonical_class=(-3, 1),
        boundary_generators=(("L", (1, -1)), ("h", (1, 0))),
        boundary_offset=(3, 0),
        psef_cone=Cone(2, generators=((0, 1), (1, -1))),
        scaling_class=(2, -1),
    )
    space = BoundarySpace(Polytope(2, ((0, 0), (0, 1), (1, 0), (1, 1))))
    return Fixture("f1", "surface", X, space, description="F1 with a two-parameter boundary")


def two_curve_chain() -> Fixture:
    """A (-2)-curve and a (-3)-curve meeting once, boundary b1 E1 + b2 E2."""
    X = _negative_graph_surface(((-2, 1), (1, -3)), (F(0),) * 2,
                                generators=(("E1", (0, 1, 0)), ("E2", (0, 0, 1))))
    space = BoundarySpace(Polytope(2, ((0, 0), (0, 1), (1, 0), (1, 1))))
    return Fixture("two_curve_chain", "surface", X, space,
                   description="chain of a (-2)- and a (-3)-curve")


def corrupted() -> Fixture:
    """Two (-1)-curves meeting twice, so their Gram matrix is indefinite.

    Both are K-negative with equal scaling thresholds.
    """
    X = SurfaceData(
        basis_names=("h", "e1", "e2"),
        curves=(
            CurveRecord("E1", (0, -1, 2), divisor_class=(0, 1, 0)),
            CurveRecord("E2", (0, 2, -1), divisor_class=(0, 0, 1)),
            CurveRecord("L", (1, 0, 0), divisor_class=(1, 0, 0)),
        ),
        canonical_class=(3, -1, -1),
        psef_cone=Cone(3, halfspaces=((1, 0, 0),)),
        scaling_class=(1, 1, 1),
    )
    return Fixture("corrupted", "surface", X, None, description="indefinite Gram matrix")


def _negative_graph_surface(G, b, name_prefix="E", generators=()) -> SurfaceData:
    """Plane blown up so that curves E_i have Gram matrix G, plus a line L.

    Basis h0, e_1..e_k with intersection form diag(1, G).  K is fixed by
    adjunction on each E_i (K.E_i = -2 - E_i^2) and K.L = 3, so K+B is
    positive on L and every scaling run ends at a minimal model.
    """
    k = len(G)
    G = tuple(tuple(F(x) for x in row) for row in G)
    if not is_negative_definite(G):
        raise ValueError("Gram matrix is not negative definite")
    basis = ("h0",) + tuple(f"e{i + 1}" for i in range(k))
    curves = []
    for i in range(k):
        div = tuple(F(int(j == i + 1)) for j in range(k + 1))
        cls = (F(0),) + G[i]
        curves.append(CurveRecord(f"{name_prefix}{i + 1}", cls, divisor_class=div))
    curves.append(CurveRecord("L", (1,) + (0,) * k, divisor_class=(1,) + (0,) * k))
    rhs = [-2 - G[i][i] for i in range(k)]
    kcoef = solve_linear(G, rhs)
    K = (F(3),) + tuple(kcoef)
    hcoef = solve_linear(G, [F(1)] * k)
    H = (F(1),) + tuple(hcoef)
    gens = [c.divisor_class for c in curves]
    nef = Cone(k + 1, halfspaces=tuple(c.curve_class for c in curves))
    psef = Cone(k + 1, generators=tuple(gens) + tuple(nef.all_generators))
    return SurfaceData(
        basis_names=basis,
        curves=tuple(curves),
        canonical_class=K,
        boundary_generators=generators,
        boundary_offset=(F(0),) + tuple(b),
        psef_cone=psef,
        scaling_class=H,
    )


def _random_graph(rng: random.Random, k: int, shape: str):
    while True:
        G = [[0] * k for _ in range(k)]
        for i in range(k):
            G[i][i] = rng.choice((-1, -2, -3))
        if shape == "chain":
            edges = [(i, i + 1) for i in range(k - 1)]
        else:
            edges = [(0, i) for i in range(1, k)]
        for i, j in edges:
            G[i][j] = G[j][i] = 1
        Gq = tuple(tuple(F(x) for x in row) for row in G)
        if is_negative_definite(Gq):
            return Gq


def generated_fixtures(count: int = 24, seed: int = 20231) -> list[Fixture]:
    """Chains and stars of negative curves with random rational boundaries."""
    rng = random.Random(seed)
    out = []
    for idx in range(count):
        k = rng.randint(1, 4)
        shape = "chain" if idx % 2 == 0 else "star"
        G = _random_graph(rng, k, shape)
        b = tuple(F(rng.randint(0, 12), 12) for _ in range(k))
        X = _negative_graph_surface(G, b)
        out.append(Fixture(f"generated_{idx:02d}", "surface", X, None,
                           expected={"gram": (G, "generated"), "boundary": (b, "generated")},
                           description=f"{shape} of {k} negative curves"))
    return out


GALLERY = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "example4": example4,
    "one_curve": one_curve,
    "corrupted": corrupted,
    "f1": f1_ruled,
    "two_curve_chain": two_curve_chain,
}


def get(name: str) -> Fixture:
    try:
        return GALLERY[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(GALLERY))}") from None
