from fractions import Fraction as F

import pytest

from mmpcones import gallery
from mmpcones.chambers import chambers_meeting, decompose_minimal, flop_path
from mmpcones.polyhedra import OUTSIDE, Cone, Polytope, convex_hull, membership
from mmpcones.ratlin import dot, is_negative_definite


def _blowup_numbers():
    """Intersection numbers on a ruled surface blown up at one point.

    Lattice (f, E): fiber and exceptional curve, f^2 = 0, f.E = 0, E^2 = -1.
    Adjunction on a rational fiber gives K.f = -2, and K.E = -1.  The fiber
    through the point splits into C0 = f - E and C1 = E.
    """
    form = ((0, 0), (0, -1))
    k = (-2, -1)
    c0, c1 = (1, -1), (0, 1)

    def meet(x, y):
        return sum(x[i] * form[i][j] * y[j] for i in range(2) for j in range(2))

    def k_dot(x):
        return sum(a * b for a, b in zip(k, x))

    curves = (c0, c1)
    return [[meet(x, y) for y in curves] for x in curves], [k_dot(x) for x in curves]


def test_example1_lattice_matches_blowup_oracle():
    X = gallery.example1().payload
    gram, kdots = _blowup_numbers()
    curves = [X.curve("C0"), X.curve("C1")]
    assert [[dot(a.divisor_class, b.curve_class) for b in curves] for a in curves] == gram
    assert [dot(X.canonical_class, c.curve_class) for c in curves] == kdots
    fiber = tuple(a + b for a, b in zip(*(c.curve_class for c in curves)))
    assert dot(X.canonical_class, fiber) == -2
    # the boundary line is 1/2 C0 + t C1
    assert X.log_class((0,)) == tuple(a + F(1, 2) * c for a, c in zip(X.canonical_class, (1, 0)))


def test_example1_expected_values():
    fx = gallery.example1()
    dec = decompose_minimal(fx.space, fx.payload)
    assert [w.offset / w.normal[0] for w in dec.walls] == list(fx.expected["wall"][0])
    names = [fx.model_names[next(iter(c.minimal))] for c in dec.cells]
    assert names == [m for _, m in fx.expected["subchambers"][0]]
    assert {c.canonical_label for c in dec.cells} == {fx.expected["canonical_label"][0]}


def test_example2_expected_values():
    fx = gallery.example2()
    dec = decompose_minimal(fx.space, fx.payload)
    closures = {m: c.vertices for m, (c, _) in dec.models.items()}
    assert closures == fx.expected["minimal_closures"][0]
    path = flop_path(fx.payload, "X-", "X+", (F(1, 2),))
    assert len(path) == fx.expected["flop_path_length"][0]


def test_example3_expected_values():
    fx = gallery.example3()
    fam = fx.payload
    assert fam.generator(4) == (5, -4) == fx.expected["r4"][0]
    box = convex_hull([(1, F(-1, 2)), (2, F(-1, 2)), (1, F(1, 2)), (2, F(1, 2))])
    assert tuple(chambers_meeting(fam, box)) == fx.expected["box_chambers"][0]
    assert tuple(chambers_meeting(fam, Polytope(2, ((1, 1),)))) == fx.expected["point_chambers"][0]
    psef = Cone(2, halfspaces=fam.psef_halfspaces)
    assert membership(psef, fx.expected["outside"][0]) == OUTSIDE
    assert fam.chamber_cone(0) == Cone(2, generators=((0, 1), (1, 0)))
    # the trapezoid meets exactly the truncated chambers
    assert chambers_meeting(fam, fx.space.polytope) == list(range(-3, 4))


def test_example4_expected_values():
    fx = gallery.example4()
    fam = fx.payload
    assert fam.generator(2) == (3, -2, 9) == fx.expected["C2"][0]
    assert fam.fixed_points[0] == fx.expected["A"][0]
    for n in range(-8, 9):
        assert fam.generator(n)[2] == F(3, 2) * n * (n + 1)


@pytest.mark.parametrize("bound", [2, 5, 8])
def test_example4_projection_commutes(bound):
    fam = gallery.example4_family()
    pts = gallery.example4_points(bound)
    hull = convex_hull(pts)
    assert convex_hull([fam.project(v) for v in hull.vertices]) == convex_hull([fam.project(p) for p in pts])
    rep = gallery.example4_report(bound)
    assert all(rep["lp_vertices"]) and rep["projection_matches_rays"]


def test_generated_fixtures_are_deterministic_and_negative_definite():
    a = gallery.generated_fixtures(6)
    b = gallery.generated_fixtures(6)
    assert [fx.payload for fx in a] == [fx.payload for fx in b]
    for fx in a:
        X = fx.payload
        neg = [c for c in X.curves if c.self_intersection < 0]
        gram = [[dot(x.divisor_class, y.curve_class) for y in neg] for x in neg]
        assert is_negative_definite(gram)
        assert X.is_ample(X.scaling_class)


def test_registry():
    assert {"example1", "example2", "example3", "example4", "corrupted"} <= set(gallery.GALLERY)
    with pytest.raises(KeyError):
        gallery.get("nope")
