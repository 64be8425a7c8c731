import random
from fractions import Fraction as F

import pytest

import _support as sup
from mmpcones import gallery
from mmpcones.errors import (
    IncompleteCurveDataError,
    InconsistentSurfaceDataError,
    NotPseudoEffectiveError,
    ValidationError,
)
from mmpcones.polyhedra import Cone
from mmpcones.ratlin import add, dot, is_negative_definite, lincomb, rank
from mmpcones.surface import (
    CurveRecord,
    SurfaceData,
    is_nef,
    nfp_oracle,
    numerically_fixed_support,
    pair,
    zariski_decompose,
)


def test_pairings_on_example1():
    X = gallery.example1().payload
    c0 = X.curve("C0")
    assert pair(c0.divisor_class, c0.curve_class) == -1
    assert pair(X.canonical_class, c0.curve_class) == -1
    assert pair((0, 0), c0.curve_class) == 0
    with pytest.raises(ValueError):
        pair((1, 0, 0), c0.curve_class)


def test_zariski_examples():
    X = sup.one_exceptional()
    z = zariski_decompose(X, (0, 1))
    assert z.positive == (0, 0) and z.negative == (("E", 1),)
    ample = (2, -1)
    assert zariski_decompose(X, ample).negative == ()
    ex1 = gallery.example1().payload
    z1 = zariski_decompose(ex1, (1, 0))  # 2 C0 + C1
    assert z1.positive == (0, 0) and z1.negative == (("C0", 1),)
    assert z1.to_json() == {"P": ["0", "0"], "N": [{"curve": "C0", "coeff": "1"}]}


def test_zariski_refusals():
    X = sup.one_exceptional()
    with pytest.raises(NotPseudoEffectiveError, match="not pseudo-effective"):
        zariski_decompose(X, (-1, 0))
    bad = gallery.corrupted().payload
    with pytest.raises(InconsistentSurfaceDataError, match="inconsistent surface data"):
        zariski_decompose(bad, bad.canonical_class)
    # a square-zero curve in a candidate support is named
    Y = SurfaceData(
        basis_names=("a", "b"),
        curves=(CurveRecord("F", (0, 1), divisor_class=(1, 0)), CurveRecord("G", (1, 0), divisor_class=(0, 1))),
        canonical_class=(0, 0),
        psef_cone=Cone(2, halfspaces=()),
    )
    with pytest.raises(InconsistentSurfaceDataError, match="curve F"):
        zariski_decompose(Y, (0, -1))


def test_fixed_support_and_nef():
    X = sup.one_exceptional()
    assert numerically_fixed_support(X, (2, -1)) == frozenset()
    assert numerically_fixed_support(X, (0, 1)) == {"E"}
    with pytest.raises(NotPseudoEffectiveError):
        numerically_fixed_support(X, (-1, -1))
    assert is_nef(X, (0, 0)) and is_nef(X, (2, -1))
    ex1 = gallery.example1().payload
    for t in (0, F(1, 3), 1):
        D = ex1.log_class((t,))
        assert dot(D, ex1.curve("C1").curve_class) == -F(1, 2) - t
        assert not is_nef(ex1, D)
    with pytest.raises(IncompleteCurveDataError, match="incomplete curve data"):
        is_nef(sup.one_exceptional(nef_check_complete=False), (1, 0))


def test_validation_collects_everything():
    with pytest.raises(ValidationError) as info:
        SurfaceData(
            basis_names=("a", "b"),
            curves=(
                CurveRecord("A", (-1, 1), divisor_class=(1, 0), self_intersection=-2),
                CurveRecord("B", (2, -1), divisor_class=(0, 1)),
            ),
            canonical_class=(0, 0, 0),
        )
    errs = info.value.errors
    assert any("self-intersection of A" in e for e in errs)
    assert any("pairing asymmetry at (A,B)" in e for e in errs)
    assert any("canonical class" in e for e in errs)


def _check_invariants(X, D, z):
    names = [n for n, _ in z.negative]
    recon = add(z.positive, lincomb([a for _, a in z.negative], [X.curve(n).divisor_class for n in names], X.rho))
    assert recon == tuple(D)
    assert all(a > 0 for _, a in z.negative)
    for c in X.curves:
        v = dot(z.positive, c.curve_class)
        assert v >= 0
        if c.name in names:
            assert v == 0
    if names:
        gram = [[dot(X.curve(a).divisor_class, X.curve(b).curve_class) for b in names] for a in names]
        assert is_negative_definite(gram)
        assert rank([X.curve(n).divisor_class for n in names]) == len(names)


def test_zariski_invariants_on_suite():
    for name, X, b in sup.zariski_suite():
        D = X.log_class(b)
        z = zariski_decompose(X, D)
        _check_invariants(X, D, z)
        # support grows strictly across Fujita rounds
        sizes = [len(r) for r in z.rounds]
        assert sizes == sorted(set(sizes))


def test_zariski_independent_of_curve_order():
    rng = random.Random(3)
    for fx in gallery.generated_fixtures(8):
        X = fx.payload
        D = X.log_class(())
        ref = zariski_decompose(X, D)
        for _ in range(10):
            curves = list(X.curves)
            rng.shuffle(curves)
            Y = SurfaceData(X.basis_names, tuple(curves), X.canonical_class, X.boundary_generators,
                            X.boundary_offset, X.psef_cone, scaling_class=X.scaling_class)
            assert zariski_decompose(Y, D) == ref


def test_zariski_on_random_effective_divisors():
    rng = random.Random(5)
    for fx in gallery.generated_fixtures(10):
        X = fx.payload
        for _ in range(5):
            coeffs = [F(rng.randint(0, 6), rng.randint(1, 3)) for _ in X.curves]
            D = lincomb(coeffs, [c.divisor_class for c in X.curves], X.rho)
            _check_invariants(X, D, zariski_decompose(X, D))


def test_nfp_oracle_examples():
    X = sup.one_exceptional()
    A = (2, -1)
    assert nfp_oracle(X, (0, 1), A, [F(1, 10)]) == [{"E": F(9, 10), "L": 0}]
    assert nfp_oracle(X, (2, -1), A, [F(1, 3)]) == [{"E": 0, "L": 0}]
    vals = [v["E"] for v in nfp_oracle(X, (0, 1), A, [F(1, 2), F(1, 4), F(1, 8)])]
    assert vals == [F(1, 2), F(3, 4), F(7, 8)]
    assert nfp_oracle(X, (-5, 0), A, [F(1, 10)]) == [None]
