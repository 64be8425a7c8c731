import random
from dataclasses import replace
from fractions import Fraction as F

import pytest

import _support as sup
from mmpcones import gallery
from mmpcones.errors import NotContractibleError, PreconditionError
from mmpcones.mmp import (
    MINIMAL,
    MORI_FIBER,
    TIE_STOP,
    canonical_model,
    check_exceptional_equals_fixed,
    compare_minimal_models,
    contract,
    reachable_models,
    root_model,
    run_scaling_mmp,
    verify_minimal_model,
)
from mmpcones.ratlin import dot, matvec, transpose


@pytest.fixture(scope="module")
def ex1():
    X = gallery.example1().payload
    return X, root_model(X)


def test_contract_discrepancies(ex1):
    X, root = ex1
    m = contract(root, "C0", (F(1, 4),))
    assert m.chain[-1].discrepancy == F(5, 4)
    assert m.rho == 1 and [c.name for c in m.surface.curves] == ["C1"]
    blow = root_model(sup.one_exceptional())
    assert contract(blow, "E", ()).chain[-1].discrepancy == 1
    with pytest.raises(NotContractibleError, match="not contractible"):
        contract(blow, "L", ())


def test_scaling_run_example1(ex1):
    X, root = ex1
    assert [dot(X.scaling_class, X.curve(n).curve_class) for n in ("C0", "C1")] == [1, 1]
    run = run_scaling_mmp(root, (F(1, 4),), X.scaling_class)
    assert run.thresholds == [F(5, 4)] and run.walls[0].curves == ("C0",)
    assert run.outcome == MORI_FIBER and run.model.id == "root/-C0" and run.stop_curves == ("C1",)
    tie = run_scaling_mmp(root, (F(1, 2),), X.scaling_class)
    assert tie.outcome == TIE_STOP and tie.model.id == "root" and tie.stop_threshold == 1
    assert tie.stop_curves == ("C0", "C1")
    other = run_scaling_mmp(root, (F(3, 4),), X.scaling_class)
    assert other.model.id == "root/-C1"
    with pytest.raises(PreconditionError, match="not ample"):
        run_scaling_mmp(root, (0,), (1, 0))


def test_scaling_run_already_nef():
    fx = gallery.get("one_curve")
    X = fx.payload
    root = root_model(X)
    # below the wall at 1/3 nothing is contracted
    run = run_scaling_mmp(root, (F(1, 6),), X.scaling_class)
    assert run.outcome == MINIMAL and run.walls == () and run.model is root
    assert verify_minimal_model(root, root, (F(1, 6),))
    beyond = run_scaling_mmp(root, (F(1, 2),), X.scaling_class)
    assert beyond.contracted == ("E1",) and beyond.walls[0].discrepancies == (F(1, 6),)


def test_verify_reports(ex1):
    X, root = ex1
    b = (F(1, 4),)
    m0 = contract(root, "C0", b)
    v = verify_minimal_model(root, m0, b)
    assert not v and v.report == ("not nef: C1 (fiber class)",)
    # pushed K+B on X0 against the fiber class
    pushed = m0.log_class(b)
    assert dot(pushed, m0.surface.curve("C1").curve_class) < 0
    g = gallery.example2().payload
    assert verify_minimal_model(None, g.node("X-"), (F(1, 4),))
    assert not verify_minimal_model(None, g.node("X+"), (F(1, 4),))


def test_compare_minimal_models_example2():
    g = gallery.example2().payload
    lo, hi = g.node("X-"), g.node("X+")
    assert compare_minimal_models(None, lo, hi, (F(1, 2),))
    assert compare_minimal_models(None, lo, lo, (F(1, 4),))
    with pytest.raises(PreconditionError, match="X\\+ is not a minimal model"):
        compare_minimal_models(None, lo, hi, (F(1, 4),))


def test_canonical_models():
    g = gallery.example2().payload
    half = (F(1, 2),)
    assert canonical_model(g.node("X-"), half) == canonical_model(g.node("X+"), half)
    assert canonical_model(g.node("X-"), half).trivial_curves
    assert canonical_model(g.node("X-"), (F(1, 4),)).classification == "identity"
    X = gallery.get("one_curve").payload
    root = root_model(X)
    on_wall = run_scaling_mmp(root, (F(1, 3),), X.scaling_class)
    cid = canonical_model(on_wall.model, (F(1, 3),))
    assert cid.trivial_curves and cid.classification != "identity"
    ex = gallery.example1().payload
    with pytest.raises(PreconditionError, match="not nef"):
        canonical_model(contract(root_model(ex), "C0", (0,)), (0,))


def test_lemma_two_curve_chain():
    fx = gallery.get("two_curve_chain")
    X = fx.payload
    root = root_model(X)
    seen = set()
    for b in sup.grid_points(fx.space.polytope, 6):
        run = run_scaling_mmp(root, b, X.scaling_class)
        if run.outcome == MINIMAL:
            assert check_exceptional_equals_fixed(root, b, run)
            seen.add(frozenset(run.contracted))
    assert len(seen) >= 2


def test_lemma_detects_mismatch():
    for fx in gallery.generated_fixtures(12):
        X = fx.payload
        root = root_model(X)
        run = run_scaling_mmp(root, (), X.scaling_class)
        if run.outcome != MINIMAL or not run.contracted:
            continue
        # pretend nothing was contracted: the check must notice
        fake = replace(run, walls=(), model=root)
        assert check_exceptional_equals_fixed(root, (), run)
        assert not check_exceptional_equals_fixed(root, (), fake)
        return
    pytest.fail("no generated fixture contracts anything")


def _all_models():
    names = ("example1", "one_curve", "f1", "two_curve_chain")
    for X in [gallery.get(n).payload for n in names] + [fx.payload for fx in gallery.generated_fixtures(8)]:
        yield from reachable_models(root_model(X))


def test_pairing_preserved_by_contractions():
    rng = random.Random(7)
    for m in _all_models():
        if not m.chain:
            continue
        step = m.chain[-1]
        src = root_model(m.root_surface)
        for prev in step.source.split("/-")[1:]:
            src = contract(src, prev)
        e = src.surface.curve(step.contracted_curve)
        assert all(x == 0 for x in matvec(step.projection, e.divisor_class))
        incl = transpose(step.basis)
        for _ in range(4):
            y = tuple(F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(m.rho))
            up = matvec(incl, y)
            assert dot(up, e.curve_class) == 0
            assert matvec(step.projection, up) == y
            for c in m.surface.curves:
                assert dot(y, c.curve_class) == dot(up, src.surface.curve(c.name).curve_class)


def test_contracted_discrepancies_positive_and_runs_agree():
    for name, X, b in sup.zariski_suite():
        root = root_model(X)
        A = X.scaling_class
        A2 = next(
            (c for g in X.nef_cone.all_generators if X.is_ample(c := tuple(a + x / 5 for a, x in zip(A, g))) and c != A),
            tuple(2 * a for a in A),
        )
        runs = [run_scaling_mmp(root, b, H) for H in (A, A2)]
        for run in runs:
            assert all(a > 0 for w in run.walls for a in w.discrepancies), name
        if all(r.outcome == MINIMAL for r in runs):
            assert compare_minimal_models(root, runs[0].model, runs[1].model, b), name
