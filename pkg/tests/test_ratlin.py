from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmpcones.ratlin import (
    SingularMatrixError,
    determinant,
    is_negative_definite,
    kernel_basis,
    lp_minimize,
    matvec,
    primitive,
    q,
    qstr,
    rank,
    solve_linear,
)

small = st.integers(min_value=-4, max_value=4)


def test_parse_rationals():
    assert q("3/4") == F(3, 4)
    assert q("-2") == -2
    assert qstr(F(-6, 4)) == "-3/2"
    with pytest.raises(ValueError, match="zero denominator"):
        q("1/0")
    with pytest.raises(ValueError, match="malformed"):
        q("0.5")


def test_singular_solve_carries_kernel():
    a = ((1, 2), (2, 4))
    with pytest.raises(SingularMatrixError) as info:
        solve_linear(a, (1, 2))
    k = info.value.kernel
    assert any(k) and all(x == 0 for x in matvec(a, k))


def test_negative_definite():
    assert is_negative_definite(((-2, 1), (1, -2)))
    assert not is_negative_definite(((-1, 1), (1, -1)))
    assert not is_negative_definite(((-1, 2), (2, -1)))
    with pytest.raises(ValueError):
        is_negative_definite(((-1, 1), (0, -1)))


def test_primitive():
    assert primitive((F(1, 2), F(-3, 4))) == (2, -3)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_kernel_is_annihilated(rows):
    ker = kernel_basis(rows, 3)
    assert len(ker) == 3 - rank(rows)
    for v in ker:
        assert all(x == 0 for x in matvec(rows, v))


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3))
def test_solve_matches_determinant(a, b):
    if determinant(a) == 0:
        with pytest.raises(SingularMatrixError):
            solve_linear(a, b)
    else:
        x = solve_linear(a, b)
        assert matvec(a, x) == tuple(F(v) for v in b)


@settings(max_examples=60)
@given(
    st.lists(st.integers(0, 3), min_size=3, max_size=3),
    st.lists(st.lists(st.integers(0, 3), min_size=3, max_size=3), min_size=2, max_size=2),
    st.lists(st.integers(0, 6), min_size=2, max_size=2),
)
def test_lp_matches_enumeration(c, a, b):
    """Bland simplex against brute force over a box that contains every feasible integer point.

    With integer data and a 2-row system, an optimal vertex need not be
    integral, so the brute force is only used as an upper bound plus an
    exact feasibility witness.
    """
    res = lp_minimize(c, a, b)
    feasible_ints = [
        x for x in product(range(7), repeat=3)
        if all(sum(r[i] * x[i] for i in range(3)) == bi for r, bi in zip(a, b))
    ]
    if res.status == "optimal":
        assert all(v >= 0 for v in res.x)
        assert matvec(a, res.x) == tuple(F(v) for v in b)
        assert res.value == sum(ci * xi for ci, xi in zip(c, res.x))
        for x in feasible_ints:
            assert res.value <= sum(ci * xi for ci, xi in zip(c, x))
    else:
        assert res.status == "infeasible"
        assert not feasible_ints
