"""Exact rational scalars, vectors and matrices.

Vectors are tuples of :class:`fractions.Fraction`, matrices are tuples of
row tuples.  Nothing here ever rounds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
QVector = tuple  # tuple[Fraction, ...]
QMatrix = tuple  # tuple[QVector, ...], row-major

_RATIONAL_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


class SingularMatrixError(ArithmeticError):
    """Raised by :func:`solve_linear`; ``kernel`` is a nonzero witness."""

    def __init__(self, kernel: QVector):
        super().__init__("singular matrix")
        self.kernel = kernel


def q(x) -> Fraction:
    """Coerce ``x`` to a Fraction.  Strings must look like ``p`` or ``p/q``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        m = _RATIONAL_RE.match(x)
        if not m:
            raise ValueError(f"malformed rational {x!r}")
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ValueError(f"zero denominator in {x!r}")
        return Fraction(int(m.group(1)), den)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def qstr(x: Fraction) -> str:
    return str(Fraction(x))


def vec(xs: Iterable) -> QVector:
    return tuple(q(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> QMatrix:
    out = tuple(vec(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ValueError("ragged matrix")
    return out


def zeros(n: int) -> QVector:
    return (Fraction(0),) * n


def unit(n: int, i: int) -> QVector:
    return tuple(Fraction(int(k == i)) for k in range(n))


def identity(n: int) -> QMatrix:
    return tuple(unit(n, i) for i in range(n))


def dot(u: Sequence, v: Sequence) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence, v: Sequence) -> QVector:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> QVector:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Sequence) -> QVector:
    c = Fraction(c)
    return tuple(c * a for a in v)


def neg(v: Sequence) -> QVector:
    return tuple(-a for a in v)


def lincomb(coeffs: Sequence, vectors: Sequence[Sequence], dim: int | None = None) -> QVector:
    if dim is None:
        dim = len(vectors[0])
    out = [Fraction(0)] * dim
    for c, v in zip(coeffs, vectors):
        if c:
            for i, a in enumerate(v):
                out[i] += c * a
    return tuple(out)


def is_zero(v: Sequence) -> bool:
    return all(a == 0 for a in v)


def transpose(a: QMatrix) -> QMatrix:
    return tuple(zip(*a)) if a else ()


def matvec(a: QMatrix, v: Sequence) -> QVector:
    return tuple(dot(row, v) for row in a)


def matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def primitive(v: Sequence) -> QVector:
    """Positive rescaling of ``v`` to a coprime integer vector."""
    if is_zero(v):
        return tuple(Fraction(0) for _ in v)
    den = 1
    for a in v:
        den = den * a.denominator // math.gcd(den, a.denominator)
    ints = [int(a * den) for a in v]
    g = 0
    for k in ints:
        g = math.gcd(g, abs(k))
    return tuple(Fraction(k // g) for k in ints)


def rref(a: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(map(Fraction, row)) for row in a]
    if not m:
        return [], []
    rows, cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m[: len(pivots)], pivots


def rank(a: Sequence[Sequence]) -> int:
    return len(rref(a)[1]) if a else 0


def kernel_basis(a: Sequence[Sequence], ncols: int | None = None) -> list[QVector]:
    """Basis of the right kernel, one vector per free column."""
    if not a:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [unit(ncols, i) for i in range(ncols)]
    n = len(a[0])
    r, pivots = rref(a)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(r, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def solve_linear(a: QMatrix, b: Sequence) -> QVector:
    """Solve ``a x = b`` for square ``a``.

    Raises :class:`SingularMatrixError` carrying a kernel vector when
    ``a`` is singular.
    """
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("solve_linear needs a square matrix")
    if len(b) != n:
        raise ValueError("right-hand side has the wrong length")
    aug = [list(row) + [Fraction(bi)] for row, bi in zip(a, b)]
    r, pivots = rref(aug)
    if len(pivots) < n or n in pivots:
        ker = kernel_basis(a)
        raise SingularMatrixError(ker[0])
    return tuple(row[n] for row in r)


def coordinates(basis: Sequence[Sequence], v: Sequence) -> QVector:
    """Coordinates of ``v`` in the linearly independent list ``basis``."""
    k = len(basis)
    if k == 0:
        if not is_zero(v):
            raise ValueError("vector not in the span of the basis")
        return ()
    aug = [[basis[j][i] for j in range(k)] + [v[i]] for i in range(len(v))]
    r, pivots = rref(aug)
    if k in pivots:
        raise ValueError("vector not in the span of the basis")
    if len(pivots) < k:
        raise ValueError("basis is linearly dependent")
    return tuple(row[k] for row in r)


def determinant(a: Sequence[Sequence]) -> Fraction:
    m = [list(map(Fraction, row)) for row in a]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


def is_symmetric(g: Sequence[Sequence]) -> bool:
    n = len(g)
    return all(len(row) == n for row in g) and all(
        g[i][j] == g[j][i] for i in range(n) for j in range(i)
    )


def is_negative_definite(g: Sequence[Sequence]) -> bool:
    """Sylvester's criterion: leading minors alternate in sign, starting negative."""
    if not is_symmetric(g):
        raise ValueError("matrix is not symmetric")
    for k in range(1, len(g) + 1):
        d = determinant([row[:k] for row in g[:k]])
        if d == 0 or (d > 0) != (k % 2 == 0):
            return False
    return True


# -- exact linear programming -------------------------------------------------


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: QVector | None = None
    value: Fraction | None = None


def _pivot(rows: list[list[Fraction]], basis: list[int], i: int, j: int) -> None:
    pv = rows[i][j]
    rows[i] = [x / pv for x in rows[i]]
    for k in range(len(rows)):
        if k != i and rows[k][j] != 0:
            f = rows[k][j]
            rows[k] = [x - f * y for x, y in zip(rows[k], rows[i])]
    basis[i] = j


def _run_simplex(rows, basis, cost, allowed: int) -> str:
    # Bland's rule, so no cycling.
    while True:
        entering = None
        for j in range(allowed):
            if j in basis:
                continue
            red = cost[j] - sum((cost[b] * rows[i][j] for i, b in enumerate(basis)), Fraction(0))
            if red < 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        best = None
        for i, row in enumerate(rows):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        _pivot(rows, basis, best[1], entering)


def lp_minimize(c: Sequence, a_eq: Sequence[Sequence], b_eq: Sequence) -> LPResult:
    """Minimize ``c.x`` subject to ``a_eq x = b_eq`` and ``x >= 0``, exactly."""
    n = len(c)
    m = len(a_eq)
    rows: list[list[Fraction]] = []
    for i in range(m):
        r = [Fraction(x) for x in a_eq[i]]
        rhs = Fraction(b_eq[i])
        if len(r) != n:
            raise ValueError("constraint row has the wrong length")
        if rhs < 0:
            r, rhs = [-x for x in r], -rhs
        rows.append(r + [Fraction(int(k == i)) for k in range(m)] + [rhs])
    basis = [n + i for i in range(m)]
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    _run_simplex(rows, basis, phase1, n + m)
    if sum((rows[i][-1] for i, b in enumerate(basis) if b >= n), Fraction(0)) > 0:
        return LPResult("infeasible")
    keep = []
    for i in range(len(rows)):
        if basis[i] >= n:
            j = next((j for j in range(n) if rows[i][j] != 0), None)
            if j is None:
                continue  # redundant equation
            _pivot(rows, basis, i, j)
        keep.append(i)
    rows = [rows[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost = [Fraction(x) for x in c] + [Fraction(0)] * m
    status = _run_simplex(rows, basis, cost, n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = rows[i][-1]
    x = tuple(x)
    return LPResult("optimal", x, dot(c, x) if n else Fraction(0))
