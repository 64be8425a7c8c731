"""Intersection theory on declared surface data.

The numerically fixed part of a pseudo-effective class is computed by
Fujita's iteration for the Zariski decomposition.  :func:`nfp_oracle`
evaluates the epsilon-infimum definition directly by exact LP and is
kept independent of the iteration so the two can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import (
    IncompleteCurveDataError,
    InconsistentSurfaceDataError,
    NotPseudoEffectiveError,
    PreconditionError,
    ValidationError,
)
from .polyhedra import INTERIOR, OUTSIDE, Cone, membership
from .ratlin import (
    QVector,
    add,
    dot,
    is_negative_definite,
    lincomb,
    lp_minimize,
    q,
    qstr,
    scale,
    solve_linear,
    sub,
    vec,
    zeros,
)


@dataclass(frozen=True)
class CurveRecord:
    name: str
    curve_class: QVector
    divisor_class: QVector | None = None
    self_intersection: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "curve_class", vec(self.curve_class))
        if self.divisor_class is not None:
            object.__setattr__(self, "divisor_class", vec(self.divisor_class))
            computed = dot(self.divisor_class, self.curve_class)
            if self.self_intersection is None:
                object.__setattr__(self, "self_intersection", computed)
        if self.self_intersection is not None:
            object.__setattr__(self, "self_intersection", q(self.self_intersection))


@dataclass(frozen=True)
class SurfaceData:
    """Declared numerical data of a surface over a base.

    Curve classes are coordinate vectors of N_1 in the basis dual to
    ``basis_names``, so pairing a divisor with a curve is a dot product.
    The boundary at coefficients ``b`` is ``offset + sum b_i B_i``.
    """

    basis_names: tuple
    curves: tuple
    canonical_class: QVector
    boundary_generators: tuple = ()
    boundary_offset: QVector | None = None
    psef_cone: Cone | None = None
    nef_check_complete: bool = True
    pair_flag: str = "KLT"
    base_name: str = "S"
    scaling_class: QVector | None = None
    ample_class: QVector | None = None

    def __post_init__(self):
        object.__setattr__(self, "basis_names", tuple(self.basis_names))
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "canonical_class", vec(self.canonical_class))
        object.__setattr__(
            self, "boundary_generators", tuple((n, vec(v)) for n, v in self.boundary_generators)
        )
        off = zeros(self.rho) if self.boundary_offset is None else vec(self.boundary_offset)
        object.__setattr__(self, "boundary_offset", off)
        for name in ("scaling_class", "ample_class"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, vec(v))
        errors = self.validation_errors()
        if errors:
            raise ValidationError(errors)

    @property
    def rho(self) -> int:
        return len(self.basis_names)

    @property
    def r(self) -> int:
        return len(self.boundary_generators)

    def validation_errors(self) -> list[str]:
        errs = []
        rho = self.rho
        names = [c.name for c in self.curves]
        if len(set(names)) != len(names):
            errs.append("duplicate curve names")
        if len(self.canonical_class) != rho:
            errs.append("canonical class has the wrong dimension")
        if len(self.boundary_offset) != rho:
            errs.append("boundary offset has the wrong dimension")
        for n, v in self.boundary_generators:
            if len(v) != rho:
                errs.append(f"boundary generator {n} has the wrong dimension")
        for c in self.curves:
            if len(c.curve_class) != rho:
                errs.append(f"curve {c.name} has the wrong dimension")
                continue
            if c.divisor_class is not None:
                if len(c.divisor_class) != rho:
                    errs.append(f"divisor class of {c.name} has the wrong dimension")
                    continue
                computed = dot(c.divisor_class, c.curve_class)
                if computed != c.self_intersection:
                    errs.append(
                        f"self-intersection of {c.name} declared {qstr(c.self_intersection)}"
                        f" but pairing gives {qstr(computed)}"
                    )
        div = [c for c in self.curves if c.divisor_class is not None and len(c.divisor_class) == rho
               and len(c.curve_class) == rho]
        for i, a in enumerate(div):
            for b in div[i + 1:]:
                ab = dot(a.divisor_class, b.curve_class)
                ba = dot(b.divisor_class, a.curve_class)
                if ab != ba:
                    errs.append(f"pairing asymmetry at ({a.name},{b.name})")
                elif ab < 0:
                    errs.append(f"distinct curves {a.name},{b.name} meet negatively")
        if self.psef_cone is not None and self.psef_cone.dim != rho:
            errs.append("psef cone has the wrong dimension")
        if not errs:
            for label, v in (("scaling class", self.scaling_class), ("ample class", self.ample_class)):
                if v is not None and (len(v) != rho or not self.is_ample(v)):
                    errs.append(f"declared {label} is not ample")
        return errs

    def curve(self, name: str) -> CurveRecord:
        for c in self.curves:
            if c.name == name:
                return c
        raise KeyError(name)

    @cached_property
    def nef_cone(self) -> Cone:
        return Cone(self.rho, halfspaces=tuple(c.curve_class for c in self.curves))

    def is_ample(self, d: Sequence) -> bool:
        d = vec(d)
        return all(dot(d, c.curve_class) > 0 for c in self.curves)

    def boundary(self, b: Sequence) -> QVector:
        b = vec(b)
        if len(b) != self.r:
            raise ValueError(f"expected {self.r} boundary coefficients, got {len(b)}")
        return add(self.boundary_offset, lincomb(b, [v for _, v in self.boundary_generators], self.rho))

    def log_class(self, b: Sequence) -> QVector:
        return add(self.canonical_class, self.boundary(b))

    def divisor_curves(self) -> list[CurveRecord]:
        return [c for c in self.curves if c.divisor_class is not None]


def pair(d: Sequence, c: Sequence) -> Fraction:
    return dot(vec(d), vec(c))


@dataclass(frozen=True)
class ZariskiDecomposition:
    positive: QVector
    negative: tuple  # ((curve name, coefficient), ...)
    rounds: tuple = field(default=(), compare=False)

    @property
    def support(self) -> frozenset:
        return frozenset(n for n, _ in self.negative)

    def coefficient(self, name: str) -> Fraction:
        return dict(self.negative).get(name, Fraction(0))

    def to_json(self) -> dict:
        return {
            "P": [qstr(x) for x in self.positive],
            "N": [{"curve": n, "coeff": qstr(a)} for n, a in self.negative],
        }


def _gram(curves: Sequence[CurveRecord]) -> list[list[Fraction]]:
    return [[dot(a.divisor_class, b.curve_class) for b in curves] for a in curves]


def zariski_decompose(X: SurfaceData, D: Sequence) -> ZariskiDecomposition:
    D = vec(D)
    if X.psef_cone is None:
        raise PreconditionError("surface data declares no pseudo-effective cone")
    if membership(X.psef_cone, D) == OUTSIDE:
        raise NotPseudoEffectiveError("not pseudo-effective")
    candidates = X.divisor_curves()
    support: list[CurveRecord] = []
    coeffs: list[Fraction] = []
    P = D
    rounds = []
    while True:
        new = [c for c in candidates if c not in support and dot(P, c.curve_class) < 0]
        if not new:
            break
        support = sorted(support + new, key=lambda c: c.name)
        for c in support:
            if c.self_intersection >= 0:
                raise InconsistentSurfaceDataError(
                    f"inconsistent surface data: curve {c.name} with self-intersection "
                    f"{qstr(c.self_intersection)} in a Zariski support"
                )
        gram = _gram(support)
        if not is_negative_definite(gram):
            raise InconsistentSurfaceDataError(
                "inconsistent surface data: Gram matrix of {"
                + ",".join(c.name for c in support) + "} is not negative definite"
            )
        rounds.append(tuple(c.name for c in support))
        # (D - sum a_i E_i) . c_j = 0 for j in the support
        rhs = [dot(D, c.curve_class) for c in support]
        coeffs = list(solve_linear(tuple(tuple(row[j] for row in gram) for j in range(len(support))), rhs))
        P = sub(D, lincomb(coeffs, [c.divisor_class for c in support], X.rho))
    negative = tuple((c.name, a) for c, a in zip(support, coeffs))
    if any(a <= 0 for _, a in negative):
        raise InconsistentSurfaceDataError("inconsistent surface data: nonpositive Zariski coefficient")
    return ZariskiDecomposition(P, negative, tuple(rounds))


def numerically_fixed_support(X: SurfaceData, D: Sequence) -> frozenset:
    return zariski_decompose(X, D).support


def is_nef(X: SurfaceData, D: Sequence) -> bool:
    if not X.nef_check_complete:
        raise IncompleteCurveDataError("incomplete curve data")
    D = vec(D)
    return all(dot(D, c.curve_class) >= 0 for c in X.curves)


def nfp_oracle(X: SurfaceData, D: Sequence, A: Sequence, eps_list: Sequence) -> list[dict | None]:
    """Componentwise infimum of effective representatives of ``D + eps A``.

    Effective representatives are nonnegative combinations of the curves'
    divisor classes plus generators of the nef cone (classes whose general
    member contains none of the listed curves).  Each curve coefficient is
    minimized separately by exact LP.  Returns one ``{curve: coeff}`` dict
    per epsilon, or ``None`` where ``D + eps A`` is not representable.
    """
    D, A = vec(D), vec(A)
    if membership(X.nef_cone, A) != INTERIOR:
        raise PreconditionError("A is not ample")
    curves = X.divisor_curves()
    mobile = X.nef_cone.all_generators
    columns = [c.divisor_class for c in curves] + list(mobile)
    a_eq = [[col[i] for col in columns] for i in range(X.rho)]
    out: list[dict | None] = []
    for eps in eps_list:
        eps = q(eps)
        if eps <= 0:
            raise PreconditionError("epsilon must be positive")
        rhs = add(D, scale(eps, A))
        result: dict | None = {}
        for k, c in enumerate(curves):
            cost = [Fraction(int(j == k)) for j in range(len(columns))]
            lp = lp_minimize(cost, a_eq, rhs)
            if lp.status != "optimal":
                result = None
                break
            result[c.name] = lp.value
        out.append(result)
    return out
