"""Contractions, MMP with scaling, and minimal/canonical model checks.

Computed models come from a root :class:`SurfaceData` by contracting
negative curves; abstract models are declared in a :class:`ModelGraph`
with their nef cones already pulled back to the reference space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NotContractibleError, PreconditionError, ValidationError
from .polyhedra import INTERIOR, Cone, face, linear_image, membership
from .ratlin import (
    QMatrix,
    QVector,
    add,
    coordinates,
    dot,
    identity,
    is_negative_definite,
    kernel_basis,
    lincomb,
    matmul,
    qstr,
    scale,
    sub,
    transpose,
    vec,
)
from .surface import CurveRecord, SurfaceData, numerically_fixed_support

ROOT = "root"


# -- declared abstract models -------------------------------------------------


@dataclass(frozen=True)
class AbstractModel:
    """A model known only through its nef cone in reference coordinates.

    ``nef_halfspaces`` are ``(curve name, functional)`` pairs; the name is
    the strict-transform identity of the curve, shared across flops.
    ``exceptional`` lists ``(divisor name, Halfspace)`` negativity conditions
    on the boundary coefficients (empty for small modifications).
    """

    id: str
    nef_halfspaces: tuple
    exceptional: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nef_halfspaces", tuple((n, vec(h)) for n, h in self.nef_halfspaces))
        object.__setattr__(self, "exceptional", tuple(self.exceptional))


@dataclass(frozen=True)
class ModelGraph:
    basis_names: tuple
    canonical_class: QVector
    boundary_generators: tuple
    boundary_offset: QVector
    psef_cone: Cone
    models: tuple
    flops: tuple = ()  # ((model, model, curve name), ...)
    base_name: str = "S"

    def __post_init__(self):
        object.__setattr__(self, "basis_names", tuple(self.basis_names))
        object.__setattr__(self, "canonical_class", vec(self.canonical_class))
        object.__setattr__(self, "boundary_offset", vec(self.boundary_offset))
        object.__setattr__(
            self, "boundary_generators", tuple((n, vec(v)) for n, v in self.boundary_generators)
        )
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "flops", tuple(tuple(f) for f in self.flops))
        errs = []
        ids = [m.id for m in self.models]
        if len(set(ids)) != len(ids):
            errs.append("duplicate model ids")
        for a, b, _ in self.flops:
            for x in (a, b):
                if x not in ids:
                    errs.append(f"flop refers to unknown model {x}")
        for m in self.models:
            for n, h in m.nef_halfspaces:
                if len(h) != self.rho:
                    errs.append(f"nef functional {n} of {m.id} has the wrong dimension")
        if errs:
            raise ValidationError(errs)

    @property
    def rho(self) -> int:
        return len(self.basis_names)

    @property
    def r(self) -> int:
        return len(self.boundary_generators)

    def log_class(self, b: Sequence) -> QVector:
        b = vec(b)
        if len(b) != self.r:
            raise ValueError(f"expected {self.r} boundary coefficients, got {len(b)}")
        gens = [v for _, v in self.boundary_generators]
        return add(add(self.canonical_class, self.boundary_offset), lincomb(b, gens, self.rho))

    def node(self, model_id: str) -> "ModelNode":
        for m in self.models:
            if m.id == model_id:
                return ModelNode(m.id, abstract=m, graph=self, pullback=identity(self.rho))
        raise KeyError(model_id)

    def nodes(self) -> list["ModelNode"]:
        return [self.node(m.id) for m in self.models]


# -- model nodes --------------------------------------------------------------


@dataclass(frozen=True)
class Contraction:
    source: str
    target: str
    contracted_curve: str
    basis: tuple  # basis of the orthogonal complement, in source coordinates
    projection: QMatrix  # N^1(source) -> N^1(target) coordinates
    discrepancy: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "curve": self.contracted_curve,
            "discrepancy": None if self.discrepancy is None else qstr(self.discrepancy),
        }


@dataclass(frozen=True)
class ModelNode:
    id: str
    surface: SurfaceData | None = None
    abstract: AbstractModel | None = None
    graph: ModelGraph | None = None
    chain: tuple = ()
    pullback: QMatrix = ()  # rho_root x rho_model
    root_surface: SurfaceData | None = field(default=None, compare=False)

    @property
    def is_abstract(self) -> bool:
        return self.abstract is not None

    @property
    def rho(self) -> int:
        return self.graph.rho if self.is_abstract else self.surface.rho

    @property
    def contracted(self) -> tuple:
        if self.is_abstract:
            return tuple(n for n, _ in self.abstract.exceptional)
        return tuple(c.contracted_curve for c in self.chain)

    def curve_functionals(self) -> list[tuple[str, QVector, Fraction | None]]:
        if self.is_abstract:
            return [(n, h, None) for n, h in self.abstract.nef_halfspaces]
        return [(c.name, c.curve_class, c.self_intersection) for c in self.surface.curves]

    def log_class(self, b: Sequence) -> QVector:
        if self.is_abstract:
            return self.graph.log_class(b)
        return self.surface.log_class(b)

    def nef_cone(self) -> Cone:
        if self.is_abstract:
            return Cone(self.rho, halfspaces=tuple(h for _, h in self.abstract.nef_halfspaces))
        return self.surface.nef_cone

    def to_root(self, d: Sequence) -> QVector:
        d = vec(d)
        return tuple(dot(row, d) for row in self.pullback)

    @property
    def reference_psef(self) -> Cone:
        return self.graph.psef_cone if self.is_abstract else self.root_surface.psef_cone


def root_model(X: SurfaceData) -> ModelNode:
    return ModelNode(ROOT, surface=X, pullback=identity(X.rho), root_surface=X)


def _project(d: QVector, e: QVector, c_e: QVector, e2: Fraction) -> QVector:
    return sub(d, scale(dot(d, c_e) / e2, e))


def contract(m: ModelNode, curve: str, b: Sequence | None = None) -> ModelNode:
    """Blow down ``curve`` on the computed model ``m``.

    N^1 of the target is identified with the orthogonal complement of the
    curve; ``b`` (boundary coefficients) only feeds the recorded discrepancy.
    """
    if m.is_abstract:
        raise PreconditionError("abstract models are not contracted")
    X = m.surface
    c = X.curve(curve)
    if c.divisor_class is None:
        raise ValidationError(f"curve {curve} has no divisor class")
    if c.self_intersection >= 0:
        raise NotContractibleError(f"{curve} is not contractible (fiber-type ray)")
    e, ce, e2 = c.divisor_class, c.curve_class, c.self_intersection
    basis = tuple(kernel_basis([ce]))

    def proj(d):
        return coordinates(basis, _project(vec(d), e, ce, e2))

    projection = transpose(tuple(proj(col) for col in identity(X.rho)))
    curves = []
    for other in X.curves:
        if other.name == curve:
            continue
        cc = tuple(dot(bk, other.curve_class) for bk in basis)
        dc = proj(other.divisor_class) if other.divisor_class is not None else None
        curves.append(CurveRecord(other.name, cc, dc))
    psef = linear_image(X.psef_cone, projection) if X.psef_cone is not None else None
    Y = SurfaceData(
        basis_names=tuple(f"{m.id}/-{curve}:b{i}" for i in range(len(basis))),
        curves=tuple(curves),
        canonical_class=proj(X.canonical_class),
        boundary_generators=tuple((n, proj(v)) for n, v in X.boundary_generators),
        boundary_offset=proj(X.boundary_offset),
        psef_cone=psef,
        nef_check_complete=X.nef_check_complete,
        pair_flag=X.pair_flag,
        base_name=X.base_name,
    )
    a = None if b is None else dot(X.log_class(b), ce) / e2
    target = f"{m.id}/-{curve}"
    step = Contraction(m.id, target, curve, basis, projection, a)
    pullback = matmul(m.pullback, transpose(basis)) if basis else tuple(() for _ in m.pullback)
    return ModelNode(target, surface=Y, chain=m.chain + (step,), pullback=pullback, root_surface=m.root_surface)


def contract_many(root: ModelNode, curves: Sequence[str], b: Sequence | None = None) -> ModelNode:
    m = root
    for c in curves:
        m = contract(m, c, b)
    return m


def reachable_models(root: ModelNode) -> list[ModelNode]:
    """Every model reachable by successive contractions, one per contracted set."""
    seen = {frozenset(): root}
    frontier = [root]
    while frontier:
        nxt = []
        for m in frontier:
            for c in m.surface.curves:
                if c.divisor_class is None or c.self_intersection >= 0:
                    continue
                key = frozenset(m.contracted) | {c.name}
                if key not in seen:
                    seen[key] = contract(m, c.name)
                    nxt.append(seen[key])
        frontier = nxt
    return sorted(seen.values(), key=lambda n: (len(n.contracted), sorted(n.contracted)))


def minimal_label(m: ModelNode) -> str:
    """Order-independent id of a model reached by contractions."""
    if m.is_abstract:
        return m.id
    names = sorted(m.contracted)
    return ROOT + "".join(f"/-{n}" for n in names)


# -- MMP with scaling ---------------------------------------------------------

MINIMAL = "minimal"
MORI_FIBER = "mori_fiber"
TIE_STOP = "tie_stop"


@dataclass(frozen=True)
class ScalingWall:
    threshold: Fraction
    curves: tuple
    model: str
    discrepancies: tuple

    def to_json(self) -> dict:
        return {
            "threshold": qstr(self.threshold),
            "curves": list(self.curves),
            "model": self.model,
            "discrepancies": [qstr(a) for a in self.discrepancies],
        }


@dataclass(frozen=True)
class ScalingRun:
    boundary: QVector
    scale: QVector
    walls: tuple
    outcome: str
    model: ModelNode = field(compare=False)
    stop_threshold: Fraction | None = None
    stop_curves: tuple = ()

    @property
    def contracted(self) -> tuple:
        return self.model.contracted

    @property
    def thresholds(self) -> list[Fraction]:
        return [w.threshold for w in self.walls]

    def to_json(self) -> dict:
        out = {
            "boundary": [qstr(x) for x in self.boundary],
            "scale": [qstr(x) for x in self.scale],
            "walls": [w.to_json() for w in self.walls],
            "outcome": {"kind": self.outcome, "model": self.model.id},
        }
        if self.stop_threshold is not None:
            out["outcome"]["threshold"] = qstr(self.stop_threshold)
            out["outcome"]["curves"] = list(self.stop_curves)
        return out


def run_scaling_mmp(m: ModelNode, b: Sequence, H: Sequence) -> ScalingRun:
    """Run the (K+B)-MMP with scaling by ``H`` from the computed model ``m``.

    At each step the nef threshold ``t`` of ``K+B+tH`` is found exactly.  A
    single extremal curve of negative square is contracted; one with
    nonnegative square ends the run as a Mori fiber space.  Two or more
    curves at the same threshold are all contracted when their Gram matrix
    is negative definite, otherwise the run stops at the current model.
    """
    if m.is_abstract:
        raise PreconditionError("scaling MMP runs on computed models only")
    b, H = vec(b), vec(H)
    if not m.surface.is_ample(H):
        raise PreconditionError("scaling class is not ample")
    cur, h = m, H
    walls: list[ScalingWall] = []
    while True:
        X = cur.surface
        D = X.log_class(b)
        cand = []
        for c in X.curves:
            dc = dot(D, c.curve_class)
            if dc < 0:
                cand.append((-dc / dot(h, c.curve_class), c))
        if not cand:
            return ScalingRun(b, H, tuple(walls), MINIMAL, cur)
        t = max(s for s, _ in cand)
        tied = sorted((c for s, c in cand if s == t), key=lambda c: c.name)
        if len(tied) > 1:
            ok = all(c.divisor_class is not None for c in tied) and is_negative_definite(
                [[dot(x.divisor_class, y.curve_class) for y in tied] for x in tied]
            )
            if not ok:
                return ScalingRun(b, H, tuple(walls), TIE_STOP, cur, t, tuple(c.name for c in tied))
        c = tied[0]
        if c.divisor_class is None or c.self_intersection >= 0:
            return ScalingRun(b, H, tuple(walls), MORI_FIBER, cur, t, (c.name,))
        nxt = contract(cur, c.name, b)
        step = nxt.chain[-1]
        h = tuple(dot(row, h) for row in step.projection)
        if walls and walls[-1].threshold == t:
            last = walls.pop()
            walls.append(ScalingWall(t, last.curves + (c.name,), last.model, last.discrepancies + (step.discrepancy,)))
        else:
            walls.append(ScalingWall(t, (c.name,), cur.id, (step.discrepancy,)))
        cur = nxt


# -- minimal and canonical models ---------------------------------------------


@dataclass(frozen=True)
class Verification:
    ok: bool
    report: tuple

    def __bool__(self):
        return self.ok


def _nef_failures(m: ModelNode, b: Sequence) -> list[str]:
    D = m.log_class(b)
    out = []
    for name, c, s in m.curve_functionals():
        if dot(D, c) < 0:
            tag = " (fiber class)" if s is not None and s >= 0 else ""
            out.append(f"not nef: {name}{tag}")
    return out


def verify_minimal_model(root: ModelNode | None, candidate: ModelNode, b: Sequence) -> Verification:
    """Check the three minimal-model conditions for the boundary ``b``."""
    b = vec(b)
    report = []
    if candidate.is_abstract:
        for name, hs in candidate.abstract.exceptional:
            if not hs.value(b) > 0:
                report.append(f"negativity fails for {name}")
    else:
        if root is None or root.is_abstract:
            raise PreconditionError("computed candidates need their root model")
        if candidate.chain and candidate.chain[0].source != root.id:
            report.append("candidate is not reachable from the root")
        replay = root
        for step in candidate.chain:
            replay = contract(replay, step.contracted_curve, b)
            a = replay.chain[-1].discrepancy
            if not a > 0:
                report.append(f"negativity fails for {step.contracted_curve}: discrepancy {qstr(a)}")
    report += _nef_failures(candidate, b)
    return Verification(not report, tuple(report))


@dataclass(frozen=True)
class CanonicalModelId:
    """Identity of the canonical model: the pulled-back nef face containing K+C."""

    face_key: tuple
    classification: str
    trivial_curves: frozenset = field(default=frozenset(), compare=False)
    source_model: str = field(default="", compare=False)

    @property
    def label(self) -> str:
        if self.classification == "identity":
            return f"identity:{self.source_model}"
        if self.classification == "point/base":
            return "point/base"
        return f"{self.classification}:" + ",".join(sorted(self.trivial_curves))


def canonical_model(minimal: ModelNode, b: Sequence) -> CanonicalModelId:
    b = vec(b)
    fails = _nef_failures(minimal, b)
    if fails:
        raise PreconditionError("K+C is not nef: " + "; ".join(fails))
    D = minimal.log_class(b)
    funcs = minimal.curve_functionals()
    trivial = [(n, c) for n, c, _ in funcs if dot(D, c) == 0]
    fc = face(minimal.nef_cone(), [c for _, c in trivial])
    pulled = linear_image(fc, minimal.pullback)
    root_dim = len(minimal.pullback)
    if pulled.linear_dim == root_dim:
        cls = "identity"
    elif pulled.linear_dim == 0:
        cls = "point/base"
    elif membership(minimal.reference_psef, minimal.to_root(D)) == INTERIOR:
        cls = "birational contraction"
    else:
        cls = "fibration"
    # curves collapsed by the whole map to the canonical model
    collapsed = frozenset(minimal.contracted) | frozenset(n for n, _ in trivial)
    return CanonicalModelId(pulled.key, cls, collapsed, minimal.id)


def check_exceptional_equals_fixed(root: ModelNode, b: Sequence, run: ScalingRun) -> bool:
    if run.outcome != MINIMAL:
        raise PreconditionError("run did not end in a minimal model")
    fixed = numerically_fixed_support(root.surface, root.surface.log_class(b))
    return fixed == frozenset(run.contracted)


def compare_minimal_models(root: ModelNode | None, m1: ModelNode, m2: ModelNode, b: Sequence) -> bool:
    for m in (m1, m2):
        v = verify_minimal_model(root, m, b)
        if not v:
            raise PreconditionError(f"{m.id} is not a minimal model: " + "; ".join(v.report))
    return m1.to_root(m1.log_class(b)) == m2.to_root(m2.log_class(b))
