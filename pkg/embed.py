"""Embeddings a -> g: regular (extended-diagram node deletion) and special (explicit data).

Resolving an embedding yields the subalgebra's root system expressed in the
ambient coordinates of g together with the orthogonal projection onto its
Cartan subspace.  ``orthogonal_pair`` then finds a_perp, h_perp and the
defects that shift projected singular weights.
"""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from rootdata import (AlgebraSpec, BranchingError, RootSystem, Weight, build_root_system, canonical_type,
                      classify_cartan, fraction_rows, parse_algebra, rational_matrix)

logger = logging.getLogger(__name__)

KINDS = ('regular', 'special')


class EmbeddingError(BranchingError):
    stage = "embed"


def _as_fraction_row(row: Sequence) -> Tuple[Fraction, ...]:
    return tuple(Fraction(str(x)) if not isinstance(x, (int, Fraction)) else Fraction(x) for x in row)


@dataclass(frozen=True)
class EmbeddingSpec:
    """User-level description of an embedding a -> g."""

    kind: str
    g_spec: AlgebraSpec
    a_spec: AlgebraSpec
    dropped_nodes: Tuple[int, ...] = ()
    projection_matrix: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    embedded_simple_roots: Tuple[Tuple[Fraction, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            error_msg = f"Embedding kind must be one of {KINDS}, got {self.kind!r}"
            logger.error(error_msg)
            raise ValueError(error_msg)
        if self.g_spec.affine != self.a_spec.affine:
            error_msg = f"Cannot embed {self.a_spec} into {self.g_spec}: both must be finite or both affine"
            logger.error(error_msg)
            raise ValueError(error_msg)
        if self.kind == 'special' and not self.embedded_simple_roots:
            error_msg = "Special embeddings need embedded_simple_roots"
            logger.error(error_msg)
            raise ValueError(error_msg)

    @classmethod
    def regular(cls, g: str, drop: Sequence[int], a: str) -> 'EmbeddingSpec':
        return cls('regular', parse_algebra(g), parse_algebra(a), tuple(int(i) for i in drop))

    @classmethod
    def from_json(cls, data: Dict) -> 'EmbeddingSpec':
        """Build a spec from the JSON embedding format."""
        try:
            kind = data.get('kind', 'regular')
            g_spec = parse_algebra(data['g'])
            a_spec = parse_algebra(data['a'])
        except KeyError as e:
            error_msg = f"Embedding description is missing field {e}"
            logger.error(error_msg)
            raise ValueError(error_msg)
        projection = data.get('projection')
        return cls(
            kind=kind,
            g_spec=g_spec,
            a_spec=a_spec,
            dropped_nodes=tuple(int(i) for i in data.get('drop', ())),
            projection_matrix=tuple(_as_fraction_row(r) for r in projection) if projection else None,
            embedded_simple_roots=tuple(_as_fraction_row(r) for r in data.get('embedded_simple_roots', ())),
        )

    def to_json(self) -> Dict:
        data = {"g": str(self.g_spec), "kind": self.kind, "a": str(self.a_spec)}
        if self.kind == 'regular':
            data["drop"] = list(self.dropped_nodes)
        else:
            data["embedded_simple_roots"] = [[str(x) for x in r] for r in self.embedded_simple_roots]
            if self.projection_matrix:
                data["projection"] = [[str(x) for x in r] for r in self.projection_matrix]
        return data


def load_embedding_spec(path: str) -> EmbeddingSpec:
    with open(path) as f:
        data = json.load(f)
    logger.info(f"Loaded embedding description from {path}")
    return EmbeddingSpec.from_json(data)


def _apply(matrix: Sequence[Sequence[Fraction]], vector: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(sum((m * v for m, v in zip(row, vector)), Fraction(0)) for row in matrix)


def projection_onto(vectors: Sequence[Weight], dim: int) -> List[List[Fraction]]:
    """Orthogonal projection matrix onto the span of the finite parts of ``vectors``."""
    if not vectors:
        return [[Fraction(0)] * dim for _ in range(dim)]
    basis = rational_matrix([v.finite for v in vectors]).T
    matrix = basis * (basis.T * basis).inv() * basis.T
    return fraction_rows(matrix)


def null_space(rows: Sequence[Sequence[Fraction]], dim: int) -> List[Tuple[Fraction, ...]]:
    """Basis of the vectors orthogonal to all ``rows``, as primitive integer vectors."""
    matrix = rational_matrix(rows) if rows else sympy.zeros(1, dim)
    basis = []
    for vector in matrix.nullspace():
        entries = [Fraction(int(sympy.Rational(x).p), int(sympy.Rational(x).q)) for x in vector]
        denominators = 1
        for x in entries:
            denominators = denominators * x.denominator // gcd(denominators, x.denominator)
        scaled = [int(x * denominators) for x in entries]
        common = 0
        for x in scaled:
            common = gcd(common, abs(x))
        scaled = [x // common for x in scaled] if common else scaled
        leading = next((x for x in scaled if x), 1)
        if leading < 0:
            scaled = [-x for x in scaled]
        basis.append(tuple(Fraction(x) for x in scaled))
    return basis


def _cartan_of(roots: Sequence[Weight], rs: RootSystem) -> List[List[Fraction]]:
    return [[rs.pair(a, b) for b in roots] for a in roots]


def order_simple_roots(roots: Sequence[Weight], target: Sequence[Sequence[Fraction]],
                       rs: RootSystem) -> Optional[List[Weight]]:
    """Order ``roots`` so that their Cartan matrix equals ``target``; None if impossible."""
    n = len(roots)
    if n != len(target):
        return None
    candidates = sorted(roots, key=lambda r: (rs.height(r), r.finite))
    cartan = _cartan_of(candidates, rs)
    chosen: List[int] = []

    def extend() -> bool:
        k = len(chosen)
        if k == n:
            return True
        for c in range(n):
            if c in chosen:
                continue
            if all(cartan[c][chosen[m]] == target[k][m] and cartan[chosen[m]][c] == target[m][k]
                   for m in range(k)):
                chosen.append(c)
                if extend():
                    return True
                chosen.pop()
        return False

    if not extend():
        return None
    return [candidates[i] for i in chosen]


def indecomposable(positive: Sequence[Weight]) -> List[Weight]:
    """Positive roots that are not a sum of two positive roots of the same set."""
    pool = set(positive)
    return [r for r in positive if not any((r - s) in pool for s in positive if s != r)]


class Embedding:
    """A resolved embedding: both root systems in ambient coordinates plus pi_a."""

    def __init__(self, spec: EmbeddingSpec, g: RootSystem, a: RootSystem, projection: List[List[Fraction]]):
        self.spec = spec
        self.g = g
        self.a = a
        self.projection = projection

    def project(self, w: Weight) -> Weight:
        """pi_a: orthogonal projection of the finite part; level and grade are kept."""
        return Weight(_apply(self.projection, w.finite), w.level, w.grade)

    @property
    def embedded_simple_roots(self) -> List[Weight]:
        return list(self.a.finite_simple)

    def __repr__(self) -> str:
        return f"Embedding({self.a.label} -> {self.g.label}, {self.spec.kind})"


def _regular_simple_roots(spec: EmbeddingSpec, g: RootSystem) -> List[Weight]:
    nodes = [-g.theta] + list(g.finite_simple)
    dropped = set(spec.dropped_nodes) if spec.dropped_nodes else {0}
    bad = [i for i in dropped if not 0 <= i < len(nodes)]
    if bad:
        error_msg = f"Dropped nodes {bad} are outside the extended diagram of {g.label} (0..{len(nodes) - 1})"
        logger.error(error_msg)
        raise ValueError(error_msg)
    survivors = [nodes[i] for i in range(len(nodes)) if i not in dropped]
    if not survivors:
        error_msg = f"Dropping {sorted(dropped)} from {g.label} leaves no nodes"
        logger.error(error_msg)
        raise EmbeddingError(error_msg)

    diagram = RootSystem(survivors, g.dim, g.metric)
    wanted = canonical_type(spec.a_spec.series, spec.a_spec.rank)
    for part in diagram.components():
        part_cartan = [[diagram.cartan[i][j] for j in part] for i in part]
        if classify_cartan(part_cartan) != wanted:
            continue
        component = RootSystem([survivors[i] for i in part], g.dim, g.metric)
        subsystem = list(component.positive_finite) + [-r for r in component.positive_finite]
        positive = sorted((r for r in subsystem if g.height(r) > 0), key=lambda r: (g.height(r), r.finite))
        simple = indecomposable(positive)
        logger.info(f"Regular {spec.a_spec} in {g.label}: simple roots {[s.finite for s in simple]}")
        return simple

    found = diagram.label
    error_msg = f"Surviving nodes of {g.label} form {found}, which has no component of type {spec.a_spec.finite}"
    logger.error(error_msg)
    raise EmbeddingError(error_msg)


def resolve_embedding(spec: EmbeddingSpec) -> Embedding:
    """Construct the embedded simple roots of a and the projection pi_a."""
    g = build_root_system(spec.g_spec)
    if spec.kind == 'regular':
        roots = _regular_simple_roots(spec, g)
    else:
        roots = []
        for row in spec.embedded_simple_roots:
            if len(row) != g.dim:
                error_msg = f"Embedded root {row} has {len(row)} coordinates; {g.label} needs {g.dim}"
                logger.error(error_msg)
                raise ValueError(error_msg)
            roots.append(Weight.of(row))

    target = build_root_system(spec.a_spec.finite).cartan
    ordered = order_simple_roots(roots, target, g)
    if ordered is None:
        error_msg = f"Embedded roots {[r.finite for r in roots]} do not form the diagram of {spec.a_spec.finite}"
        logger.error(error_msg)
        raise EmbeddingError(error_msg)
    if spec.kind == 'special':
        # user order is kept when it already matches
        if _cartan_of(roots, g) == [list(row) for row in target]:
            ordered = roots

    a = RootSystem(ordered, g.dim, g.metric, affine=spec.a_spec.affine, spec=spec.a_spec)
    projection = projection_onto(ordered, g.dim)

    if spec.projection_matrix is not None:
        given = [list(row) for row in spec.projection_matrix]
        square = [[sum(given[i][k] * given[k][j] for k in range(g.dim)) for j in range(g.dim)]
                  for i in range(g.dim)]
        if len(given) != g.dim or square != given or given != projection:
            error_msg = f"Projection matrix for {spec.a_spec} -> {spec.g_spec} is not the idempotent projection onto the embedded roots"
            logger.error(error_msg)
            raise EmbeddingError(error_msg)

    embedding = Embedding(spec, g, a, projection)
    for root in a.positive_finite:
        if embedding.project(root) != root:
            error_msg = f"Projection does not fix embedded root {root.finite}"
            logger.error(error_msg)
            raise EmbeddingError(error_msg)
    return embedding


def embedding_index(embedding: Embedding) -> Fraction:
    """x_e = |pi_a Theta|^2 / |Theta_a|^2."""
    g, a = embedding.g, embedding.a
    theta_a_norm = g.norm(a.theta)
    projected = g.norm(embedding.project(g.theta))
    if projected == 0:
        logger.debug(f"{a.label} is orthogonal to the highest root of {g.label}; using 2/|Theta_a|^2")
        return g.theta_norm / theta_a_norm
    return projected / theta_a_norm


@dataclass
class OrthogonalPair:
    """The orthogonal pair (a, a_perp) together with h_perp and the defects."""

    delta_perp_plus: List[Weight]
    a_perp: RootSystem
    h_perp_basis: List[Weight]
    defect_perp: Weight
    defect_a: Weight
    x_e: Fraction
    perp_projection: List[List[Fraction]] = field(repr=False, default_factory=list)
    h_perp_projection: List[List[Fraction]] = field(repr=False, default_factory=list)

    @property
    def a_perp_type(self) -> str:
        return self.a_perp.label

    def project_perp(self, w: Weight) -> Weight:
        """pi_{a_perp}; a_perp is finite, so level and grade are dropped."""
        return Weight(_apply(self.perp_projection, w.finite), Fraction(0), Fraction(0))

    def project_perp_tilde(self, w: Weight) -> Weight:
        """pi onto a_perp + h_perp."""
        perp = _apply(self.perp_projection, w.finite)
        h = _apply(self.h_perp_projection, w.finite)
        return Weight(tuple(x + y for x, y in zip(perp, h)), Fraction(0), Fraction(0))


def orthogonal_pair(embedding: Embedding) -> OrthogonalPair:
    """Compute Delta_perp^+, a_perp, h_perp, the defects and x_e."""
    g, a = embedding.g, embedding.a
    perp_positive = [r for r in g.positive_finite if embedding.project(r).is_zero()]
    perp_simple = indecomposable(perp_positive)
    a_perp = RootSystem(perp_simple, g.dim, g.metric)
    if set(a_perp.positive_finite) != set(perp_positive):
        error_msg = f"Orthogonal roots {[r.finite for r in perp_positive]} are not closed"
        logger.error(error_msg)
        raise EmbeddingError(error_msg)

    complement_g = null_space([r.finite for r in g.finite_simple], g.dim)
    rows = [r.finite for r in a.finite_simple] + [r.finite for r in perp_simple] + list(complement_g)
    h_perp_basis = [Weight.of(v) for v in null_space(rows, g.dim)] if rows else []
    if a.rank + a_perp.rank + len(h_perp_basis) != g.rank:
        error_msg = f"Cartan dimensions {a.rank}+{a_perp.rank}+{len(h_perp_basis)} do not add up to {g.rank}"
        logger.error(error_msg)
        raise EmbeddingError(error_msg)

    perp_projection = projection_onto(perp_simple, g.dim)
    h_perp_projection = projection_onto(h_perp_basis, g.dim)
    pair = OrthogonalPair(
        delta_perp_plus=perp_positive,
        a_perp=a_perp,
        h_perp_basis=h_perp_basis,
        defect_perp=Weight.zero(g.dim),
        defect_a=Weight.zero(g.dim),
        x_e=embedding_index(embedding),
        perp_projection=perp_projection,
        h_perp_projection=h_perp_projection,
    )
    pair.defect_perp = a_perp.rho.finite_part() - pair.project_perp(g.rho)
    pair.defect_a = a.rho - embedding.project(g.rho)
    logger.info(f"Orthogonal pair for {a.label} -> {g.label}: a_perp={a_perp.label}, "
                f"dim h_perp={len(h_perp_basis)}, D_perp={pair.defect_perp.finite}, x_e={pair.x_e}")
    return pair
