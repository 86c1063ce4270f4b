"""Root systems, weights and Weyl orbits of classical and untwisted affine Lie algebras.

All weights live in one ambient orthonormal basis (the epsilon basis of the
classical algebra) extended by a level and a grade.  Coordinates are exact
rationals; nothing in this module ever touches floating point.
"""
import logging
import os
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import sympy

logger = logging.getLogger(__name__)

SERIES = ('A', 'B', 'C', 'D')
_ALGEBRA_RE = re.compile(r'^\s*([ABCD])(\d+)(\^?)\s*$')


class BranchingError(Exception):
    """Base class for invariant violations inside the branching pipeline."""

    stage = "rootdata"

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        if stage:
            self.stage = stage


# --- exact linear algebra helpers -------------------------------------------

def to_fraction(value) -> Fraction:
    """Convert a sympy rational (or anything Fraction accepts) to Fraction."""
    if isinstance(value, sympy.Basic):
        value = sympy.Rational(value)
        return Fraction(int(value.p), int(value.q))
    return Fraction(value)


def rational_matrix(rows: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in row]
                         for row in rows])


def fraction_rows(matrix: sympy.Matrix) -> List[List[Fraction]]:
    return [[to_fraction(matrix[i, j]) for j in range(matrix.cols)] for i in range(matrix.rows)]


def format_number(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def int_setting(name: str, default: int) -> int:
    """Integer environment setting; malformed values fall back to the default."""
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Invalid {name} value {raw!r}; using {default}")
        return default


# --- algebra specs and weights ----------------------------------------------

@dataclass(frozen=True)
class AlgebraSpec:
    """Series, rank and affine flag of a classical (possibly affine) algebra."""

    series: str
    rank: int
    affine: bool = False

    def __post_init__(self):
        if self.series not in SERIES:
            error_msg = f"Unsupported series {self.series!r}; expected one of {', '.join(SERIES)}"
            logger.error(error_msg)
            raise ValueError(error_msg)
        if self.rank < 1:
            error_msg = f"Rank must be positive, got {self.rank}"
            logger.error(error_msg)
            raise ValueError(error_msg)
        if self.series == 'D' and self.rank < 3:
            error_msg = f"D{self.rank} is degenerate; series D requires rank >= 3"
            logger.error(error_msg)
            raise ValueError(error_msg)

    def __str__(self) -> str:
        return f"{self.series}{self.rank}{'^' if self.affine else ''}"

    @property
    def finite(self) -> 'AlgebraSpec':
        return AlgebraSpec(self.series, self.rank, False)


def parse_algebra(text: str) -> AlgebraSpec:
    """Parse strings such as ``B2`` or ``B4^`` (trailing caret marks the affine extension)."""
    match = _ALGEBRA_RE.match(text or "")
    if not match:
        error_msg = f"Cannot parse algebra {text!r}; expected e.g. 'B4' or 'A2^'"
        logger.error(error_msg)
        raise ValueError(error_msg)
    series, rank, caret = match.groups()
    return AlgebraSpec(series, int(rank), bool(caret))


def canonical_type(series: str, rank: int) -> Tuple[str, int]:
    """Identify low-rank coincidences A1=B1=C1, B2=C2 and A3=D3."""
    if rank == 1:
        return ('A', 1)
    if series == 'C' and rank == 2:
        return ('B', 2)
    if series == 'D' and rank == 3:
        return ('A', 3)
    return (series, rank)


@dataclass(frozen=True)
class Weight:
    """A weight (finite part; level; grade); grade is the coefficient of delta."""

    finite: Tuple[Fraction, ...]
    level: Fraction = Fraction(0)
    grade: Fraction = Fraction(0)

    @classmethod
    def of(cls, finite: Sequence, level=0, grade=0) -> 'Weight':
        return cls(tuple(Fraction(x) for x in finite), Fraction(level), Fraction(grade))

    @classmethod
    def zero(cls, dim: int) -> 'Weight':
        return cls(tuple(Fraction(0) for _ in range(dim)), Fraction(0), Fraction(0))

    def __add__(self, other: 'Weight') -> 'Weight':
        return Weight(tuple(x + y for x, y in zip(self.finite, other.finite)),
                      self.level + other.level, self.grade + other.grade)

    def __sub__(self, other: 'Weight') -> 'Weight':
        return Weight(tuple(x - y for x, y in zip(self.finite, other.finite)),
                      self.level - other.level, self.grade - other.grade)

    def __neg__(self) -> 'Weight':
        return Weight(tuple(-x for x in self.finite), -self.level, -self.grade)

    def scaled(self, factor) -> 'Weight':
        return Weight(tuple(factor * x for x in self.finite), factor * self.level, factor * self.grade)

    def is_zero(self) -> bool:
        return self.level == 0 and self.grade == 0 and not any(self.finite)

    def finite_part(self) -> 'Weight':
        return Weight(self.finite, Fraction(0), Fraction(0))

    def with_grade(self, grade) -> 'Weight':
        return Weight(self.finite, self.level, Fraction(grade))

    def to_json(self) -> Dict:
        return {"eps": [format_number(x) for x in self.finite],
                "level": format_number(self.level),
                "grade": format_number(self.grade)}


@dataclass(frozen=True)
class SignedOrbitPoint:
    weight: Weight
    sign: int
    word: Tuple[int, ...] = ()


# --- root systems -------------------------------------------------------------

class RootSystem:
    """Root data of a (possibly reducible) finite or untwisted affine algebra.

    The finite simple roots are given in ambient coordinates.  ``metric``
    scales the Euclidean product of finite parts so that long roots of the
    ambient algebra have length squared 2.  For affine systems ``simple_roots``
    starts with alpha_0 = delta - theta, followed by the finite simple roots.
    """

    def __init__(self, finite_simple: Sequence[Weight], dim: int, metric=Fraction(1),
                 affine: bool = False, spec: Optional[AlgebraSpec] = None, label: Optional[str] = None):
        self.dim = dim
        self.metric = Fraction(metric)
        self.affine = affine
        self.spec = spec
        self.finite_simple = [w.finite_part() for w in finite_simple]
        self.rank = len(self.finite_simple)
        if affine and self.rank == 0:
            error_msg = "Affine extension of an empty root system is undefined"
            logger.error(error_msg)
            raise BranchingError(error_msg)

        self.gram = [[self.inner(a, b) for b in self.finite_simple] for a in self.finite_simple]
        self.cartan = [[2 * self.gram[i][j] / self.gram[j][j] for j in range(self.rank)]
                       for i in range(self.rank)]
        if self.rank:
            self._gram_inv = fraction_rows(rational_matrix(self.gram).inv())
            cartan_inv = fraction_rows(rational_matrix(self.cartan).inv())
        else:
            self._gram_inv = []
            cartan_inv = []
        column_sums = [sum(self._gram_inv[i][j] for i in range(self.rank)) for j in range(self.rank)]
        self._height_vector = self._combine(column_sums, self.finite_simple)

        self.positive_finite = self._generate_positive_roots()
        self.positive_roots: List[Tuple[Weight, int]] = [(root, 1) for root in self.positive_finite]
        self.fundamental_weights = [self._combine(row, self.finite_simple) for row in cartan_inv]

        half = Fraction(1, 2)
        rho = Weight.zero(dim)
        for root in self.positive_finite:
            rho = rho + root
        rho = rho.scaled(half)

        self.theta = self.positive_finite[-1] if self.positive_finite else None
        if affine:
            theta_norm = self.inner(self.theta, self.theta)
            rho_level = theta_norm / 2 + self.inner(rho, self.theta)
            self.rho = Weight(rho.finite, rho_level, Fraction(0))
            self.delta = Weight(tuple(Fraction(0) for _ in range(dim)), Fraction(0), Fraction(1))
            alpha0 = Weight(tuple(-x for x in self.theta.finite), Fraction(0), Fraction(1))
            self.simple_roots = [alpha0] + list(self.finite_simple)
        else:
            self.rho = rho
            self.delta = None
            self.simple_roots = list(self.finite_simple)
        self._simple_norms = [self.inner(a, a) for a in self.simple_roots]
        self.label = label or (str(spec) if spec else self._components_label())

    # basic geometry

    def inner(self, x: Weight, y: Weight) -> Fraction:
        finite = sum((a * b for a, b in zip(x.finite, y.finite)), Fraction(0))
        return self.metric * finite + x.level * y.grade + x.grade * y.level

    def norm(self, x: Weight) -> Fraction:
        return self.inner(x, x)

    def pair(self, x: Weight, root: Weight) -> Fraction:
        """Pairing <x, root^vee> = 2(x, root)/(root, root)."""
        return 2 * self.inner(x, root) / self.inner(root, root)

    def simple_pairings(self, x: Weight) -> List[Fraction]:
        return [2 * self.inner(x, a) / n for a, n in zip(self.simple_roots, self._simple_norms)]

    def reflect(self, x: Weight, root: Weight) -> Weight:
        return x - root.scaled(self.pair(x, root))

    def height(self, x: Weight) -> Fraction:
        """Sum of the simple-root coefficients of the finite part of x."""
        return self.inner(x.finite_part(), self._height_vector)

    def simple_coefficients(self, x: Weight) -> List[Fraction]:
        products = [self.inner(x.finite_part(), a) for a in self.finite_simple]
        return [sum(self._gram_inv[i][j] * products[j] for j in range(self.rank)) for i in range(self.rank)]

    def _combine(self, coefficients: Sequence[Fraction], vectors: Sequence[Weight]) -> Weight:
        total = Weight.zero(self.dim)
        for c, v in zip(coefficients, vectors):
            if c:
                total = total + v.scaled(c)
        return total

    def _generate_positive_roots(self) -> List[Weight]:
        roots = set(self.finite_simple)
        frontier = list(self.finite_simple)
        while frontier:
            root = frontier.pop()
            for alpha in self.finite_simple:
                image = self.reflect(root, alpha)
                if image not in roots:
                    roots.add(image)
                    frontier.append(image)
        positive = [r for r in roots if self.height(r) > 0]
        positive.sort(key=lambda r: (self.height(r), r.finite))
        return positive

    # derived invariants

    @property
    def dimension(self) -> int:
        """Dimension of the finite part of the algebra."""
        return self.rank + 2 * len(self.positive_finite)

    @property
    def dual_coxeter(self) -> int:
        if self.theta is None:
            return 0
        value = 1 + self.pair(self.rho.finite_part(), self.theta)
        return int(value)

    @property
    def theta_norm(self) -> Fraction:
        return self.inner(self.theta, self.theta)

    def normalized_level(self, x: Weight) -> Fraction:
        """Level measured in this algebra's own normalization (long roots of length squared 2)."""
        return 2 * x.level / self.theta_norm

    def ambient_level(self, level) -> Fraction:
        return Fraction(level) * self.theta_norm / 2

    def comarks(self) -> List[int]:
        """Dual Kac labels a_i^vee of the finite simple roots."""
        coefficients = self.simple_coefficients(self.theta)
        return [int(c * self.inner(a, a) / self.theta_norm) for c, a in zip(coefficients, self.finite_simple)]

    def positive_roots_upto(self, max_grade: int) -> List[Tuple[Weight, int]]:
        """Positive roots with multiplicities, affine ones truncated at grade max_grade."""
        roots = list(self.positive_roots)
        if not self.affine:
            return roots
        all_finite = list(self.positive_finite) + [-r for r in self.positive_finite]
        for n in range(1, max_grade + 1):
            for r in all_finite:
                roots.append((r.with_grade(n), 1))
            roots.append((self.delta.scaled(n), self.rank))
        return roots

    def components(self) -> List[List[int]]:
        """Connected components of the finite Dynkin diagram, as lists of node indices."""
        seen = set()
        parts = []
        for start in range(self.rank):
            if start in seen:
                continue
            stack, part = [start], []
            seen.add(start)
            while stack:
                i = stack.pop()
                part.append(i)
                for j in range(self.rank):
                    if j not in seen and self.gram[i][j] != 0:
                        seen.add(j)
                        stack.append(j)
            parts.append(sorted(part))
        return parts

    def component_types(self) -> List[Tuple[str, int]]:
        return [classify_cartan([[self.cartan[i][j] for j in part] for i in part]) for part in self.components()]

    def _components_label(self) -> str:
        types = self.component_types()
        if not types:
            return "0"
        return "+".join(f"{s}{r}" for s, r in types)

    def __repr__(self) -> str:
        return f"RootSystem({self.label}, rank={self.rank}, affine={self.affine})"


def classify_cartan(cartan: Sequence[Sequence[Fraction]]) -> Tuple[str, int]:
    """Type of an irreducible classical Cartan matrix, in canonical form."""
    n = len(cartan)
    if n == 1:
        return ('A', 1)
    degree = [sum(1 for j in range(n) if j != i and cartan[i][j] != 0) for i in range(n)]
    double = [(i, j) for i in range(n) for j in range(n)
              if i < j and cartan[i][j] * cartan[j][i] == 2]
    if double:
        if n == 2:
            return ('B', 2)
        i, j = double[0]
        # a_ij = -2 means alpha_i is the longer root of the bond
        long_end = i if cartan[i][j] == -2 else j
        short_end = j if long_end == i else i
        if degree[short_end] == 1:
            return ('B', n)
        return canonical_type('C', n)
    if max(degree) >= 3:
        return canonical_type('D', n)
    return ('A', n)


def _classical_simple_roots(spec: AlgebraSpec) -> Tuple[List[Tuple[int, ...]], int]:
    r = spec.rank
    dim = r + 1 if spec.series == 'A' else r

    def unit(i, coefficient=1):
        return tuple(coefficient if k == i else 0 for k in range(dim))

    def diff(i, j):
        return tuple((1 if k == i else 0) - (1 if k == j else 0) for k in range(dim))

    if spec.series == 'A':
        roots = [diff(i, i + 1) for i in range(r)]
    elif spec.series == 'B':
        roots = [diff(i, i + 1) for i in range(r - 1)] + [unit(r - 1)]
    elif spec.series == 'C':
        roots = [diff(i, i + 1) for i in range(r - 1)] + [unit(r - 1, 2)]
    else:
        roots = [diff(i, i + 1) for i in range(r - 1)]
        roots.append(tuple(1 if k in (r - 2, r - 1) else 0 for k in range(dim)))
    return roots, dim


def build_root_system(spec: AlgebraSpec) -> RootSystem:
    """Construct the root system of a classical algebra or its untwisted affine extension."""
    coordinates, dim = _classical_simple_roots(spec)
    simple = [Weight.of(c) for c in coordinates]
    # normalize so that the highest root has length squared 2
    unscaled = RootSystem(simple, dim, Fraction(1))
    metric = Fraction(2) / unscaled.norm(unscaled.theta)
    rs = RootSystem(simple, dim, metric, affine=spec.affine, spec=spec)
    logger.debug(f"Built {spec}: {len(rs.positive_finite)} positive finite roots, rho={rs.rho.finite}")
    return rs


def weyl_vector(rs: RootSystem) -> Weight:
    """Return rho (for affine systems its level is the dual Coxeter number, ambient normalization)."""
    return rs.rho


def is_dominant(w: Weight, rs: RootSystem) -> bool:
    return all(p >= 0 for p in rs.simple_pairings(w))


def is_strictly_dominant(w: Weight, rs: RootSystem) -> bool:
    return all(p > 0 for p in rs.simple_pairings(w))


def to_dynkin_labels(w: Weight, rs: RootSystem, integral: bool = False) -> Tuple[Fraction, ...]:
    """Dynkin labels of the finite part of w with respect to the finite simple roots."""
    labels = tuple(rs.pair(w.finite_part(), a) for a in rs.finite_simple)
    if integral and any(label.denominator != 1 for label in labels):
        error_msg = f"Weight {w.finite} has non-integral labels {labels} for {rs.label}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    return labels


def from_dynkin_labels(labels: Sequence, rs: RootSystem, level=0, grade=0) -> Weight:
    """Weight with the given finite Dynkin labels; level is given in the algebra's own normalization."""
    if len(labels) != rs.rank:
        error_msg = f"{rs.label} expects {rs.rank} Dynkin labels, got {len(labels)}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    finite = rs._combine([Fraction(x) for x in labels], rs.fundamental_weights)
    if not rs.affine:
        if level or grade:
            error_msg = f"Finite algebra {rs.label} has no level or grade"
            logger.error(error_msg)
            raise ValueError(error_msg)
        return finite
    return Weight(finite.finite, rs.ambient_level(level), Fraction(grade))


def affine_labels(w: Weight, rs: RootSystem) -> Tuple[Fraction, ...]:
    """Labels (lambda_0, lambda_1, ..., lambda_r) of an affine weight."""
    return tuple(rs.simple_pairings(w))


def format_weight(w: Weight, rs: RootSystem) -> str:
    labels = ",".join(format_number(x) for x in to_dynkin_labels(w, rs))
    if not rs.affine:
        return f"[{labels}]"
    return f"({labels};{format_number(rs.normalized_level(w))};{format_number(w.grade)})"


def weyl_orbit_signed(start: Weight, rs: RootSystem, grade_floor: Optional[int] = None) -> Iterator[SignedOrbitPoint]:
    """Yield every point w(start) with sign det(w), by descending reflections from start.

    Descent only ever subtracts positive multiples of simple roots, and only
    alpha_0 carries grade, so pruning below ``grade_floor`` never hides a
    point above it.
    """
    if rs.affine and grade_floor is None:
        error_msg = f"Orbit enumeration for affine {rs.label} needs a grade floor"
        logger.error(error_msg)
        raise ValueError(error_msg)
    if not is_strictly_dominant(start, rs):
        error_msg = f"Orbit start {start.finite} is not strictly dominant for {rs.label}"
        logger.error(error_msg)
        raise ValueError(error_msg)

    seen = {start}
    queue = deque([SignedOrbitPoint(start, 1, ())])
    while queue:
        point = queue.popleft()
        yield point
        for index, p in enumerate(rs.simple_pairings(point.weight)):
            if p <= 0:
                continue
            image = point.weight - rs.simple_roots[index].scaled(p)
            if grade_floor is not None and image.grade < grade_floor:
                continue
            if image in seen:
                continue
            seen.add(image)
            queue.append(SignedOrbitPoint(image, -point.sign, point.word + (index,)))


def apply_word(w: Weight, word: Sequence[int], rs: RootSystem) -> Weight:
    """Apply the simple reflections of ``word`` to w, first index first."""
    for index in word:
        w = rs.reflect(w, rs.simple_roots[index])
    return w


def weyl_dim(highest_weight: Weight, rs: RootSystem) -> int:
    """Weyl dimension formula, evaluated exactly."""
    labels = [rs.pair(highest_weight, a) for a in rs.finite_simple]
    if any(x < 0 or x.denominator != 1 for x in labels):
        error_msg = f"Weyl dimension needs a dominant integral weight of {rs.label}, got labels {labels}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    shifted = highest_weight.finite_part() + rs.rho.finite_part()
    rho = rs.rho.finite_part()
    value = Fraction(1)
    for root in rs.positive_finite:
        value *= rs.inner(shifted, root) / rs.inner(rho, root)
    if value.denominator != 1 or value <= 0:
        error_msg = f"Weyl dimension evaluated to {value} for {rs.label}"
        logger.error(error_msg)
        raise BranchingError(error_msg)
    return int(value)


def level_dominant_weights(rs: RootSystem, level: int) -> List[Weight]:
    """All dominant integral affine weights of the given level at grade 0."""
    if not rs.affine:
        error_msg = f"{rs.label} is not affine"
        logger.error(error_msg)
        raise ValueError(error_msg)
    marks = rs.comarks()
    weights = []
    for labels in product(*(range(level // m + 1) for m in marks)):
        if sum(m * x for m, x in zip(marks, labels)) <= level:
            weights.append(from_dynkin_labels(labels, rs, level=level))
    return weights
