"""Conformal-field-theory layer built on branching tables.

Central charges, the conformal-embedding test, modular anomalies, coset
characters and the assembly of modular-invariant partition functions for
conformal embeddings.  Everything is exact; q-powers are Fractions.
"""
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from dotenv import load_dotenv

from branch import BranchingTable, branch, format_qseries
from embed import Embedding, orthogonal_pair
from fan import compute_fan, weight_order_key
from rootdata import (AlgebraSpec, BranchingError, RootSystem, Weight, build_root_system, format_number,
                      format_weight, int_setting, is_dominant, level_dominant_weights)

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_MAX_GRADE = int_setting('DEFAULT_MAX_GRADE', 6)  # grade cutoff when a job gives none
NORMALIZATIONS = ('short', 'long')
COSET_NORMALIZATION = os.getenv('COSET_NORMALIZATION', 'short').strip().lower()
if COSET_NORMALIZATION not in NORMALIZATIONS:
    logger.warning(f"Invalid COSET_NORMALIZATION {COSET_NORMALIZATION!r}; using 'short'")
    COSET_NORMALIZATION = 'short'


class ConformalError(BranchingError):
    stage = "cft"


@dataclass
class QSeries:
    """q^{prefactor_exponent} * sum_n coefficients[n] q^n."""

    prefactor_exponent: Fraction
    coefficients: List[int] = field(default_factory=list)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def __str__(self) -> str:
        return f"q^({format_number(self.prefactor_exponent)}) * ({format_qseries(self.coefficients)})"

    def to_json(self) -> Dict:
        return {"prefactor_exponent": format_number(self.prefactor_exponent), "coefficients": self.coefficients}


@dataclass
class PartitionFunction:
    """Sesquilinear mass matrix over level-k dominant weights of a."""

    a: RootSystem
    weights: List[Weight]
    mass: Dict[Tuple[Weight, Weight], int] = field(default_factory=dict)
    blocks: List[Tuple[int, Tuple[Tuple[Weight, int], ...]]] = field(default_factory=list)

    def entry(self, nu: Weight, lam: Weight) -> int:
        return self.mass.get((nu, lam), 0)

    def is_symmetric(self) -> bool:
        return all(self.entry(lam, nu) == m for (nu, lam), m in self.mass.items())

    def trace(self) -> int:
        return sum(m for (nu, lam), m in self.mass.items() if nu == lam)

    def render(self) -> str:
        """|chi_1 + chi_2|^2 form, one term per distinct decomposition."""
        parts = []
        for count, block in self.blocks:
            inner = " + ".join(self._chi(nu) if c == 1 else f"{c}{self._chi(nu)}" for nu, c in block)
            prefix = "" if count == 1 else str(count)
            parts.append(f"{prefix}|{inner}|^2")
        return "Z = " + " + ".join(parts)

    def _chi(self, nu: Weight) -> str:
        return f"chi_{format_weight(nu, self.a)}"

    def to_json(self) -> Dict:
        labels = [format_weight(nu, self.a) for nu in self.weights]
        matrix = [[self.entry(nu, lam) for lam in self.weights] for nu in self.weights]
        return {"weights": labels, "mass_matrix": matrix, "rendered": self.render()}


def central_charge(spec: AlgebraSpec, level) -> Fraction:
    """Sugawara central charge k dim g / (k + h^vee)."""
    rs = build_root_system(spec.finite)
    level = Fraction(level)
    if level + rs.dual_coxeter == 0:
        error_msg = f"Level {level} is critical for {spec.finite}"
        logger.error(error_msg)
        raise ConformalError(error_msg)
    return level * rs.dimension / (level + rs.dual_coxeter)


def is_conformal(embedding: Embedding, level) -> Dict:
    """Compare c(g, k) with c(a, x_e k); the report also says whether Delta_perp is empty."""
    orth = orthogonal_pair(embedding)
    level = Fraction(level)
    c_g = central_charge(embedding.spec.g_spec, level)
    c_a = central_charge(embedding.spec.a_spec, orth.x_e * level)
    conformal = c_g == c_a
    perp_empty = not orth.delta_perp_plus
    if conformal and not perp_empty:
        logger.warning(f"{embedding} has equal central charges but a nonempty orthogonal root set")
    logger.info(f"Central charges for {embedding} at level {level}: c_g={c_g}, c_a={c_a}, x_e={orth.x_e}")
    return {
        'success': True,
        'conformal': conformal,
        'c_g': c_g,
        'c_a': c_a,
        'x_e': orth.x_e,
        'perp_empty': perp_empty,
    }


def _normalized_norm(x: Weight, rs: RootSystem, normalization: str) -> Fraction:
    if normalization == 'long':
        scale = rs.theta_norm
    else:
        scale = min(rs.inner(a, a) for a in rs.finite_simple)
    return 2 * rs.inner(x, x) / scale


def modular_anomaly(mu: Weight, rs: RootSystem, level, normalization: Optional[str] = None) -> Fraction:
    """m_mu = |mu+rho|^2 / 2(k+g) - |rho|^2 / 2g, on finite parts."""
    normalization = normalization or COSET_NORMALIZATION
    if normalization not in NORMALIZATIONS:
        error_msg = f"Unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    level = Fraction(level)
    g = rs.dual_coxeter
    rho = rs.rho.finite_part()
    shifted = mu.finite_part() + rho
    return (_normalized_norm(shifted, rs, normalization) / (2 * (level + g))
            - _normalized_norm(rho, rs, normalization) / (2 * g))


def coset_characters(table: BranchingTable, mu: Weight, embedding: Embedding, level,
                     requested: Optional[Iterable[Weight]] = None,
                     normalization: Optional[str] = None) -> Dict[Weight, QSeries]:
    """chi_nu(q) = q^{m_mu - m_nu} b_nu(q) for every branching function, or for ``requested`` weights."""
    g, a = embedding.g, embedding.a
    level = Fraction(level)
    a_level = embedding_level(embedding, level)
    m_mu = modular_anomaly(mu, g, level, normalization)
    functions = table.branching_functions()
    depth = table.cutoff or 0

    targets = list(requested) if requested is not None else sorted(
        functions, key=lambda w: weight_order_key(w, a), reverse=True)
    characters = {}
    for nu in targets:
        nu = nu.with_grade(mu.grade)
        if a.affine and (not is_dominant(nu, a) or a.normalized_level(nu) != a_level):
            error_msg = f"No branching function for {format_weight(nu, a)}: not a dominant weight of level {a_level}"
            logger.error(error_msg)
            raise ConformalError(error_msg)
        coefficients = functions.get(nu, [0] * (depth + 1))
        characters[nu] = QSeries(m_mu - modular_anomaly(nu, a, a_level, normalization), coefficients)
    return characters


def embedding_level(embedding: Embedding, level) -> Fraction:
    return orthogonal_pair(embedding).x_e * Fraction(level)


def assemble_partition_function(embedding: Embedding, level: int, cutoff: Optional[int] = None) -> PartitionFunction:
    """Substitute branchings into the diagonal invariant of g and collect the mass matrix of a."""
    report = is_conformal(embedding, level)
    if not report['conformal']:
        error_msg = f"{embedding} is not conformal at level {level}: c_g={report['c_g']}, c_a={report['c_a']}"
        logger.error(error_msg)
        raise ConformalError(error_msg)
    g, a = embedding.g, embedding.a
    if not g.affine:
        error_msg = f"Partition functions need an affine embedding, got {embedding}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    cutoff = cutoff if cutoff is not None else DEFAULT_MAX_GRADE

    orth = orthogonal_pair(embedding)
    fan = compute_fan(embedding, orth, cutoff)
    vectors = []
    for mu in level_dominant_weights(g, level):
        table = branch(mu, embedding, cutoff, orth=orth, fan=fan)
        b: Dict[Weight, int] = {}
        for nu, coeff in table.entries.items():
            key = nu.with_grade(mu.grade)
            b[key] = b.get(key, 0) + coeff
        vectors.append(b)

    weights = sorted({nu for b in vectors for nu in b}, key=lambda w: weight_order_key(w, a), reverse=True)
    mass: Dict[Tuple[Weight, Weight], int] = {}
    for b in vectors:
        for nu, x in b.items():
            for lam, y in b.items():
                mass[(nu, lam)] = mass.get((nu, lam), 0) + x * y

    blocks = Counter()
    order = []
    for b in vectors:
        block = tuple(sorted(b.items(), key=lambda item: weight_order_key(item[0], a), reverse=True))
        if block not in blocks:
            order.append(block)
        blocks[block] += 1
    pf = PartitionFunction(a, weights, mass, [(blocks[block], block) for block in order])
    logger.info(f"Partition function for {embedding} at level {level}: {pf.render()}")
    return pf
