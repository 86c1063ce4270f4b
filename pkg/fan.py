"""Carrier of the embedding, its sign function and the injection fan."""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Dict, List, Optional, Tuple

from embed import Embedding, OrthogonalPair
from rootdata import BranchingError, RootSystem, Weight, format_weight

logger = logging.getLogger(__name__)


class FanError(BranchingError):
    stage = "fan"


def weight_order_key(w: Weight, a: RootSystem) -> Tuple:
    """Total order on P_a: grade, then height in the simple roots of a, then ambient coordinates."""
    return (w.grade, a.height(w), w.finite)


class FormalElement:
    """Finite sparse element of the group algebra: Weight -> nonzero integer.

    ``cutoff`` bounds the absolute grade of every stored weight; products
    drop anything beyond it.
    """

    def __init__(self, terms: Optional[Dict[Weight, int]] = None, cutoff: Optional[int] = None):
        self.cutoff = cutoff
        self.terms: Dict[Weight, int] = {}
        for w, c in (terms or {}).items():
            self.add_term(w, c)

    def _admits(self, w: Weight) -> bool:
        return self.cutoff is None or abs(w.grade) <= self.cutoff

    def add_term(self, w: Weight, coefficient: int):
        if not coefficient or not self._admits(w):
            return
        value = self.terms.get(w, 0) + coefficient
        if value:
            self.terms[w] = value
        else:
            self.terms.pop(w, None)

    def __getitem__(self, w: Weight) -> int:
        return self.terms.get(w, 0)

    def __contains__(self, w: Weight) -> bool:
        return w in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def items(self):
        return self.terms.items()

    def support(self) -> List[Weight]:
        return list(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalElement):
            return NotImplemented
        return self.terms == other.terms

    def _combined_cutoff(self, other: 'FormalElement') -> Optional[int]:
        cutoffs = [c for c in (self.cutoff, other.cutoff) if c is not None]
        return min(cutoffs) if cutoffs else None

    def __add__(self, other: 'FormalElement') -> 'FormalElement':
        result = FormalElement(self.terms, self._combined_cutoff(other))
        for w, c in other.terms.items():
            result.add_term(w, c)
        return result

    def __neg__(self) -> 'FormalElement':
        return FormalElement({w: -c for w, c in self.terms.items()}, self.cutoff)

    def __sub__(self, other: 'FormalElement') -> 'FormalElement':
        return self + (-other)

    def __mul__(self, other: 'FormalElement') -> 'FormalElement':
        result = FormalElement(cutoff=self._combined_cutoff(other))
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                result.add_term(w1 + w2, c1 * c2)
        return result

    def truncate(self, cutoff: int) -> 'FormalElement':
        return FormalElement({w: c for w, c in self.terms.items() if abs(w.grade) <= cutoff}, cutoff)

    def grade_slice(self, grade) -> 'FormalElement':
        """Terms of one grade, with level and grade stripped."""
        return FormalElement({w.finite_part(): c for w, c in self.terms.items() if w.grade == grade})

    def map_weights(self, f: Callable[[Weight], Weight]) -> 'FormalElement':
        result = FormalElement(cutoff=self.cutoff)
        for w, c in self.terms.items():
            result.add_term(f(w), c)
        return result

    def sorted_items(self, a: RootSystem, descending: bool = True) -> List[Tuple[Weight, int]]:
        return sorted(self.terms.items(), key=lambda item: weight_order_key(item[0], a), reverse=descending)

    def to_json(self, a: RootSystem) -> List[Dict]:
        return [{"weight": format_weight(w, a), "coeff": c} for w, c in self.sorted_items(a)]

    def __repr__(self) -> str:
        return f"FormalElement({len(self.terms)} terms, cutoff={self.cutoff})"


@dataclass
class Fan:
    """Injection fan: lowest carrier vector gamma0, s(gamma0) and s(gamma + gamma0) on the fan."""

    gamma0: Weight
    s_gamma0: int
    shifted_terms: Dict[Weight, int] = field(default_factory=dict)
    cutoff: Optional[int] = None

    def carrier(self) -> FormalElement:
        """Rebuild the carrier s(gamma) from the fan."""
        phi = FormalElement(cutoff=self.cutoff)
        phi.add_term(self.gamma0, self.s_gamma0)
        for gamma, s in self.shifted_terms.items():
            phi.add_term(gamma + self.gamma0, s)
        return phi

    def restricted(self, cutoff: int) -> 'Fan':
        return Fan(self.gamma0, self.s_gamma0,
                   {g: s for g, s in self.shifted_terms.items() if g.grade <= cutoff}, cutoff)

    def rows(self, a: RootSystem) -> List[Tuple[Weight, int]]:
        return sorted(self.shifted_terms.items(), key=lambda item: weight_order_key(item[0], a))

    def __len__(self) -> int:
        return len(self.shifted_terms)


def _binomial_factor(v: Weight, exponent: int, cutoff: Optional[int]) -> FormalElement:
    """(1 - y^v)^exponent, truncated at the grade cutoff."""
    factor = FormalElement(cutoff=cutoff)
    if exponent > 0:
        for j in range(exponent + 1):
            factor.add_term(v.scaled(j), (-1) ** j * comb(exponent, j))
        return factor
    m = -exponent
    if v.grade <= 0 or cutoff is None:
        error_msg = f"Exponent {exponent} at {v.finite} (grade {v.grade}) would need an infinite series"
        logger.error(error_msg)
        raise FanError(error_msg)
    j = 0
    while v.grade * j <= cutoff:
        factor.add_term(v.scaled(j), comb(m + j - 1, j))
        j += 1
    return factor


def carrier_exponents(embedding: Embedding, orth: OrthogonalPair, cutoff: Optional[int] = None) -> Dict[Weight, int]:
    """Exponent of (1 - e^{-v}) for every projected root v, with the a-roots divided out."""
    g, a = embedding.g, embedding.a
    perp = set(orth.delta_perp_plus)
    exponents: Dict[Weight, int] = defaultdict(int)
    for root, mult in g.positive_roots_upto(cutoff or 0):
        if root.grade == 0 and root in perp:
            continue
        v = embedding.project(root)
        if v.is_zero():
            error_msg = f"Root {root.finite} projects to zero but is not orthogonal to {a.label}"
            logger.error(error_msg)
            raise FanError(error_msg)
        exponents[v] += mult
    for root, mult in a.positive_roots_upto(cutoff or 0):
        exponents[root] -= mult
    return {v: e for v, e in exponents.items() if e}


def expand_fan_product(embedding: Embedding, orth: OrthogonalPair, cutoff: Optional[int] = None) -> FormalElement:
    """Expand the carrier product; the result maps gamma to s(gamma)."""
    if embedding.g.affine and cutoff is None:
        error_msg = f"Affine embedding {embedding} needs a grade cutoff"
        logger.error(error_msg)
        raise ValueError(error_msg)
    if not embedding.g.affine:
        cutoff = None

    exponents = carrier_exponents(embedding, orth, cutoff)
    factors = [_binomial_factor(v, e, cutoff) for v, e in exponents.items()]
    factors.sort(key=len)

    product = FormalElement({Weight.zero(embedding.g.dim): 1}, cutoff)
    for factor in factors:
        product = product * factor
    phi = -product
    logger.info(f"Carrier for {embedding}: {len(exponents)} factors, {len(phi)} terms")
    return phi


def extract_fan(phi: FormalElement, a: RootSystem) -> Fan:
    """Split the carrier into its lowest vector and the fan."""
    if not len(phi):
        error_msg = "Cannot extract a fan from an empty carrier"
        logger.error(error_msg)
        raise FanError(error_msg)
    gamma0 = min(phi.support(), key=lambda w: weight_order_key(w, a))
    shifted = {w - gamma0: c for w, c in phi.items() if w != gamma0}
    fan = Fan(gamma0, phi[gamma0], shifted, phi.cutoff)
    logger.info(f"Fan: gamma0={gamma0.finite} (grade {gamma0.grade}), s(gamma0)={fan.s_gamma0}, {len(shifted)} vectors")
    return fan


def compute_fan(embedding: Embedding, orth: OrthogonalPair, cutoff: Optional[int] = None) -> Fan:
    return extract_fan(expand_fan_product(embedding, orth, cutoff), embedding.a)
