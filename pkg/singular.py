"""Generalized singular element: representatives U of W/W_perp and their signed a_perp dimensions."""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from dotenv import load_dotenv

from embed import Embedding, EmbeddingSpec, OrthogonalPair
from fan import FormalElement
from rootdata import (BranchingError, RootSystem, Weight, affine_labels, apply_word, is_dominant,
                      weyl_dim, weyl_orbit_signed)

load_dotenv()

logger = logging.getLogger(__name__)

CACHE_COSET_REPRESENTATIVES = os.getenv('CACHE_COSET_REPRESENTATIVES', 'true').strip().lower() in ('1', 'true', 'yes')


@dataclass(frozen=True)
class UPoint:
    """One kept representative u: u(mu+rho)-rho with its sign and both projections."""

    weight: Weight
    sign: int
    mu_perp: Weight
    mu_a: Weight
    word: Tuple[int, ...] = ()


@dataclass
class SingularElement:
    terms: FormalElement
    source: Weight
    cutoff: Optional[int] = None
    points: List[UPoint] = field(default_factory=list, repr=False)


class CosetCache:
    """Reflection words of the kept representatives, per finite embedding.

    For finite g the kept set does not depend on the highest weight: u is kept
    iff u^{-1} maps the positive a_perp roots to positive roots.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._words: Dict[EmbeddingSpec, List[Tuple[int, ...]]] = {}
        self.hits = 0

    def get(self, spec: EmbeddingSpec) -> Optional[List[Tuple[int, ...]]]:
        words = self._words.get(spec) if self.enabled else None
        if words is not None:
            self.hits += 1
        return words

    def put(self, spec: EmbeddingSpec, words: List[Tuple[int, ...]]):
        if self.enabled:
            self._words[spec] = list(words)

    def clear(self):
        self._words.clear()
        self.hits = 0

    def __len__(self) -> int:
        return len(self._words)


DEFAULT_CACHE = CosetCache(enabled=CACHE_COSET_REPRESENTATIVES)


def _check_highest_weight(mu: Weight, g: RootSystem):
    labels = affine_labels(mu, g)
    if not is_dominant(mu, g) or any(x.denominator != 1 for x in labels):
        error_msg = f"Highest weight {mu.finite} (level {mu.level}) is not dominant integral for {g.label}"
        logger.error(error_msg)
        raise ValueError(error_msg)


def _u_point(point: Weight, sign: int, word: Tuple[int, ...], embedding: Embedding,
             orth: OrthogonalPair) -> UPoint:
    mu_perp = orth.project_perp_tilde(point) - orth.defect_perp
    mu_a = embedding.project(point) + orth.defect_perp
    return UPoint(point, sign, mu_perp, mu_a, word)


def select_U(mu: Weight, embedding: Embedding, orth: OrthogonalPair, cutoff: Optional[int] = None,
             cache: Optional[CosetCache] = None) -> List[UPoint]:
    """Signed orbit points of mu+rho whose shifted a_perp projection is a_perp-dominant."""
    g = embedding.g
    _check_highest_weight(mu, g)
    if g.affine and cutoff is None:
        error_msg = f"Affine algebra {g.label} needs a grade cutoff"
        logger.error(error_msg)
        raise ValueError(error_msg)
    shifted = mu + g.rho

    if cache is not None and not g.affine:
        words = cache.get(embedding.spec)
        if words is not None:
            points = [_u_point(apply_word(shifted, w, g) - g.rho, (-1) ** len(w), w, embedding, orth) for w in words]
            logger.debug(f"Coset representatives for {embedding} taken from cache ({len(points)})")
            return points

    floor = mu.grade - cutoff if g.affine else None
    kept, total = [], 0
    for point in weyl_orbit_signed(shifted, g, grade_floor=floor):
        total += 1
        candidate = _u_point(point.weight - g.rho, point.sign, point.word, embedding, orth)
        if is_dominant(candidate.mu_perp, orth.a_perp):
            kept.append(candidate)
    logger.info(f"Orbit of {mu.finite}+rho in {g.label}: {total} points, |U|={len(kept)}")

    if cache is not None and not g.affine:
        cache.put(embedding.spec, [p.word for p in kept])
    return kept


def build_singular_element(mu: Weight, embedding: Embedding, orth: OrthogonalPair, cutoff: Optional[int] = None,
                           cache: Optional[CosetCache] = None) -> SingularElement:
    """Attach eps(u) * dim L_{a_perp}^{mu_perp(u)} to pi_a[u(mu+rho)-rho]."""
    if cache is None:
        cache = DEFAULT_CACHE
    points = select_U(mu, embedding, orth, cutoff, cache)
    terms = FormalElement(cutoff=cutoff if embedding.g.affine else None)
    for u in points:
        perp_part = orth.project_perp(u.weight) - orth.defect_perp
        try:
            dimension = weyl_dim(perp_part, orth.a_perp)
        except ValueError as e:
            error_msg = f"a_perp weight {perp_part.finite} of {u.weight.finite} is not dominant integral: {e}"
            logger.error(error_msg)
            raise BranchingError(error_msg, stage="singular")
        terms.add_term(embedding.project(u.weight), u.sign * dimension)
    logger.info(f"Singular element of {mu.finite} for {embedding}: {len(terms)} terms")
    return SingularElement(terms, mu, cutoff, points)
