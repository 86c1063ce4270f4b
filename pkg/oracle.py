"""Brute-force verification path: Freudenthal multiplicities and project-and-peel branching."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from dotenv import load_dotenv

from branch import BranchingTable
from embed import Embedding
from fan import weight_order_key
from rootdata import BranchingError, RootSystem, Weight, affine_labels, format_weight, int_setting, is_dominant

load_dotenv()

logger = logging.getLogger(__name__)

ORACLE_MAX_ENTRIES = int_setting('ORACLE_MAX_ENTRIES', 1000000)  # resource bound for weight diagrams


class OracleError(BranchingError):
    stage = "oracle"


@dataclass
class WeightDiagram:
    highest: Weight
    rs: RootSystem
    multiplicities: Dict[Weight, int] = field(default_factory=dict)
    cutoff: Optional[int] = None

    def __getitem__(self, w: Weight) -> int:
        return self.multiplicities.get(w, 0)

    def __len__(self) -> int:
        return len(self.multiplicities)

    def dimension(self) -> int:
        return sum(self.multiplicities.values())


def _dominant_conjugate(w: Weight, rs: RootSystem) -> Weight:
    while True:
        for alpha, p in zip(rs.simple_roots, rs.simple_pairings(w)):
            if p < 0:
                w = w - alpha.scaled(p)
                break
        else:
            return w


def _is_weight(w: Weight, mu: Weight, rs: RootSystem) -> bool:
    """w is a weight of L^mu iff its dominant conjugate lies below mu."""
    diff = mu - _dominant_conjugate(w, rs)
    finite = diff.finite_part()
    if rs.affine:
        if diff.grade < 0 or diff.grade.denominator != 1:
            return False
        finite = finite + rs.theta.scaled(diff.grade)
    return all(c >= 0 and c.denominator == 1 for c in rs.simple_coefficients(finite))


def freudenthal_multiplicities(mu: Weight, rs: RootSystem, cutoff: Optional[int] = None,
                               max_entries: Optional[int] = None) -> WeightDiagram:
    """Weight multiplicities of L^mu, layer by layer below the highest weight.

    Affine diagrams keep the weights at most ``cutoff`` grades below mu.
    """
    labels = affine_labels(mu, rs)
    if not is_dominant(mu, rs) or any(x.denominator != 1 for x in labels):
        error_msg = f"Freudenthal needs a dominant integral weight of {rs.label}, got labels {labels}"
        logger.error(error_msg)
        raise ValueError(error_msg)
    if rs.affine and cutoff is None:
        error_msg = f"Weight diagram of affine {rs.label} needs a grade cutoff"
        logger.error(error_msg)
        raise ValueError(error_msg)
    if rs.affine and mu.level == 0:
        # level-zero integrable modules are one-dimensional
        return WeightDiagram(mu, rs, {mu: 1}, cutoff)
    limit = max_entries or ORACLE_MAX_ENTRIES

    roots = rs.positive_roots_upto(cutoff or 0)
    shifted_norm = rs.norm(mu + rs.rho)
    floor = mu.grade - cutoff if rs.affine else None
    diagram = WeightDiagram(mu, rs, {mu: 1}, cutoff)

    layer = [mu]
    while layer:
        candidates = []
        seen = set()
        for w in layer:
            for alpha in rs.simple_roots:
                child = w - alpha
                if child in seen or (floor is not None and child.grade < floor):
                    continue
                seen.add(child)
                candidates.append(child)
        layer = []
        for w in sorted(candidates, key=lambda x: x.finite):
            if not _is_weight(w, mu, rs):
                continue
            denominator = shifted_norm - rs.norm(w + rs.rho)
            if denominator <= 0:
                error_msg = f"Weight {w.finite} of {format_weight(mu, rs)} has |w+rho| >= |mu+rho|"
                logger.error(error_msg)
                raise OracleError(error_msg)
            numerator = 0
            for alpha, mult in roots:
                step = w + alpha
                while diagram[step]:
                    numerator += mult * diagram[step] * rs.inner(step, alpha)
                    step = step + alpha
            value = 2 * numerator / denominator
            if value.denominator != 1:
                error_msg = f"Non-integral multiplicity {value} at {w.finite} in {rs.label}"
                logger.error(error_msg)
                raise OracleError(error_msg)
            if value:
                diagram.multiplicities[w] = int(value)
                layer.append(w)
        if len(diagram) > limit:
            error_msg = f"Weight diagram of {format_weight(mu, rs)} exceeds {limit} entries"
            logger.error(error_msg)
            raise OracleError(error_msg)
    logger.info(f"Weight diagram of {format_weight(mu, rs)} in {rs.label}: {len(diagram)} weights, "
                f"total multiplicity {diagram.dimension()}")
    return diagram


def brute_force_branch(mu: Weight, embedding: Embedding, cutoff: Optional[int] = None,
                       max_entries: Optional[int] = None) -> BranchingTable:
    """Project the weight diagram of L^mu and peel off subalgebra modules from the top."""
    g, a = embedding.g, embedding.a
    if not g.affine:
        cutoff = None
    diagram = freudenthal_multiplicities(mu, g, cutoff, max_entries)

    residue: Dict[Weight, int] = {}
    for w, m in diagram.multiplicities.items():
        p = embedding.project(w)
        residue[p] = residue.get(p, 0) + m

    table = BranchingTable(a, mu, cutoff=cutoff)
    while residue:
        nu = max(residue, key=lambda w: weight_order_key(w, a))
        b = residue[nu]
        if b < 0 or not is_dominant(nu, a):
            error_msg = f"Residue has {b} at the non-highest weight {nu.finite}, grade {nu.grade}"
            logger.error(error_msg)
            raise OracleError(error_msg)
        table.entries[nu] = b
        depth = int(nu.grade - mu.grade + cutoff) if cutoff is not None else None
        piece = freudenthal_multiplicities(nu, a, depth, max_entries)
        for w, m in piece.multiplicities.items():
            value = residue.get(w, 0) - b * m
            if value:
                residue[w] = value
            else:
                residue.pop(w, None)
    logger.info(f"Peeled {len(table)} modules of {a.label} from {format_weight(mu, g)}")
    return table


def diff_tables(engine: BranchingTable, oracle: BranchingTable) -> Dict[Weight, List[int]]:
    """Weights where two tables disagree, mapped to [engine, oracle]."""
    keys = set(engine.entries) | set(oracle.entries)
    return {nu: [engine[nu], oracle[nu]] for nu in keys if engine[nu] != oracle[nu]}
