"""Anomalous branching coefficients by the fan recurrence, and branching tables.

``branch`` is the whole pipeline: orthogonal pair, fan, singular element,
recurrence, dominant extraction.  The fan only depends on the embedding, so
callers that branch many modules should compute it once and pass it in.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from embed import Embedding, OrthogonalPair, orthogonal_pair
from fan import Fan, FormalElement, compute_fan, weight_order_key
from rootdata import (BranchingError, RootSystem, Weight, format_weight, is_dominant,
                      to_dynkin_labels, weyl_dim)
from singular import CosetCache, SingularElement, build_singular_element

logger = logging.getLogger(__name__)


class RecurrenceError(BranchingError):
    stage = "branch"


@dataclass
class AnomalousTable:
    terms: FormalElement
    cutoff: Optional[int] = None
    window: Set[Weight] = field(default_factory=set, repr=False)


@dataclass
class BranchingTable:
    """Branching coefficients b_nu of L^mu restricted to a, keyed by dominant a-weights."""

    a: RootSystem
    mu: Weight
    entries: Dict[Weight, int] = field(default_factory=dict)
    cutoff: Optional[int] = None

    def __getitem__(self, nu: Weight) -> int:
        return self.entries.get(nu, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def by_labels(self) -> Dict[Tuple, int]:
        """Finite tables keyed by Dynkin labels; affine ones by (labels, grade)."""
        result = {}
        for nu, coeff in self.entries.items():
            labels = tuple(int(x) for x in to_dynkin_labels(nu, self.a))
            result[(labels, int(nu.grade)) if self.a.affine else labels] = coeff
        return result

    def branching_functions(self) -> Dict[Weight, List[int]]:
        """b_nu(q) = sum_n b_{(nu; k; -n)} q^n, one dense coefficient list per grade-0 class."""
        depth = self.cutoff or 0
        functions: Dict[Weight, List[int]] = {}
        for nu, coeff in self.entries.items():
            n = int(self.mu.grade - nu.grade)
            series = functions.setdefault(nu.with_grade(self.mu.grade), [0] * (depth + 1))
            series[n] += coeff
        return functions

    def rows(self) -> List[Tuple[Weight, int]]:
        return sorted(self.entries.items(), key=lambda item: weight_order_key(item[0], self.a), reverse=True)

    def dimension_total(self) -> int:
        """Sum of b_nu * dim L_a^nu (finite tables only)."""
        return sum(coeff * weyl_dim(nu, self.a) for nu, coeff in self.entries.items())

    def to_json(self, module: str = "", embedding: Optional[Dict] = None) -> Dict:
        data = {
            "module": module,
            "embedding": embedding or {},
            "branching": [{"nu": format_weight(nu, self.a), "coeff": coeff} for nu, coeff in self.rows()],
        }
        if self.a.affine:
            functions = self.branching_functions()
            order = sorted(functions, key=lambda w: weight_order_key(w, self.a), reverse=True)
            data["branching_functions"] = {format_weight(nu, self.a): functions[nu] for nu in order}
        return data


def format_qseries(coefficients: List[int]) -> str:
    parts = []
    for n, c in enumerate(coefficients):
        if not c:
            continue
        magnitude = abs(c)
        if n == 0:
            term = str(magnitude)
        else:
            power = "q" if n == 1 else f"q^{n}"
            term = power if magnitude == 1 else f"{magnitude}{power}"
        if not parts:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {term}")
    return " ".join(parts) if parts else "0"


def _window_contains(xi: Weight, sing: SingularElement, a: RootSystem, cutoff: Optional[int]) -> bool:
    """Norm bound that every weight with a nonzero anomalous coefficient satisfies."""
    mu = sing.source
    t = xi.grade - mu.grade
    if t > 0 or (cutoff is not None and t < -cutoff):
        return False
    level = mu.level
    rho = a.rho.finite_part()
    weight_bound = a.norm(mu.finite_part()) - 2 * level * t
    bound = 2 * weight_bound + 2 * a.norm(rho) - 2 * (level + a.rho.level) * t
    return a.norm(xi.finite_part() + rho) <= bound


def solve_recurrence(sing: SingularElement, fan: Fan, a: RootSystem, cutoff: Optional[int] = None) -> AnomalousTable:
    """Sweep the window from the top and solve for every k_xi."""
    if a.affine:
        if cutoff is None:
            error_msg = f"Affine subalgebra {a.label} needs a grade cutoff"
            logger.error(error_msg)
            raise ValueError(error_msg)
        for name, have in (("fan", fan.cutoff), ("singular element", sing.cutoff)):
            if have is None or have < cutoff:
                error_msg = f"The {name} was computed to grade {have}, the recurrence needs {cutoff}"
                logger.error(error_msg)
                raise RecurrenceError(error_msg)
    else:
        cutoff = None

    gamma0 = fan.gamma0
    fan_vectors = list(fan.shifted_terms.items())
    start = [p + gamma0 for p in sing.terms.support()]
    window = {xi for xi in start if _window_contains(xi, sing, a, cutoff)}
    frontier = list(window)
    while frontier:
        xi = frontier.pop()
        for gamma, _ in fan_vectors:
            lower = xi - gamma
            if lower not in window and _window_contains(lower, sing, a, cutoff):
                window.add(lower)
                frontier.append(lower)
    logger.info(f"Recurrence window: {len(window)} weights")

    k = FormalElement()
    for xi in sorted(window, key=lambda w: weight_order_key(w, a), reverse=True):
        total = sing.terms[xi - gamma0]
        for gamma, s in fan_vectors:
            total += s * k[xi + gamma]
        if total % fan.s_gamma0:
            error_msg = f"Non-exact division by s(gamma0)={fan.s_gamma0} at {xi.finite}, grade {xi.grade}"
            logger.error(error_msg)
            raise RecurrenceError(error_msg)
        k.add_term(xi, -total // fan.s_gamma0)
    return AnomalousTable(k, cutoff, window)


def recurrence_residual(table: AnomalousTable, sing: SingularElement, fan: Fan) -> Dict[Weight, int]:
    """Evaluate the linear relation between singular weights and anomalous coefficients; nonzero entries only."""
    carrier = fan.carrier()
    residuals = {}
    for point in table.window:
        xi = point - fan.gamma0
        value = sing.terms[xi]
        for gamma, s in carrier.items():
            value += s * table.terms[xi + gamma]
        if value:
            residuals[xi] = value
    return residuals


def extract_branching(anom: AnomalousTable, a: RootSystem, mu: Optional[Weight] = None) -> BranchingTable:
    """Keep the anomalous coefficients that sit in the closed dominant chamber of a."""
    table = BranchingTable(a, mu if mu is not None else Weight.zero(a.dim), cutoff=anom.cutoff)
    for nu, coeff in anom.terms.items():
        if not is_dominant(nu, a):
            continue
        if any(x.denominator != 1 for x in a.simple_pairings(nu)):
            logger.warning(f"Non-integral dominant weight {nu.finite} carries coefficient {coeff}; skipped")
            continue
        if coeff < 0:
            error_msg = f"Negative branching coefficient {coeff} at {format_weight(nu, a)}"
            logger.error(error_msg)
            raise RecurrenceError(error_msg)
        table.entries[nu] = coeff
    logger.info(f"Extracted {len(table)} branching coefficients")
    return table


def branch(mu: Weight, embedding: Embedding, cutoff: Optional[int] = None, orth: Optional[OrthogonalPair] = None,
           fan: Optional[Fan] = None, cache: Optional[CosetCache] = None) -> BranchingTable:
    """Branching coefficients of L^mu restricted to the embedded subalgebra."""
    if embedding.g.affine and cutoff is None:
        error_msg = f"Affine embedding {embedding} needs a grade cutoff"
        logger.error(error_msg)
        raise ValueError(error_msg)
    orth = orth or orthogonal_pair(embedding)
    fan = fan or compute_fan(embedding, orth, cutoff)
    sing = build_singular_element(mu, embedding, orth, cutoff, cache)
    anom = solve_recurrence(sing, fan, embedding.a, cutoff)
    return extract_branching(anom, embedding.a, mu)


def format_table(table: BranchingTable) -> str:
    lines = []
    for nu, coeff in table.rows():
        lines.append(f"{format_weight(nu, table.a)}\t{coeff}")
    return "\n".join(lines)


def format_branching_functions(table: BranchingTable) -> str:
    functions = table.branching_functions()
    order = sorted(functions, key=lambda w: weight_order_key(w, table.a), reverse=True)
    return "\n".join(f"b_{format_weight(nu, table.a)}(q) = {format_qseries(functions[nu])}" for nu in order)
