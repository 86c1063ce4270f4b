"""End-to-end checks of the worked examples: two finite embeddings, a conformal
affine embedding and an affine coset."""
import logging
from fractions import Fraction

import pytest

from branch import branch, format_branching_functions, recurrence_residual, solve_recurrence
from cft import assemble_partition_function, coset_characters, is_conformal
from embed import orthogonal_pair
from fan import compute_fan
from rootdata import Weight, from_dynkin_labels, to_dynkin_labels, weyl_orbit_signed
from singular import CosetCache, build_singular_element, select_U

logger = logging.getLogger(__name__)


def labels_of(weight, rs):
    return tuple(int(x) for x in to_dynkin_labels(weight, rs))


def test_finite_a1_in_b2(a1_b2):
    orth = orthogonal_pair(a1_b2)
    fan = compute_fan(a1_b2, orth)
    assert {labels_of(g, a1_b2.a): s for g, s in fan.shifted_terms.items()} == {(1,): 2, (2,): -1}

    mu = from_dynkin_labels([1, 0], a1_b2.g)
    sing = build_singular_element(mu, a1_b2, orth, cache=CosetCache(enabled=False))
    anom = solve_recurrence(sing, fan, a1_b2.a)
    # k_0 = -k_2 + 2 k_1 - 3
    k = {labels_of(w, a1_b2.a): c for w, c in anom.terms.items()}
    assert k[(0,)] == -k.get((2,), 0) + 2 * k[(1,)] - 3 == 1
    assert branch(mu, a1_b2).by_labels() == {(1,): 2, (0,): 1}


def test_finite_b2_in_b4(b2_b4):
    orth = orthogonal_pair(b2_b4)
    mu = from_dynkin_labels([0, 1, 0, 2], b2_b4.g)
    assert len(list(weyl_orbit_signed(mu + b2_b4.g.rho, b2_b4.g))) == 384
    assert len(select_U(mu, b2_b4, orth, cache=CosetCache(enabled=False))) == 48
    assert orth.defect_perp == Weight.of([-2, -2, 0, 0])
    assert orth.a_perp_type == 'B2' and len(orth.delta_perp_plus) == 4

    table = branch(mu, b2_b4)
    assert table.by_labels() == {(0, 0): 6, (0, 2): 60, (1, 0): 30, (2, 0): 19, (1, 2): 40, (0, 4): 10}
    assert table.dimension_total() == 2772


def test_conformal_special_embedding(a1_a2_special):
    report = is_conformal(a1_a2_special, 1)
    assert report['conformal'] and report['c_g'] == report['c_a'] == 2
    assert report['perp_empty']

    fan = compute_fan(a1_a2_special, orthogonal_pair(a1_a2_special), 6)
    assert fan.gamma0.is_zero() and fan.s_gamma0 == -1

    supports = {}
    for labels in ([0, 0], [1, 0], [0, 1]):
        table = branch(from_dynkin_labels(labels, a1_a2_special.g, level=1), a1_a2_special, cutoff=6)
        supports[tuple(labels)] = sorted((labels_of(nu, a1_a2_special.a), c) for nu, c in table.entries.items())
    assert supports == {(0, 0): [((0,), 1), ((4,), 1)], (1, 0): [((2,), 1)], (0, 1): [((2,), 1)]}

    pf = assemble_partition_function(a1_a2_special, 1, cutoff=3)
    assert pf.render() == "Z = |chi_(4;4;0) + chi_(0;4;0)|^2 + 2|chi_(2;4;0)|^2"


@pytest.mark.slow
def test_affine_coset_to_grade_12(a1_b2, a1_b2_affine):
    mu = from_dynkin_labels([1, 0], a1_b2_affine.g, level=1)
    orth = orthogonal_pair(a1_b2_affine)
    fan = compute_fan(a1_b2_affine, orth, 12)
    sing = build_singular_element(mu, a1_b2_affine, orth, 12)
    anom = solve_recurrence(sing, fan, a1_b2_affine.a, 12)
    assert recurrence_residual(anom, sing, fan) == {}

    table = branch(mu, a1_b2_affine, cutoff=12, orth=orth, fan=fan)
    logger.info(f"Branching functions:\n{format_branching_functions(table)}")
    functions = {labels_of(nu, a1_b2_affine.a): series for nu, series in table.branching_functions().items()}
    assert functions[(0,)] == [1, 4, 8, 15, 29, 51, 85, 139, 222, 346, 530, 797, 1180]
    assert functions[(1,)] == [2, 2, 8, 12, 26, 42, 78, 120, 202, 306, 482, 714, 1080]

    characters = coset_characters(table, mu, a1_b2_affine, 1, normalization='short')
    prefactors = {labels_of(nu, a1_b2_affine.a): chi.prefactor_exponent for nu, chi in characters.items()}
    assert prefactors == {(1,): Fraction(7, 12), (0,): Fraction(5, 6)}

    finite = build_singular_element(from_dynkin_labels([1, 0], a1_b2.g), a1_b2, orthogonal_pair(a1_b2),
                                    cache=CosetCache(enabled=False))
    assert sing.terms.grade_slice(0) == finite.terms
