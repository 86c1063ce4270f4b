from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from branch import branch
from conftest import fixture_path
from embed import EmbeddingSpec, load_embedding_spec, resolve_embedding
from oracle import OracleError, brute_force_branch, diff_tables, freudenthal_multiplicities
from rootdata import Weight, apply_word, build_root_system, from_dynkin_labels, parse_algebra, weyl_dim


def test_highest_weight_has_multiplicity_one():
    rs = build_root_system(parse_algebra('B4'))
    mu = from_dynkin_labels([0, 1, 0, 2], rs)
    diagram = freudenthal_multiplicities(mu, rs)
    assert diagram[mu] == 1
    assert diagram.dimension() == 2772


def test_b2_adjoint_zero_weight():
    """The zero weight of the B2 adjoint has multiplicity equal to the rank."""
    rs = build_root_system(parse_algebra('B2'))
    diagram = freudenthal_multiplicities(from_dynkin_labels([0, 2], rs), rs)
    assert diagram[Weight.zero(2)] == 2
    assert diagram.dimension() == 10
    assert len(diagram) == 9


@pytest.mark.parametrize('name, labels', [('A2', [2, 1]), ('B2', [1, 1]), ('C3', [1, 0, 1]), ('D4', [0, 0, 1, 1])])
def test_diagram_is_weyl_invariant(name, labels):
    rs = build_root_system(parse_algebra(name))
    mu = from_dynkin_labels(labels, rs)
    diagram = freudenthal_multiplicities(mu, rs)
    assert diagram.dimension() == weyl_dim(mu, rs)
    for w, m in diagram.multiplicities.items():
        for index in range(rs.rank):
            assert diagram[apply_word(w, [index], rs)] == m


def test_affine_level_zero_module_is_trivial():
    rs = build_root_system(parse_algebra('A1^'))
    zero = Weight.zero(rs.dim)
    assert freudenthal_multiplicities(zero, rs, cutoff=3).multiplicities == {zero: 1}


def test_affine_vacuum_grade_one():
    """Grade -1 of the A1^ level-1 vacuum holds the three currents."""
    rs = build_root_system(parse_algebra('A1^'))
    mu = from_dynkin_labels([0], rs, level=1)
    diagram = freudenthal_multiplicities(mu, rs, cutoff=2)
    grade_one = sum(m for w, m in diagram.multiplicities.items() if w.grade == -1)
    assert grade_one == 3
    assert diagram[mu.with_grade(-1)] == 1


def test_resource_guard():
    rs = build_root_system(parse_algebra('B4'))
    with pytest.raises(OracleError):
        freudenthal_multiplicities(from_dynkin_labels([0, 1, 0, 2], rs), rs, max_entries=5)


def test_rejects_bad_input():
    rs = build_root_system(parse_algebra('B2'))
    with pytest.raises(ValueError):
        freudenthal_multiplicities(from_dynkin_labels([-1, 0], rs), rs)
    affine = build_root_system(parse_algebra('B2^'))
    with pytest.raises(ValueError):
        freudenthal_multiplicities(from_dynkin_labels([0, 0], affine, level=1), affine)


def test_peeling_a1_in_b2(a1_b2):
    table = brute_force_branch(from_dynkin_labels([1, 0], a1_b2.g), a1_b2)
    assert table.by_labels() == {(1,): 2, (0,): 1}


def test_peeling_b2_in_b4(b2_b4):
    table = brute_force_branch(from_dynkin_labels([0, 1, 0, 2], b2_b4.g), b2_b4)
    assert table.by_labels() == {(0, 0): 6, (0, 2): 60, (1, 0): 30, (2, 0): 19, (1, 2): 40, (0, 4): 10}


def test_peeling_identity(b2_identity):
    mu = from_dynkin_labels([1, 2], b2_identity.g)
    assert brute_force_branch(mu, b2_identity).entries == {mu: 1}


REGULAR = {
    'a1_b2': ('B2', [1, 2], 'A1'),
    'a1_a3_highest_root': ('A3', [1, 2, 3], 'A1'),
}


@lru_cache(maxsize=None)
def resolved(name):
    if name == 'a1_a2_special_finite':
        return resolve_embedding(load_embedding_spec(fixture_path('a1_a2_special_finite.json')))
    g, drop, a = REGULAR[name]
    return resolve_embedding(EmbeddingSpec.regular(g, drop, a))


B4_WEIGHTS = [[0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0], [1, 0, 0, 1], [0, 0, 1, 0], [0, 0, 0, 2]]


@given(st.sampled_from(['a1_b2', 'a1_a3_highest_root', 'a1_a2_special_finite']),
       st.lists(st.integers(0, 2), min_size=3, max_size=3))
def test_engine_matches_oracle(name, labels):
    embedding = resolved(name)
    mu = from_dynkin_labels(labels[:embedding.g.rank], embedding.g)
    assert diff_tables(branch(mu, embedding), brute_force_branch(mu, embedding)) == {}


@pytest.mark.parametrize('labels', B4_WEIGHTS)
def test_engine_matches_oracle_b2_in_b4(b2_b4, labels):
    mu = from_dynkin_labels(labels, b2_b4.g)
    assert diff_tables(branch(mu, b2_b4), brute_force_branch(mu, b2_b4)) == {}


@pytest.mark.parametrize('labels', [[0, 0], [1, 0], [0, 1]])
def test_engine_matches_oracle_affine_coset(a1_b2_affine, labels):
    mu = from_dynkin_labels(labels, a1_b2_affine.g, level=1)
    engine = branch(mu, a1_b2_affine, cutoff=6)
    oracle = brute_force_branch(mu, a1_b2_affine, cutoff=6)
    assert diff_tables(engine, oracle) == {}


@pytest.mark.parametrize('labels', [[0, 0], [1, 0], [0, 1]])
def test_engine_matches_oracle_affine_special(a1_a2_special, labels):
    mu = from_dynkin_labels(labels, a1_a2_special.g, level=1)
    engine = branch(mu, a1_a2_special, cutoff=6)
    oracle = brute_force_branch(mu, a1_a2_special, cutoff=6)
    assert diff_tables(engine, oracle) == {}


def test_diff_tables_reports_both_sides(a1_b2):
    mu = from_dynkin_labels([1, 0], a1_b2.g)
    engine = branch(mu, a1_b2)
    oracle = brute_force_branch(mu, a1_b2)
    nu = next(iter(oracle.entries))
    oracle.entries[nu] += 1
    assert diff_tables(engine, oracle) == {nu: [engine[nu], engine[nu] + 1]}
