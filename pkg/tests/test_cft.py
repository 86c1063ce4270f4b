from fractions import Fraction

import pytest

from branch import branch
from cft import (ConformalError, QSeries, assemble_partition_function, central_charge, coset_characters,
                 is_conformal, modular_anomaly)
from rootdata import build_root_system, from_dynkin_labels, parse_algebra, to_dynkin_labels

SPECIAL_INVARIANT = "Z = |chi_(4;4;0) + chi_(0;4;0)|^2 + 2|chi_(2;4;0)|^2"


@pytest.mark.parametrize('name, level, charge', [
    ('A2', 1, Fraction(2)),
    ('A1', 4, Fraction(2)),
    ('B2', 1, Fraction(5, 2)),
    ('A1', 1, Fraction(1)),
    ('B4', 0, Fraction(0)),
])
def test_central_charge(name, level, charge):
    assert central_charge(parse_algebra(name), level) == charge


def test_critical_level():
    with pytest.raises(ConformalError):
        central_charge(parse_algebra('A1'), -2)


def test_special_embedding_is_conformal(a1_a2_special):
    report = is_conformal(a1_a2_special, 1)
    assert report == {'success': True, 'conformal': True, 'c_g': 2, 'c_a': 2, 'x_e': 4, 'perp_empty': True}


def test_coset_embedding_is_not_conformal(a1_b2_affine):
    report = is_conformal(a1_b2_affine, 1)
    assert not report['conformal']
    assert report['c_g'] == Fraction(5, 2) and report['c_a'] == 1
    assert not report['perp_empty']


def test_modular_anomaly_of_trivial_weight():
    rs = build_root_system(parse_algebra('A1^'))
    zero = from_dynkin_labels([0], rs, level=3)
    rho = rs.rho.finite_part()
    expected = rs.norm(rho) / (2 * 5) - rs.norm(rho) / (2 * 2)
    assert modular_anomaly(zero, rs, 3, 'long') == expected


def test_modular_anomaly_rejects_unknown_normalization():
    rs = build_root_system(parse_algebra('A1'))
    with pytest.raises(ValueError):
        modular_anomaly(from_dynkin_labels([0], rs), rs, 1, 'medium')


@pytest.fixture(scope='module')
def coset_table(a1_b2_affine):
    mu = from_dynkin_labels([1, 0], a1_b2_affine.g, level=1)
    return mu, branch(mu, a1_b2_affine, cutoff=3)


@pytest.mark.parametrize('normalization, prefactors', [
    ('short', {(1,): Fraction(7, 12), (0,): Fraction(5, 6)}),
    ('long', {(1,): Fraction(3, 16), (0,): Fraction(7, 16)}),
])
def test_coset_prefactors(a1_b2_affine, coset_table, normalization, prefactors):
    mu, table = coset_table
    characters = coset_characters(table, mu, a1_b2_affine, 1, normalization=normalization)
    found = {tuple(int(x) for x in to_dynkin_labels(nu, a1_b2_affine.a)): chi.prefactor_exponent
             for nu, chi in characters.items()}
    assert found == prefactors


def test_coset_characters_carry_branching_functions(a1_b2_affine, coset_table):
    mu, table = coset_table
    characters = coset_characters(table, mu, a1_b2_affine, 1)
    series = {tuple(int(x) for x in to_dynkin_labels(nu, a1_b2_affine.a)): chi.coefficients
              for nu, chi in characters.items()}
    assert series == {(1,): [2, 2, 8, 12], (0,): [1, 4, 8, 15]}
    assert str(characters[next(iter(characters))]) == "q^(7/12) * (2 + 2q + 8q^2 + 12q^3)"


def test_absent_weight_gives_zero_series(a1_a2_special):
    mu = from_dynkin_labels([1, 0], a1_a2_special.g, level=1)
    table = branch(mu, a1_a2_special, cutoff=2)
    vacuum = from_dynkin_labels([0], a1_a2_special.a, level=4)
    characters = coset_characters(table, mu, a1_a2_special, 1, requested=[vacuum])
    assert characters[vacuum].is_zero()
    assert characters[vacuum].coefficients == [0, 0, 0]


def test_requested_weight_must_be_at_the_induced_level(a1_a2_special):
    mu = from_dynkin_labels([1, 0], a1_a2_special.g, level=1)
    table = branch(mu, a1_a2_special, cutoff=2)
    wrong = from_dynkin_labels([0], a1_a2_special.a, level=1)
    with pytest.raises(ConformalError):
        coset_characters(table, mu, a1_a2_special, 1, requested=[wrong])


def test_partition_function_of_special_embedding(a1_a2_special):
    pf = assemble_partition_function(a1_a2_special, 1, cutoff=3)
    assert pf.render() == SPECIAL_INVARIANT
    assert pf.is_symmetric()
    assert pf.trace() == 4
    a = a1_a2_special.a
    vacuum = from_dynkin_labels([0], a, level=4)
    top = from_dynkin_labels([4], a, level=4)
    middle = from_dynkin_labels([2], a, level=4)
    assert pf.entry(vacuum, top) == 1
    assert pf.entry(middle, middle) == 2
    assert pf.entry(vacuum, middle) == 0
    data = pf.to_json()
    assert data['weights'] == ['(4;4;0)', '(2;4;0)', '(0;4;0)']
    assert data['mass_matrix'] == [[1, 0, 1], [0, 2, 0], [1, 0, 1]]


def test_partition_function_needs_conformal_embedding(a1_b2_affine):
    with pytest.raises(ConformalError):
        assemble_partition_function(a1_b2_affine, 1, cutoff=2)


def test_qseries_rendering():
    chi = QSeries(Fraction(5, 6), [1, 4, 8])
    assert str(chi) == "q^(5/6) * (1 + 4q + 8q^2)"
    assert chi.to_json() == {"prefactor_exponent": "5/6", "coefficients": [1, 4, 8]}
    assert QSeries(Fraction(0), [0, 0]).is_zero()
