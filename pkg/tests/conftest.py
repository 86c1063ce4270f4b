import os
from pathlib import Path

# Settings must be in place before the modules read them at import
os.environ.setdefault('LOG_LEVEL', 'WARNING')
os.environ.setdefault('ORACLE_MAX_ENTRIES', '200000')
os.environ.setdefault('DEFAULT_MAX_GRADE', '4')
os.environ.setdefault('CACHE_COSET_REPRESENTATIVES', 'true')
os.environ.setdefault('COSET_NORMALIZATION', 'short')

import pytest
from hypothesis import HealthCheck, settings

from embed import EmbeddingSpec, load_embedding_spec, orthogonal_pair, resolve_embedding

settings.register_profile('dev', max_examples=10, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile('thorough', max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'dev'))

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture(scope='session')
def a1_b2():
    return resolve_embedding(EmbeddingSpec.regular('B2', [1, 2], 'A1'))


@pytest.fixture(scope='session')
def b2_b4():
    return resolve_embedding(load_embedding_spec(fixture_path('b2_b4.json')))


@pytest.fixture(scope='session')
def a1_b2_affine():
    return resolve_embedding(load_embedding_spec(fixture_path('a1_b2_affine.json')))


@pytest.fixture(scope='session')
def a1_a2_special():
    return resolve_embedding(load_embedding_spec(fixture_path('a1_a2_special.json')))


@pytest.fixture(scope='session')
def a1_a2_special_finite():
    return resolve_embedding(load_embedding_spec(fixture_path('a1_a2_special_finite.json')))


@pytest.fixture(scope='session')
def b2_identity():
    return resolve_embedding(EmbeddingSpec.regular('B2', [], 'B2'))


@pytest.fixture(scope='session')
def a1_a3_highest_root():
    return resolve_embedding(EmbeddingSpec.regular('A3', [1, 2, 3], 'A1'))


@pytest.fixture(scope='session')
def orth_of():
    cache = {}

    def compute(embedding):
        key = embedding.spec
        if key not in cache:
            cache[key] = orthogonal_pair(embedding)
        return cache[key]
    return compute
