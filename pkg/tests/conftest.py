import pytest

from d4census.arith import build_sieve


@pytest.fixture(scope="session")
def tables_census():
    """Covers census boxes up to (200, 200, 200, 400)."""
    return build_sieve(400)


@pytest.fixture(scope="session")
def tables_3000():
    return build_sieve(3000)


@pytest.fixture(scope="session")
def tables_100k():
    return build_sieve(100_000)
