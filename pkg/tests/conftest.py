import pytest

from escansion.corpus import bundled_mini_gold
from escansion.phonology import default_lexicon
from escansion.scansion import ScanConfig


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def mini_gold():
    return bundled_mini_gold()


@pytest.fixture(scope="session")
def config():
    return ScanConfig()
