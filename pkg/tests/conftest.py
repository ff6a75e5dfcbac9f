from pathlib import Path

import pytest

from medal import fixtures
from medal.store import CatalogStore

DATA = Path(__file__).parent / "data"
CORPUS = DATA / "corpus"


@pytest.fixture
def store():
    return CatalogStore()


@pytest.fixture
def worked_example():
    store = CatalogStore()
    ids = fixtures.build_worked_example(store)
    return store, ids


@pytest.fixture
def demo():
    store = CatalogStore()
    ids = fixtures.build_demo(store)
    return store, ids


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def corpus_dir():
    return CORPUS
