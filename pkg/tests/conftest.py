from pathlib import Path

import pytest

from congruity import load_corpus, load_marker_lexicons, load_vectors, read_signals

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(FIXTURES / "corpus.jsonl")


@pytest.fixture(scope="session")
def signals():
    return read_signals(FIXTURES / "signals.jsonl")


@pytest.fixture(scope="session")
def store():
    return load_vectors(FIXTURES / "vectors.txt")


@pytest.fixture(scope="session")
def markers():
    return load_marker_lexicons()
