import random

import pytest
from hypothesis import strategies as st

from autf2.pipeline import CONFIG_A, CONFIG_B, build_k_oracle
from autf2.words import XY, Word


def words_over(alphabet, max_len=12):
    """Strategy producing reduced words from raw letter lists."""
    letter = st.tuples(st.integers(0, alphabet.size - 1), st.sampled_from([1, -1]))
    return st.lists(letter, max_size=max_len).map(alphabet.make)


xy_words = words_over(XY)


@pytest.fixture(scope="session")
def k_a():
    return build_k_oracle(CONFIG_A)


@pytest.fixture(scope="session")
def k_b():
    return build_k_oracle(CONFIG_B)


@pytest.fixture
def rng():
    return random.Random(20261014)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
