import pytest

from mttlab.corpus import corpus
from mttlab.fixtures import FIXTURES


@pytest.fixture(scope="session")
def shipped():
    return {name: make() for name, make in FIXTURES.items()}


@pytest.fixture(scope="session")
def random_corpus():
    return corpus(50)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
