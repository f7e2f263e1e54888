import pytest

from bienforce import corpus
from bienforce.core import Atom, Int, Universe


@pytest.fixture(scope="session")
def U():
    return corpus.GOLDEN_UNIVERSE


@pytest.fixture(scope="session")
def small_universe():
    return Universe(("a", "b", "c"), (Int(1), Int(2), Atom("vdef")))


@pytest.fixture(scope="session")
def load():
    return corpus.load


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n])
