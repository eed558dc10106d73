import numpy as np
import pytest

from mpcodes.codes import StCodeParams, st_constraints
from mpcodes.core import MultiplicityVector


@pytest.fixture(scope="session")
def st236():
    p = StCodeParams(2, 3, 6)
    return p, st_constraints(p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def all_words(mult: MultiplicityVector):
    from mpcodes.ranking import unrank_mp

    return [unrank_mp(k, mult) for k in range(mult.size)]


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
