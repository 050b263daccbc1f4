import math

import pytest

from henondim import maps, oracle, orbits

LOG2 = math.log(2)


@pytest.fixture(scope="session")
def g6():
    return maps.quadratic(-6, 0.2)


@pytest.fixture(scope="session")
def g10():
    return maps.quadratic(-10, 1.0)


@pytest.fixture(scope="session")
def lib6(g6):
    return orbits.enumerate_orbits(g6, 12, jobs=2)


@pytest.fixture(scope="session")
def lib10(g10):
    return orbits.enumerate_orbits(g10, 12, jobs=2)


@pytest.fixture(scope="session")
def symmetric():
    return oracle.LinearModel((math.log(4), math.log(4)), 0.0)


@pytest.fixture(scope="session")
def asym1():
    return oracle.LinearModel((math.log(2), math.log(8)), 0.0)


@pytest.fixture(scope="session")
def asym():
    return oracle.LinearModel((math.log(2), math.log(8)), math.log(0.25))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
