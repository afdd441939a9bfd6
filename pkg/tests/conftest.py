from __future__ import annotations

import pytest

from cknlab.params import RawParams, derive
from cknlab.quadrature import QuadConfig
from cknlab.radial import RadialMeasure


def make_params(n=4, p="2", q="2.5", mu="1", **kw):
    return derive(RawParams(n, p, q, mu), **kw)


@pytest.fixture(scope="session")
def base():
    return make_params()


@pytest.fixture(scope="session")
def second():
    return make_params(5, "2", "2.5", "0.5")


@pytest.fixture(scope="session")
def endpoint():
    return make_params(4, "2", "3", "1", allow_endpoint=True)


@pytest.fixture(scope="session")
def euclid4():
    return RadialMeasure.euclidean(4)


@pytest.fixture(scope="session")
def quad():
    return QuadConfig()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
