import numpy as np
import pytest

from peres_circuits.states import bell_state, maximally_mixed, random_density

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def mixed4():
    return maximally_mixed((2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[0, 1, 2])
def random_state(request):
    return random_density((2, 2), seed=request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
