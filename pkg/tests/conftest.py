import numpy as np
import pytest

from hareplan.kinematics import load_model
from hareplan.world import Scene

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def planar():
    return load_model("planar2")


@pytest.fixture(scope="session")
def ur():
    return load_model("ur10e_like")


@pytest.fixture
def empty_scene():
    return Scene()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_q(model, rng, size=None):
    return rng.uniform(model.q_min, model.q_max, size=None if size is None else (size, model.n))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
