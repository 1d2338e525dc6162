import numpy as np
import pytest

from idim.space import FiniteSpace


def random_space(rng, n, dim=2, weighted=False):
    pts = rng.normal(size=(n, dim))
    w = rng.uniform(0.2, 1.0, n) if weighted else None
    if w is not None:
        w = w / w.sum()
    return FiniteSpace.from_points(pts, "euclidean", w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_point():
    return FiniteSpace.from_matrix([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def singleton():
    return FiniteSpace.from_points(np.zeros((1, 2)))


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
