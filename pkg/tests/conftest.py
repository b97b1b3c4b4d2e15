import numpy as np
import pytest
from scipy.stats import unitary_group

from qutrit_qec.core import QutritRegister

ACCEPTANCE_LINES: list[str] = []


def random_state(n: int, rng: np.random.Generator) -> QutritRegister:
    v = rng.normal(size=3**n) + 1j * rng.normal(size=3**n)
    return QutritRegister(n, v / np.linalg.norm(v))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
