import numpy as np
import pytest

from luinv.linalg import random_density, random_haar_unitary
from luinv.states import LocalUnitaryPair, validate


@pytest.fixture
def wishart7():
    return validate(random_density(4, seed=7), 2, "mixed")


@pytest.fixture
def wishart8():
    return validate(random_density(4, seed=8), 2, "mixed")


@pytest.fixture
def haar_pair9():
    rng = np.random.default_rng(9)
    return LocalUnitaryPair(random_haar_unitary(2, rng=rng), random_haar_unitary(2, rng=rng))


def haar_pair(N, seed):
    rng = np.random.default_rng(seed)
    return LocalUnitaryPair(random_haar_unitary(N, rng=rng), random_haar_unitary(N, rng=rng))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
