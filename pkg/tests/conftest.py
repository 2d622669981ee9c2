import numpy as np
import pytest

from detanalog.model import ModelParams
from detanalog.steady import compute_znd_profile


@pytest.fixture(scope="session")
def base_params():
    return ModelParams(alpha=4.05, beta=0.1, zeta=1.05)


@pytest.fixture(scope="session")
def base_profile(base_params):
    return compute_znd_profile(base_params)


@pytest.fixture(scope="session")
def stable_profile():
    return compute_znd_profile(ModelParams(alpha=1.0, beta=0.1, zeta=1.2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
