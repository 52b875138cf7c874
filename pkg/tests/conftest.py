import numpy as np
import pytest
from hypothesis import settings

from lcv import instances

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE = {}


@pytest.fixture
def two_halfspace():
    return instances.two_halfspace()


@pytest.fixture
def inconsistent():
    return instances.inconsistent_equalities()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
