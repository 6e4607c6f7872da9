import numpy as np
import pytest

from ghostsim.gaussian_core import Geometry, SourceParams

ACCEPTANCE_LINES = []


@pytest.fixture
def strong_src():
    return SourceParams(sigma=10.0, omega=100.0)


@pytest.fixture
def weak_src():
    return SourceParams(sigma=1.0, omega=1.0)


@pytest.fixture
def geo3():
    return Geometry(n=3, slit_spacing=1.0, slit_width=0.1, L1=3.0, L2=0.15, wavelength=1.0,
                    z1_detect=0.0, slit_offset=-2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
