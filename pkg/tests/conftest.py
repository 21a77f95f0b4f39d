import math

import numpy as np
import pytest

from ccmt.eigensystem import ReferenceParams
from ccmt.geometry import CosineProfile, build_custom_profile, build_rough_profile, build_smooth_profile


@pytest.fixture(scope="session")
def params():
    return ReferenceParams(math.tanh(1.0), 1.0)


@pytest.fixture(scope="session")
def smooth05():
    return build_smooth_profile(0.5)


@pytest.fixture(scope="session")
def rough09():
    return build_rough_profile(0.9)


@pytest.fixture(scope="session")
def undulated():
    """Both boundaries move: eta = 0.5 cos x over h = 1 + 0.3 cos 2x."""
    return build_custom_profile(CosineProfile(0.5, 1.0), CosineProfile(0.3, 2.0, offset=1.0), 1.0)


def benchmark_psi(geometry, kappa=1.0, h0=1.0):
    return lambda x: np.cosh(kappa * (geometry.eta(x)[0] + h0)) * np.cos(kappa * x)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
