import numpy as np
import pytest

from driftbench.model import DriftSpec, ModelParams, SigmaSpec
from driftbench.wavelets import WaveletBasis

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def db8():
    return WaveletBasis("daubechies", order=8, max_level=8)


@pytest.fixture(scope="session")
def fourier():
    return WaveletBasis("fourier", max_level=8)


@pytest.fixture(scope="session")
def cos_model():
    """b(x) = pi cos(2 pi x), sigma = 1."""
    return ModelParams(DriftSpec.closed_form("pi*cos(2*pi*x)"), SigmaSpec.constant(1.0))


@pytest.fixture(scope="session")
def brownian():
    return ModelParams(DriftSpec.constant(0.0), SigmaSpec.constant(1.0))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
