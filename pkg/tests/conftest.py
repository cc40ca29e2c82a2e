import numpy as np
import pytest

from scatterbench.framekit import (UniformCoveringParams, WaveletParams,
                                   build_uniform_covering_bank, build_wavelet_bank)
from scatterbench.sigkit import Grid, Signal


def random_signal(grid, rng):
    v = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Signal(grid, v)


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


@pytest.fixture(scope="session")
def wavelet_bank_256():
    return build_wavelet_bank(Grid.regular(256), WaveletParams(J=4))


@pytest.fixture(scope="session")
def covering_bank_64():
    g = Grid.regular(64)
    return build_uniform_covering_bank(g, UniformCoveringParams.default_for(g))


@pytest.fixture(scope="session")
def wavelet_bank_2d():
    return build_wavelet_bank(Grid.regular(32, d=2), WaveletParams(J=2))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
