import numpy as np
import pytest

from floquet_resonance import benchmark_model


@pytest.fixture(scope="session")
def bench():
    """Benchmark driven model (V = -2 sech^2 x on [-30, 30], n = 3001, W = exp(-x^2/2) cos 2t)."""
    return benchmark_model()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
