import numpy as np
import pytest

from inner_clt.inner_core import make_blaschke


@pytest.fixture
def square():
    return make_blaschke(1.0, [0, 0])


@pytest.fixture
def half():
    """Zeros 0 and 1/2, so f'(0) = 1/2."""
    return make_blaschke(1.0, [0, 0.5])


@pytest.fixture
def normal_lattice():
    """Deterministic standard complex normal sample from a Fibonacci lattice."""
    from scipy.stats import norm

    M, g = 46368, 28657
    i = np.arange(M)
    u = (i + 0.5) / M
    v = ((i * g) % M + 0.5) / M
    return norm.ppf(u) + 1j * norm.ppf(v)
