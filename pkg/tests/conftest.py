import numpy as np
import pytest


def rand_complex(rng, m, k, scale=1.0):
    """i.i.d. circularly-symmetric complex Gaussian matrix."""
    return scale * (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / np.sqrt(2.0)


def rand_hermitian(rng, k):
    a = rand_complex(rng, k + 2, k)
    return a.conj().T @ a


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
