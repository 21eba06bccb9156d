import numpy as np
import pytest

from noisychaos import Spectrum, sample_gue_spectrum


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def spec5(rng):
    return sample_gue_spectrum(5, rng)


@pytest.fixture
def spec4():
    return Spectrum(np.array([-1.3, -0.2, 0.45, 1.1]))


def random_density(dim, rng):
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def random_hermitian(dim, rng, traceless=False):
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (x + x.conj().T) / 2.0
    if traceless:
        h -= np.trace(h).real / dim * np.eye(dim)
    return h
