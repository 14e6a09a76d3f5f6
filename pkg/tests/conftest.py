import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def assert_hermitian_psd(S, tol=1e-10):
    assert np.max(np.abs(S - S.conj().T)) == 0.0
    w = np.linalg.eigvalsh(S)
    assert w[0] >= -tol * max(1.0, abs(w[-1]))
