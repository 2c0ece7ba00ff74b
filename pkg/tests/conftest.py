import numpy as np
import pytest
from scipy.linalg import subspace_angles


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, n, lmin=None, lmax=None):
    """Random Hermitian matrix, optionally with spectrum in [lmin, lmax]."""
    Q, _ = np.linalg.qr(rand_complex(rng, n, n))
    if lmin is None:
        w = rng.standard_normal(n)
    else:
        w = np.sort(lmin + (lmax - lmin) * rng.random(n))
        w[0], w[-1] = lmin, lmax
    return (Q * w) @ Q.conj().T, w


def max_principal_angle(X, Y):
    ang = subspace_angles(np.asarray(X), np.asarray(Y))
    return float(ang.max()) if ang.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
