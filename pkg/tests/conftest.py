import numpy as np
import pytest
from hypothesis import settings

from kelvinlie.classes import SymmetryClass, class_spec

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ALL_CLASSES = [c.value for c in SymmetryClass]


def series_exp(A, terms=30, squarings=2):
    """Truncated power series of the matrix exponential, an independent oracle.

    The series is summed for A / 2^squarings and the result squared back; at
    spectral radius 2 pi the raw 30-term series is only accurate to ~4e-9.
    """
    A = np.asarray(A, dtype=float) / 2.0 ** squarings
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for n in range(1, terms):
        term = term @ A / n
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def random_rotation(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_skew(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) * scale
    return 0.5 * (A - A.T)


def random_z(rng, cls, scale=0.5):
    return rng.normal(size=class_spec(cls).n) * scale


def random_spd(rng, k):
    A = rng.normal(size=(k, k))
    return A @ A.T + k * np.eye(k)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
