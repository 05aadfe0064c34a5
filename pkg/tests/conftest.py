import numpy as np
import pytest

from matprod.rng import RngStream


@pytest.fixture
def stream():
    return RngStream(20260808)


def unitary_defect(u: np.ndarray) -> float:
    """Max-entry deviation of u*u from the identity."""
    d = u.shape[-1]
    return float(np.max(np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - np.eye(d))))


def rel_err(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)
