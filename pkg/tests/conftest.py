import os
import sys

# Path adjustment
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src')))

import numpy as np
import pytest

from geometry.state_space import density_from_matrix
from comparison.bures_compare import example_curve
from dynamics.evolution import state_curve, uniform_times


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def pauli():
    return {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@pytest.fixture
def qubit_rho():
    """diag(0.7, 0.3)."""
    return density_from_matrix(np.diag([0.7, 0.3]))


@pytest.fixture
def transfer_pair():
    """Distinguishable states diag(0.6, 0.4, 0, 0) and diag(0, 0, 0.6, 0.4)."""
    return (density_from_matrix(np.diag([0.6, 0.4, 0.0, 0.0])),
            density_from_matrix(np.diag([0.0, 0.0, 0.6, 0.4])))


@pytest.fixture
def rotation_curve():
    """Factory for the qubit rotation curve sampled on [0, 1]."""
    def build(p1=0.7, p2=0.3, eps=0.5, steps=1000):
        times = uniform_times(0.0, 1.0, steps)
        return state_curve(times, [example_curve(p1, p2, eps, t) for t in times])
    return build
