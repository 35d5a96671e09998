import math

import numpy as np
import pytest

from pendulum_control.control_framework.core.dynamics import PendulumParams, State
from pendulum_control.control_framework.linear.linearization import linearize
from pendulum_control.control_framework.linear.riccati import CostMatrices, lqr_gain

UPRIGHT = State(math.pi, 0.0)

# label, q11, q22, r11, reference closed-loop eigenvalues
REFERENCE_COMBINATIONS = [
    ("1", 1.0, 0.01, 0.1, (-0.30, -214.22)),
    ("2", 1.0, 0.1, 0.1, (-0.30, -214.91)),
    ("3", 100.0, 0.01, 0.1, (-2.69, -214.20)),
    ("4", 100.0, 0.1, 0.1, (-2.68, -214.90)),
]


@pytest.fixture
def pendulum():
    return PendulumParams(m_c=0.055, b_c=11.77, g_c=1.678)


@pytest.fixture
def upright():
    return UPRIGHT


@pytest.fixture
def upright_ss(pendulum):
    return linearize(pendulum, UPRIGHT)


@pytest.fixture
def combination_3():
    return CostMatrices.diagonal(100.0, 0.01, 0.1, label="3")


@pytest.fixture
def upright_gain(upright_ss, combination_3):
    return lqr_gain(upright_ss, combination_3).k.ravel()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
