# src/pendulum_control/control_framework/linear/linearization.py

import logging
import math
from dataclasses import dataclass

import numpy as np

from pendulum_control.control_framework.core.dynamics import PendulumParams, State, acceleration
from pendulum_control.control_framework.core.errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)

EQUILIBRIUM_TOLERANCE = 1e-9  # rad/s^2


@dataclass(frozen=True, eq=False)
class StateSpace:
    """
    Linear model x_dot = a x + b u about (x_star, u_star). Full-state output (C = I,
    D = 0) is assumed; no observer is involved.
    """
    a: np.ndarray
    b: np.ndarray
    x_star: State = State(0.0, 0.0)
    u_star: float = 0.0

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(2, 2)
        b = np.array(self.b, dtype=float).reshape(2, 1)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DomainError("state-space matrices must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def linearize(params: PendulumParams, fp: State, u_star: float = 0.0) -> StateSpace:
    """Analytic Jacobians of the pendulum dynamics at an equilibrium (fp, u_star)."""
    residual = max(abs(acceleration(params, fp, u_star)), abs(fp.omega))
    if residual > EQUILIBRIUM_TOLERANCE:
        raise PreconditionError(
            f"({fp.theta}, {fp.omega}) is not an equilibrium for u*={u_star}: "
            f"residual acceleration {residual:.3e}",
            residual=residual,
        )

    a = np.array([
        [0.0, 1.0],
        [-params.g_c * math.cos(fp.theta) / params.m_c, -params.b_c / params.m_c],
    ])
    b = np.array([[0.0], [1.0 / params.m_c]])
    logger.debug(f"Linearized at theta*={fp.theta:.6f}: A={a.tolist()}, B={b.ravel().tolist()}")
    return StateSpace(a=a, b=b, x_star=fp, u_star=u_star)
