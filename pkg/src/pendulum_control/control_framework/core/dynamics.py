# src/pendulum_control/control_framework/core/dynamics.py

"""
Pendulum dynamics in aggregated-constant form:

    m_c * theta_ddot + b_c * theta_dot + g_c * sin(theta) = u

theta = 0 is hanging down and theta = pi is upright. Internal angles are unwrapped;
only reporting helpers wrap them into [0, 2*pi).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, ClassVar, List, Tuple

import numpy as np

from pendulum_control.control_framework.core.errors import (
    ContinuumError,
    DomainError,
    IntegrationOverflowError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

Policy = Callable[[float, "State"], float]


@dataclass(frozen=True)
class PendulumParams:
    """Inertial (kg m^2), damping (N m s/rad) and gravity-torque (N m) constants."""
    m_c: float
    b_c: float
    g_c: float

    def __post_init__(self):
        for name in ("m_c", "b_c", "g_c"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.m_c <= 0:
            raise DomainError(f"m_c must be positive, got {self.m_c}")
        if self.b_c < 0:
            raise DomainError(f"b_c must be non-negative, got {self.b_c}")
        if self.g_c < 0:
            raise DomainError(f"g_c must be non-negative, got {self.g_c}")

    def perturbed(self, m_c: float = 0.0, b_c: float = 0.0, g_c: float = 0.0) -> "PendulumParams":
        """Scale each constant by (1 + fraction)."""
        return PendulumParams(
            m_c=self.m_c * (1.0 + m_c),
            b_c=self.b_c * (1.0 + b_c),
            g_c=self.g_c * (1.0 + g_c),
        )

    def without_gravity(self) -> "PendulumParams":
        """The same pendulum laid flat, as in the horizontal identification run."""
        return PendulumParams(m_c=self.m_c, b_c=self.b_c, g_c=0.0)


@dataclass(frozen=True)
class State:
    theta: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.omega)):
            raise DomainError(f"state must be finite, got ({self.theta!r}, {self.omega!r})")

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.omega])


class Stability(Enum):
    LOCALLY_STABLE_ISL = "locally-stable-isL"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class FixedPoint:
    state: State
    stability: Stability


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Timestamped rollout. Every sample k carries the state at t[k] and the control and
    noise torques commanded at t[k] (held constant until t[k+1]).
    """
    t: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    u_control: np.ndarray
    u_noise: np.ndarray
    dt: float
    source: str = "simulation"
    channels: ClassVar[Tuple[str, ...]] = ("theta", "omega", "u_control", "u_noise")

    def __post_init__(self):
        n = len(self.t)
        for name in ("t",) + self.channels:
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1 or len(arr) != n:
                raise DomainError(f"channel '{name}' must be 1-D with {n} samples")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if n > 1 and not np.all(np.diff(self.t) > 0):
            bad = int(np.argmax(np.diff(self.t) <= 0)) + 1
            raise DomainError(f"timestamps must be strictly increasing (sample {bad})")

    def __len__(self) -> int:
        return len(self.t)

    def state(self, k: int) -> State:
        return State(float(self.theta[k]), float(self.omega[k]))

    @property
    def states(self) -> List[State]:
        return [self.state(k) for k in range(len(self))]

    def window(self, start: int, stop: int) -> "Trajectory":
        """Samples start..stop-1 as a new trajectory."""
        s = slice(start, stop)
        return Trajectory(
            t=self.t[s], theta=self.theta[s], omega=self.omega[s],
            u_control=self.u_control[s], u_noise=self.u_noise[s],
            dt=self.dt, source=self.source,
        )

    def head(self, n: int) -> "Trajectory":
        return self.window(0, n)


class TrajectoryBuilder:
    """Accumulates samples of a run; not shared between runs."""

    def __init__(self, dt: float, source: str):
        self.dt = dt
        self.source = source
        self._rows: List[Tuple[float, float, float, float, float]] = []

    def append(self, t: float, s: State, u_control: float, u_noise: float = 0.0):
        self._rows.append((t, s.theta, s.omega, u_control, u_noise))

    def __len__(self) -> int:
        return len(self._rows)

    def build(self) -> Trajectory:
        cols = np.array(self._rows, dtype=float).reshape(-1, 5)
        return Trajectory(
            t=cols[:, 0], theta=cols[:, 1], omega=cols[:, 2],
            u_control=cols[:, 3], u_noise=cols[:, 4],
            dt=self.dt, source=self.source,
        )


def _check_finite(**values: float):
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")


def acceleration(params: PendulumParams, s: State, u: float) -> float:
    """Angular acceleration (rad/s^2) under torque u (N m)."""
    _check_finite(u=u)
    return (u - params.b_c * s.omega - params.g_c * math.sin(s.theta)) / params.m_c


def required_torque(params: PendulumParams, theta, omega, alpha):
    """Inverse dynamics: torque producing acceleration alpha. Accepts scalars or arrays."""
    return params.m_c * alpha + params.b_c * omega + params.g_c * np.sin(theta)


def energy(params: PendulumParams, s: State) -> Tuple[float, float]:
    """(kinetic, potential) in J, with zero potential at the horizontal."""
    kinetic = 0.5 * params.m_c * s.omega ** 2
    potential = -params.g_c * math.cos(s.theta)
    return kinetic, potential


def total_energy(params: PendulumParams, s: State) -> float:
    kinetic, potential = energy(params, s)
    return kinetic + potential


def normalize_angle(theta: float) -> float:
    """Wrap an unwrapped angle into [0, 2*pi)."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    # fmod of values just below a multiple of 2*pi can round up to 2*pi itself
    return 0.0 if wrapped >= TWO_PI else wrapped


def fixed_points(params: PendulumParams) -> List[FixedPoint]:
    if params.g_c == 0:
        raise ContinuumError("g_c = 0: every state with omega = 0 is an equilibrium")
    return [
        FixedPoint(State(0.0, 0.0), Stability.LOCALLY_STABLE_ISL),
        FixedPoint(State(math.pi, 0.0), Stability.UNSTABLE),
    ]


def step_euler(params: PendulumParams, s: State, u: float, dt: float) -> State:
    """One explicit Euler step; the velocity update uses the pre-step state."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    alpha = acceleration(params, s, u)
    theta = s.theta + dt * s.omega
    omega = s.omega + dt * alpha
    if not (math.isfinite(theta) and math.isfinite(omega)):
        raise IntegrationOverflowError(f"Euler step produced a non-finite state from {s}")
    return State(theta, omega)


def sample_count(dt: float, duration: float) -> int:
    """floor(duration / dt) + 1, tolerant to representation error in the ratio."""
    return int(math.floor(duration / dt + 1e-9)) + 1


def simulate(
    params: PendulumParams,
    s0: State,
    policy: Policy,
    dt: float,
    duration: float,
    source: str = "simulation",
) -> Trajectory:
    """
    Forward-simulate with a zero-order-hold policy. The policy sees the state at the
    start of each step; the recorded control at sample k is the torque applied over
    [t_k, t_k + dt).
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if not duration >= dt:
        raise DomainError(f"duration must be at least dt, got {duration}")

    n = sample_count(dt, duration)
    builder = TrajectoryBuilder(dt, source)
    s = s0
    for k in range(n):
        t = k * dt
        u = float(policy(t, s))
        if not math.isfinite(u):
            raise IntegrationOverflowError(f"policy returned non-finite torque at step {k}", step=k)
        builder.append(t, s, u)
        if k < n - 1:
            try:
                s = step_euler(params, s, u, dt)
            except IntegrationOverflowError as e:
                raise IntegrationOverflowError(str(e), step=k) from e

    logger.debug(f"Simulated {n} samples at dt={dt} from {s0}")
    return builder.build()


def zero_policy(t: float, s: State) -> float:  # noqa: U100
    return 0.0


def max_abs(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if len(values) else 0.0
