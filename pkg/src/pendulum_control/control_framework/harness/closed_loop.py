# src/pendulum_control/control_framework/harness/closed_loop.py

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from pendulum_control.control_framework.core.base_plant import BasePlant, SimulatedPendulum
from pendulum_control.control_framework.core.dynamics import (
    PendulumParams,
    State,
    Trajectory,
    TrajectoryBuilder,
    acceleration,
    max_abs,
    normalize_angle,
    sample_count,
)
from pendulum_control.control_framework.core.errors import (
    DivergenceError,
    DomainError,
    PreconditionError,
)
from pendulum_control.control_framework.harness.noise import NoiseConfig, NoiseStream
from pendulum_control.control_framework.linear.linearization import EQUILIBRIUM_TOLERANCE

logger = logging.getLogger(__name__)

DIVERGENCE_ANGLE = math.pi / 2  # rad from the setpoint


@dataclass(frozen=True)
class RunSummary:
    samples: int
    max_abs_u_control: float
    max_abs_deviation: float
    final_theta: float  # wrapped to [0, 2*pi)

    @classmethod
    def of(cls, traj: Trajectory, setpoint: State) -> "RunSummary":
        return cls(
            samples=len(traj),
            max_abs_u_control=max_abs(traj.u_control),
            max_abs_deviation=max_abs(traj.theta - setpoint.theta),
            final_theta=normalize_angle(float(traj.theta[-1])),
        )


def _gain(k: Sequence[float]) -> np.ndarray:
    gain = np.asarray(k, dtype=float).ravel()
    if gain.shape != (2,) or not np.all(np.isfinite(gain)):
        raise DomainError(f"gain must be two finite numbers, got {k!r}")
    return gain


def _check_setpoint(params: PendulumParams, setpoint: State):
    residual = max(abs(acceleration(params, setpoint, 0.0)), abs(setpoint.omega))
    if residual > EQUILIBRIUM_TOLERANCE:
        raise PreconditionError(f"setpoint {setpoint} is not a fixed point (residual {residual:.3e})", residual)


def regulate(
    plant: BasePlant,
    k: Sequence[float],
    noise: NoiseConfig,
    duration: float,
    setpoint: State,
    s0: Optional[State] = None,
    source: str = "simulation",
) -> Trajectory:
    """
    Discrete regulator around setpoint. Each control period the plant is measured,
    u_control = -k . (x - setpoint) is computed and one noise value is drawn; their sum is
    held for the period. Every recorded sample, the last included, carries its command
    and noise, so a run of n samples consumes n noise draws.
    """
    gain = _gain(k)
    period = plant.period
    if not period > 0:
        raise DomainError(f"control period must be positive, got {period}")
    if not duration >= period:
        raise DomainError(f"duration must be at least one control period ({period} s), got {duration}")
    _check_setpoint(plant.params, setpoint)

    n = sample_count(period, duration)
    stream = NoiseStream(noise)
    builder = TrajectoryBuilder(period, source)
    plant.reset(setpoint if s0 is None else s0)
    try:
        for j in range(n):
            measured = plant.measure()
            u_control = -(gain[0] * (measured.theta - setpoint.theta) + gain[1] * (measured.omega - setpoint.omega))
            u_noise = stream.draw()
            builder.append(j * period, measured, u_control, u_noise)

            if abs(plant.state.theta - setpoint.theta) > DIVERGENCE_ANGLE:
                partial = builder.build()
                raise DivergenceError(
                    f"run diverged at t={j * period:.4f} s: |theta - {setpoint.theta:.6f}| > pi/2",
                    partial=partial,
                    step=j,
                )
            if j < n - 1:
                plant.step(u_control + u_noise)
    finally:
        plant.cleanup()

    traj = builder.build()
    summary = RunSummary.of(traj, setpoint)
    logger.info(
        f"{source} run finished: {summary.samples} samples, "
        f"max |u_control| = {summary.max_abs_u_control:.4f} N m, "
        f"max |theta - setpoint| = {summary.max_abs_deviation:.4f} rad"
    )
    return traj


def run_lqr_noise_sim(
    params: PendulumParams,
    k: Sequence[float],
    noise: NoiseConfig,
    dt: float,
    duration: float,
    setpoint: State,
    s0: Optional[State] = None,
) -> Trajectory:
    """LQR regulation of the ideal model under bounded torque noise, one control update per Euler step."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    return regulate(SimulatedPendulum(params, dt), k, noise, duration, setpoint, s0=s0, source="simulation")
