# src/pendulum_control/control_framework/sysid/synthetic.py

"""
Synthetic actuator logs for identification experiments.

Both generators integrate with the same explicit Euler rule as the simulator, so a noiseless
log fits the regression models exactly. The sensor reports external torque negated: effort
feedback is minus the torque the pendulum needs to follow the recorded motion.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from pendulum_control.control_framework.core.dynamics import PendulumParams, required_torque
from pendulum_control.control_framework.core.errors import DomainError
from pendulum_control.control_framework.harness.noise import derive_seed
from pendulum_control.control_framework.harness.trajectory_gen import (
    COMMAND_RATE,
    PEAK_VELOCITY,
    POSITION_INCREMENT,
    generate_trajectory,
    static_hold_schedule,
)
from pendulum_control.control_framework.sysid.logs import LogRecord

logger = logging.getLogger(__name__)

HORIZONTAL_DT = 0.002  # s
HORIZONTAL_DURATION = 10.0  # s
VELOCITY_AMPLITUDE = 5.0  # rad/s
# two tones so velocity and acceleration are not collinear
TONES = ((0.5, 1.0), (3.1, 0.5))  # (Hz, relative amplitude)
HOLD_DURATION = 2.0  # s


def _effort_noise(std: float, size: int, seed: int, trial: int) -> np.ndarray:
    if not std >= 0:
        raise DomainError(f"effort noise std must be >= 0, got {std}")
    if std == 0:
        return np.zeros(size)
    return np.random.default_rng(derive_seed(seed, trial)).normal(0.0, std, size)


def synthesize_horizontal_log(
    params: PendulumParams,
    duration: float = HORIZONTAL_DURATION,
    dt: float = HORIZONTAL_DT,
    velocity_amplitude: float = VELOCITY_AMPLITUDE,
    effort_noise_std: float = 0.0,
    seed: int = 0,
    trial: int = 0,
) -> List[LogRecord]:
    """Pendulum laid flat (no gravity torque) driven through a prescribed two-tone velocity profile."""
    if not dt > 0 or not duration > 10 * dt:
        raise DomainError(f"need dt > 0 and duration > 10 dt, got dt={dt}, duration={duration}")

    n = int(np.floor(duration / dt + 1e-9)) + 1
    t = np.arange(n) * dt
    # trials differ in phase so averaging spans distinct excitation
    phase = 2.0 * np.pi * (trial * 0.1375 % 1.0)
    velocity = velocity_amplitude * sum(
        amp * np.sin(2.0 * np.pi * f * t + phase) for f, amp in TONES
    )
    position = np.concatenate(([0.0], np.cumsum(dt * velocity[:-1])))
    accel = np.diff(velocity) / np.diff(t)
    accel = np.append(accel, accel[-1])

    effort = -required_torque(params.without_gravity(), position, velocity, accel)
    effort = effort + _effort_noise(effort_noise_std, n, seed, trial)

    logger.info(f"Synthesized horizontal log (trial {trial}): {n} samples over {t[-1]:.3f} s")
    return [
        LogRecord(t=float(t[k]), position_fbk=float(position[k]), velocity_fbk=float(velocity[k]),
                  effort_fbk=float(effort[k]), velocity_cmd=float(velocity[k]))
        for k in range(n)
    ]


def synthesize_static_hold_log(
    params: PendulumParams,
    schedule: Optional[Sequence[float]] = None,
    hold_duration: float = HOLD_DURATION,
    rate: float = COMMAND_RATE,
    pos_increment: float = POSITION_INCREMENT,
    peak_velocity: float = PEAK_VELOCITY,
    hysteresis_offset: float = 0.0,
    effort_noise_std: float = 0.0,
    seed: int = 0,
    trial: int = 0,
) -> List[LogRecord]:
    """
    Gravity experiment: commanded ramps between the scheduled targets with a still hold at
    each one. While holding, effort is minus the gravity torque at the target, biased by
    the hysteresis offset in the direction of the last move.
    """
    targets = list(static_hold_schedule() if schedule is None else schedule)
    if not targets:
        raise DomainError("hold schedule is empty")
    if not hold_duration > 0:
        raise DomainError(f"hold_duration must be positive, got {hold_duration}")

    hold_samples = max(1, int(round(hold_duration * rate)))
    positions, velocities, efforts = [], [], []

    def hold(angle: float, direction: float):
        positions.extend([angle] * hold_samples)
        velocities.extend([0.0] * hold_samples)
        torque = params.g_c * np.sin(angle) + hysteresis_offset * direction
        efforts.extend([-torque] * hold_samples)

    hold(targets[0], 0.0)
    for start, end in zip(targets[:-1], targets[1:]):
        cmd = generate_trajectory(start, end, pos_increment, peak_velocity, rate)
        if len(cmd) > 2:
            # both endpoints coincide with the holds on either side
            pos, vel = cmd.position_cmd[1:-1], cmd.velocity_cmd[1:-1]
            accel = np.diff(cmd.velocity_cmd)[1:] * rate
            positions.extend(pos.tolist())
            velocities.extend(vel.tolist())
            efforts.extend((-required_torque(params, pos, vel, accel)).tolist())
        hold(end, float(np.sign(end - start)))

    n = len(positions)
    effort = np.asarray(efforts) + _effort_noise(effort_noise_std, n, seed, trial)
    logger.info(f"Synthesized static-hold log (trial {trial}): {len(targets)} holds, {n} samples")
    return [
        LogRecord(t=k / rate, position_fbk=positions[k], velocity_fbk=velocities[k],
                  effort_fbk=float(effort[k]), position_cmd=positions[k], velocity_cmd=velocities[k])
        for k in range(n)
    ]
