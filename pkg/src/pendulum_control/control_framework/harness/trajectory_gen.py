# src/pendulum_control/control_framework/harness/trajectory_gen.py

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from pendulum_control.control_framework.core.errors import DomainError

logger = logging.getLogger(__name__)

POSITION_INCREMENT = 0.002  # rad
PEAK_VELOCITY = 0.3  # rad/s
COMMAND_RATE = 100.0  # Hz


@dataclass(frozen=True, eq=False)
class CommandTrajectory:
    """Position and velocity commands sampled at a fixed rate."""
    rate: float
    position_cmd: np.ndarray
    velocity_cmd: np.ndarray

    def __post_init__(self):
        for name in ("position_cmd", "velocity_cmd"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.position_cmd) != len(self.velocity_cmd):
            raise DomainError("position and velocity commands differ in length")

    def __len__(self) -> int:
        return len(self.position_cmd)

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self)) / self.rate


def generate_trajectory(
    start: float,
    end: float,
    pos_increment: float = POSITION_INCREMENT,
    peak_velocity: float = PEAK_VELOCITY,
    rate: float = COMMAND_RATE,
) -> CommandTrajectory:
    """
    Linear position ramp from start to end in steps of pos_increment, the last step
    shortened so the final sample is exactly end. The velocity channel is the half sine
    peak * sin(pi * k / (N - 1)) over the same N samples, signed by the direction of travel.
    """
    for name, value in (("start", start), ("end", end), ("peak_velocity", peak_velocity)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
    if not pos_increment > 0:
        raise DomainError(f"pos_increment must be positive, got {pos_increment}")
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")

    if start == end:
        return CommandTrajectory(rate=rate, position_cmd=[start], velocity_cmd=[0.0])

    distance = end - start
    direction = math.copysign(1.0, distance)
    # ratios that are whole up to rounding do not get an extra sliver step
    steps = max(1, math.ceil(abs(distance) / pos_increment - 1e-9))
    k = np.arange(steps + 1)
    position = start + direction * pos_increment * k
    position[-1] = end
    velocity = direction * peak_velocity * np.sin(np.pi * k / steps)
    velocity[0] = velocity[-1] = 0.0

    logger.debug(f"Command trajectory {start:.6f} -> {end:.6f}: {steps + 1} samples at {rate} Hz")
    return CommandTrajectory(rate=rate, position_cmd=position, velocity_cmd=velocity)


def static_hold_schedule(step_deg: float = 10.0, max_deg: float = 90.0) -> List[float]:
    """Hold targets (rad) for the gravity experiment: 0 -> +max -> 0 -> -max -> 0."""
    if not step_deg > 0:
        raise DomainError(f"step_deg must be positive, got {step_deg}")
    if not max_deg >= step_deg:
        raise DomainError(f"max_deg must be at least step_deg, got {max_deg}")
    count = int(round(max_deg / step_deg))
    up = [i * step_deg for i in range(count + 1)]
    degrees = up + up[-2::-1] + [-d for d in up[1:]] + [-d for d in up[-2:0:-1]] + [0.0]
    return [float(np.deg2rad(d)) for d in degrees]
