# src/pendulum_control/control_framework/harness/virtual_plant.py

"""
Software stand-in for the hardware pendulum: the controller runs at its own rate over a
finer Euler integration of (possibly perturbed) true constants, and sees a quantized
encoder.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from pendulum_control.control_framework.core.base_plant import BasePlant
from pendulum_control.control_framework.core.dynamics import (
    PendulumParams,
    State,
    Trajectory,
    step_euler,
)
from pendulum_control.control_framework.core.errors import ConfigError
from pendulum_control.control_framework.harness.closed_loop import regulate
from pendulum_control.control_framework.harness.noise import NoiseConfig

logger = logging.getLogger(__name__)

PHYSICS_DT = 0.002  # s
CONTROL_RATE = 100.0  # Hz


@dataclass(frozen=True)
class Perturbation:
    """Relative mismatch of each true constant, e.g. m_c=0.05 for +5 %."""
    m_c: float = 0.0
    b_c: float = 0.0
    g_c: float = 0.0

    def __post_init__(self):
        for name in ("m_c", "b_c", "g_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > -1.0):
                raise ConfigError(f"perturbation of {name} must be a finite fraction > -1, got {value!r}")


@dataclass(frozen=True)
class PlantConfig:
    true_params: PendulumParams
    control_rate: float = CONTROL_RATE
    sensor_quantization: float = 0.0
    effort_hysteresis_offset: float = 0.0
    param_perturbation: Perturbation = field(default_factory=Perturbation)
    dt: float = PHYSICS_DT

    def __post_init__(self):
        if not (math.isfinite(self.control_rate) and self.control_rate > 0):
            raise ConfigError(f"control_rate must be positive, got {self.control_rate}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.sensor_quantization) and self.sensor_quantization >= 0):
            raise ConfigError(f"sensor_quantization must be >= 0, got {self.sensor_quantization}")
        if not (math.isfinite(self.effort_hysteresis_offset) and self.effort_hysteresis_offset >= 0):
            raise ConfigError(f"effort_hysteresis_offset must be >= 0, got {self.effort_hysteresis_offset}")
        ratio = 1.0 / (self.control_rate * self.dt)
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(
                f"control period 1/{self.control_rate} Hz must be a whole number of {self.dt} s physics steps"
            )

    @property
    def substeps(self) -> int:
        return int(round(1.0 / (self.control_rate * self.dt)))

    @property
    def effective_params(self) -> PendulumParams:
        p = self.param_perturbation
        return self.true_params.perturbed(m_c=p.m_c, b_c=p.b_c, g_c=p.g_c)


class VirtualPendulumPlant(BasePlant):
    """
    Perturbed pendulum integrated at dt with the command held for `substeps` steps.
    The actuator delivers the command less offset * sign(omega); the encoder rounds
    the angle to the nearest multiple of the quantization step.
    """
    def __init__(self, cfg: PlantConfig):
        super().__init__(cfg.effective_params, cfg.dt, substeps=cfg.substeps)
        self.cfg = cfg
        self.logger.debug(
            f"Virtual plant: {self.params}, {cfg.control_rate} Hz control over {self.substeps} "
            f"physics step(s), quantization {cfg.sensor_quantization} rad"
        )

    def measure(self) -> State:
        s = self.state
        q = self.cfg.sensor_quantization
        if q > 0:
            return State(q * round(s.theta / q), s.omega)
        return s

    def step(self, u: float) -> State:
        offset = self.cfg.effort_hysteresis_offset
        if offset == 0:
            return super().step(u)
        s = self.state
        for _ in range(self.substeps):
            s = step_euler(self.params, s, u - offset * float(np.sign(s.omega)), self.dt)
        self._state = s
        return s


def run_virtual_plant(
    cfg: PlantConfig,
    k: Sequence[float],
    noise: NoiseConfig,
    duration: float,
    setpoint: State,
    s0: Optional[State] = None,
) -> Trajectory:
    """LQR regulation of the virtual plant; samples are recorded once per control period."""
    return regulate(VirtualPendulumPlant(cfg), k, noise, duration, setpoint, s0=s0, source="virtual-plant")
