# src/pendulum_control/launch_control/config/run_config.py

import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values

from pendulum_control.control_framework.core.dynamics import PendulumParams, State
from pendulum_control.control_framework.core.errors import ConfigError
from pendulum_control.control_framework.harness.noise import MASK64, NoiseConfig
from pendulum_control.control_framework.harness.virtual_plant import Perturbation, PlantConfig
from pendulum_control.control_framework.linear.riccati import CostMatrices
from pendulum_control.launch_control.config import settings

logger = logging.getLogger(__name__)

ANGLE_KEYS = ("setpoint_theta",)


def parse_angle(text: str) -> float:
    """Radians, or degrees when suffixed with 'deg' (e.g. '180deg', '-10 deg')."""
    value = text.strip().lower()
    try:
        if value.endswith("deg"):
            return math.radians(float(value[:-3]))
        return float(value)
    except ValueError:
        raise ConfigError(f"not an angle: {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    m_c: float = settings.M_C
    b_c: float = settings.B_C
    g_c: float = settings.G_C
    dt: float = settings.DT
    duration: float = settings.DURATION
    setpoint_theta: float = settings.SETPOINT_THETA
    q11: float = settings.Q11
    q22: float = settings.Q22
    r11: float = settings.R11
    noise_lo: float = settings.NOISE_LO
    noise_hi: float = settings.NOISE_HI
    seed: int = settings.SEED
    control_rate: float = settings.CONTROL_RATE
    sensor_quantization: float = settings.SENSOR_QUANTIZATION
    effort_hysteresis_offset: float = settings.EFFORT_HYSTERESIS_OFFSET
    perturb_m_c: float = 0.0
    perturb_b_c: float = 0.0
    perturb_g_c: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name != "seed" and not math.isfinite(value):
                raise ConfigError(f"{f.name} must be finite, got {value!r}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.duration >= self.dt:
            raise ConfigError(f"duration must be at least dt, got {self.duration}")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def params(self) -> PendulumParams:
        return PendulumParams(m_c=self.m_c, b_c=self.b_c, g_c=self.g_c)

    @property
    def setpoint(self) -> State:
        return State(self.setpoint_theta, 0.0)

    def cost(self, label: str = "config") -> CostMatrices:
        return CostMatrices.diagonal(self.q11, self.q22, self.r11, label=label)

    def noise(self, seed: Optional[int] = None) -> NoiseConfig:
        return NoiseConfig(lo=self.noise_lo, hi=self.noise_hi, seed=self.seed if seed is None else seed)

    def plant_config(self) -> PlantConfig:
        return PlantConfig(
            true_params=self.params,
            control_rate=self.control_rate,
            sensor_quantization=self.sensor_quantization,
            effort_hysteresis_offset=self.effort_hysteresis_offset,
            param_perturbation=Perturbation(m_c=self.perturb_m_c, b_c=self.perturb_b_c, g_c=self.perturb_g_c),
            dt=self.dt,
        )

    def header_lines(self) -> List[str]:
        """Effective configuration as '# key = value' lines."""
        return [f"# {key} = {value!r}" for key, value in asdict(self).items()]


def _convert(key: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    try:
        if key == "seed":
            return int(raw.strip(), 0)
        if key in ANGLE_KEYS:
            return parse_angle(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None


def _coerce(values: Mapping[str, Any], origin: str) -> Dict[str, Any]:
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for key, raw in values.items():
        key = key.strip()
        if key not in known:
            raise ConfigError(f"unknown configuration key '{key}' in {origin}")
        if raw is None or (isinstance(raw, str) and not raw.strip()):
            raise ConfigError(f"missing value for '{key}' in {origin}")
        out[key] = _convert(key, raw)
    return out


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Flat 'key = value' file with '#' comments. Nothing is taken from the environment."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return _coerce(dotenv_values(path, interpolate=False), str(path))


def parse_assignments(assignments: List[str]) -> Dict[str, Any]:
    """'key=value' strings from the command line."""
    pairs = {}
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {item!r}")
        pairs[key.strip()] = value.strip()
    return _coerce(pairs, "command line")


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Defaults, then the config file, then command-line overrides."""
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
        logger.debug(f"Loaded {len(values)} setting(s) from {path}")
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from e
