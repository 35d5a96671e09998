# src/pendulum_control/launch_control/config/settings.py

import math
from pathlib import Path

# Package Directories
PACKAGE_ROOT = Path(__file__).resolve().parent.parent.parent
COST_PROFILES_DIR = PACKAGE_ROOT / "cost_profiles"
DEFAULT_COST_PROFILE = "reference_sweep"

# Logging
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"

# Identified pendulum constants
M_C = 0.055  # kg m^2
B_C = 11.77  # N m s/rad
G_C = 1.678  # N m

# Simulation
DT = 0.002  # s
DURATION = 5.0  # s
SETPOINT_THETA = math.pi  # rad, upright

# LQR cost (diagonal Q, scalar R)
Q11 = 100.0
Q22 = 0.01
R11 = 0.1

# Torque noise
NOISE_LO = -2.5  # N m
NOISE_HI = 2.5  # N m
SEED = 0

# Virtual plant
CONTROL_RATE = 100.0  # Hz
SENSOR_QUANTIZATION = 0.0  # rad, 0 = off
EFFORT_HYSTERESIS_OFFSET = 0.0  # N m, 0 = off

# Static-hold segmentation
STATIC_VELOCITY_THRESHOLD = 0.005  # rad/s
STATIC_MIN_DURATION = 0.5  # s

# Command trajectories
POSITION_INCREMENT = 0.002  # rad
PEAK_VELOCITY = 0.3  # rad/s
COMMAND_RATE = 100.0  # Hz

# Synthetic logs
SYNTH_TRIALS = 6
SYNTH_EFFORT_NOISE_STD = 0.0  # N m
