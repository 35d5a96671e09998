# src/pendulum_control/control_framework/harness/resample.py

import logging
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from pendulum_control.control_framework.core.dynamics import Trajectory
from pendulum_control.control_framework.core.errors import (
    DomainError,
    InsufficientDataError,
    RangeError,
)

logger = logging.getLogger(__name__)

MIN_KNOTS = 4
RANGE_TOLERANCE = 1e-9  # s


def resample_cubic(traj: Trajectory, target_times: Sequence[float]) -> Trajectory:
    """Natural cubic spline through every channel, evaluated at target_times. No extrapolation."""
    if len(traj) < MIN_KNOTS:
        raise InsufficientDataError(f"need at least {MIN_KNOTS} samples to resample, got {len(traj)}")
    target = np.asarray(target_times, dtype=float).ravel()
    if len(target) == 0:
        raise DomainError("no target times given")
    if not np.all(np.isfinite(target)):
        raise DomainError("target times must be finite")

    first, last = traj.t[0], traj.t[-1]
    if target.min() < first - RANGE_TOLERANCE or target.max() > last + RANGE_TOLERANCE:
        raise RangeError(
            f"target times [{target.min()}, {target.max()}] extend beyond the source span [{first}, {last}]"
        )
    where = np.clip(target, first, last)

    resampled = {}
    for name in Trajectory.channels:
        spline = CubicSpline(traj.t, getattr(traj, name), bc_type="natural")
        resampled[name] = spline(where)

    spacing = float(np.median(np.diff(target))) if len(target) > 1 else traj.dt
    logger.debug(f"Resampled {len(traj)} {traj.source} samples onto {len(target)} target times")
    return Trajectory(t=target, dt=spacing, source=traj.source, **resampled)
