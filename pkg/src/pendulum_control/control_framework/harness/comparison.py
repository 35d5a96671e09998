# src/pendulum_control/control_framework/harness/comparison.py

import logging
from dataclasses import asdict, dataclass

import numpy as np

from pendulum_control.control_framework.core.dynamics import Trajectory
from pendulum_control.control_framework.core.errors import AlignmentError, InsufficientDataError

logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-12  # s


@dataclass(frozen=True)
class ComparisonStats:
    mean_dpos: float
    std_dpos: float
    mean_dvel: float
    std_dvel: float
    n: int

    def to_report(self) -> str:
        return "".join(f"{key} = {value!r}\n" for key, value in asdict(self).items())


def compare(a: Trajectory, b: Trajectory) -> ComparisonStats:
    """Mean and population std of the per-sample differences a - b in angle and velocity."""
    if len(a) != len(b):
        raise AlignmentError(f"trajectories differ in length ({len(a)} vs {len(b)}); resample first")
    if len(a) == 0:
        raise InsufficientDataError("nothing to compare")
    skew = float(np.max(np.abs(a.t - b.t)))
    if skew > TIME_TOLERANCE:
        raise AlignmentError(f"timestamps differ by up to {skew:.3e} s; resample first")

    dpos = a.theta - b.theta
    dvel = a.omega - b.omega
    stats = ComparisonStats(
        mean_dpos=float(np.mean(dpos)),
        std_dpos=float(np.std(dpos)),
        mean_dvel=float(np.mean(dvel)),
        std_dvel=float(np.std(dvel)),
        n=len(a),
    )
    logger.info(f"Compared {a.source} against {b.source} over {stats.n} samples")
    return stats
