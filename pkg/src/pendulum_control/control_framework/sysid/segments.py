# src/pendulum_control/control_framework/sysid/segments.py

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from pendulum_control.control_framework.core.errors import DomainError
from pendulum_control.control_framework.sysid.logs import LogRecord, log_arrays

logger = logging.getLogger(__name__)

STATIC_VELOCITY_THRESHOLD = 0.005  # rad/s
STATIC_MIN_DURATION = 0.5  # s
REST_ANGLE = 0.0  # rad
# a hold is also broken by a hole in the log wider than this many nominal sample spacings
GAP_FACTOR = 1.5


class Cycle(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class StaticSegment:
    angle: float
    cycle: Cycle
    records: Tuple[LogRecord, ...]

    @property
    def mean_effort(self) -> float:
        return float(np.mean([r.effort_fbk for r in self.records]))

    @property
    def duration(self) -> float:
        return self.records[-1].t - self.records[0].t


def _runs(static: np.ndarray, breaks: np.ndarray) -> List[Tuple[int, int]]:
    """Inclusive [start, end] index pairs of maximal static runs."""
    runs = []
    start = None
    for i, is_static in enumerate(static):
        if is_static and start is not None and breaks[i]:
            runs.append((start, i - 1))
            start = i
        elif is_static and start is None:
            start = i
        elif not is_static and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(static) - 1))
    return runs


def extract_static_segments(
    records: Sequence[LogRecord],
    velocity_threshold: float = STATIC_VELOCITY_THRESHOLD,
    min_duration: float = STATIC_MIN_DURATION,
) -> List[StaticSegment]:
    """
    Maximal runs with |velocity_fbk| <= velocity_threshold lasting at least min_duration.
    A run's angle is its median position; its cycle is the sign of the net displacement
    since the previous segment; the first segment is measured from the rest angle, so
    re-running on the extracted records gives the same labels.
    """
    if not velocity_threshold > 0:
        raise DomainError(f"velocity_threshold must be positive, got {velocity_threshold}")
    if not records:
        return []

    t, pos, vel = log_arrays(records, "t", "position_fbk", "velocity_fbk")
    static = np.abs(vel) <= velocity_threshold

    breaks = np.zeros(len(t), dtype=bool)
    steps = np.diff(t)
    positive = steps[steps > 0]
    if len(positive):
        breaks[1:] = steps > GAP_FACTOR * float(np.median(positive))

    segments: List[StaticSegment] = []
    reference = REST_ANGLE
    for start, end in _runs(static, breaks):
        if t[end] - t[start] < min_duration - 1e-12:
            continue
        displacement = pos[start] - reference
        cycle = Cycle.NEGATIVE if displacement < 0 else Cycle.POSITIVE
        angle = float(np.median(pos[start:end + 1]))
        segments.append(StaticSegment(angle=angle, cycle=cycle, records=tuple(records[start:end + 1])))
        reference = pos[end]
        logger.debug(f"Static segment t=[{t[start]:.3f}, {t[end]:.3f}] angle={angle:.5f} {cycle.value}")

    logger.info(f"Extracted {len(segments)} static segment(s) from {len(records)} records")
    return segments
