# src/pendulum_control/control_framework/linear/report.py

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from pendulum_control.control_framework.core.errors import PendulumControlError
from pendulum_control.control_framework.linear.linearization import StateSpace
from pendulum_control.control_framework.linear.riccati import CostMatrices, lqr_gain
from pendulum_control.control_framework.linear.stability import eigenvalues_2x2

logger = logging.getLogger(__name__)


class Feedback(Enum):
    OPEN_LOOP = "open-loop"
    LQR = "lqr"


@dataclass(frozen=True, eq=False)
class StabilityRow:
    """One row of the eigenvalue table. Solver failures are kept in-row as `error`."""
    label: str
    feedback: Feedback
    q: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None
    eigenvalue_1: Optional[complex] = None
    eigenvalue_2: Optional[complex] = None
    k: Optional[np.ndarray] = None
    error: Optional[str] = None


def stability_report(
    ss: StateSpace,
    combos: Sequence[CostMatrices],
    open_loop_label: str = "0",
) -> List[StabilityRow]:
    """Open-loop eigenvalues of A, then closed-loop eigenvalues of A - B K per cost combination."""
    eig1, eig2 = eigenvalues_2x2(ss.a)
    rows = [StabilityRow(label=open_loop_label, feedback=Feedback.OPEN_LOOP,
                         eigenvalue_1=eig1, eigenvalue_2=eig2)]

    for cost in combos:
        try:
            solution = lqr_gain(ss, cost)
        except PendulumControlError as e:
            logger.warning(f"Combination '{cost.label}' failed: {e}")
            rows.append(StabilityRow(label=cost.label, feedback=Feedback.LQR,
                                     q=cost.q, r=cost.r, error=str(e)))
            continue
        eig1, eig2 = solution.closed_loop_eigs
        rows.append(StabilityRow(label=cost.label, feedback=Feedback.LQR, q=cost.q, r=cost.r,
                                 eigenvalue_1=eig1, eigenvalue_2=eig2, k=solution.k))
    return rows
