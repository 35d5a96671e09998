# src/pendulum_control/control_framework/utils/csv_io.py

"""CSV serialization for trajectories, command trajectories and stability reports."""

import io
import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd

from pendulum_control.control_framework.core.dynamics import Trajectory
from pendulum_control.control_framework.core.errors import DomainError, LogParseError
from pendulum_control.control_framework.harness.trajectory_gen import CommandTrajectory
from pendulum_control.control_framework.linear.report import StabilityRow

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t",) + Trajectory.channels
COMMAND_COLUMNS = ("t", "position_cmd", "velocity_cmd")
REPORT_COLUMNS = (
    "label", "feedback", "q11", "q12", "q21", "q22", "r11",
    "eig1_re", "eig1_im", "eig2_re", "eig2_im",
)
FLOAT_FORMAT = "%.17g"


def _to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_trajectory(traj: Trajectory) -> str:
    frame = pd.DataFrame({name: getattr(traj, name) for name in TRAJECTORY_COLUMNS})
    return _to_csv(frame)


def _parse_frame(text: str, columns: Sequence[str], kind: str) -> np.ndarray:
    try:
        frame = pd.read_csv(io.StringIO(text), skipinitialspace=True, float_precision="round_trip")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise LogParseError(f"unreadable {kind} CSV: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    if tuple(frame.columns) != tuple(columns):
        raise LogParseError(f"{kind} header must be {','.join(columns)}, got {','.join(frame.columns)}")
    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise LogParseError(f"column '{columns[col]}' has invalid value", row=int(row) + 1)
    return values


def parse_trajectory(text: str, source: str = "file") -> Trajectory:
    values = _parse_frame(text, TRAJECTORY_COLUMNS, "trajectory")

    t = values[:, 0]
    dt = float(np.median(np.diff(t))) if len(t) > 1 else 0.0
    try:
        return Trajectory(
            t=t, theta=values[:, 1], omega=values[:, 2], u_control=values[:, 3], u_noise=values[:, 4],
            dt=dt, source=source,
        )
    except DomainError as e:
        raise LogParseError(str(e)) from e


def read_trajectory(path: Union[str, Path]) -> Trajectory:
    path = Path(path)
    return parse_trajectory(path.read_text(), source=path.name)


def write_command_trajectory(cmd: CommandTrajectory) -> str:
    frame = pd.DataFrame({
        "t": cmd.t,
        "position_cmd": cmd.position_cmd,
        "velocity_cmd": cmd.velocity_cmd,
    })
    return _to_csv(frame)


def write_stability_report(rows: Sequence[StabilityRow]) -> str:
    """Eigenvalue table; open-loop rows leave the cost columns empty, failed rows the eigenvalues."""
    records = []
    for row in rows:
        record = dict.fromkeys(REPORT_COLUMNS)
        record["label"] = row.label
        record["feedback"] = row.feedback.value
        if row.q is not None:
            record.update(q11=row.q[0, 0], q12=row.q[0, 1], q21=row.q[1, 0], q22=row.q[1, 1],
                          r11=float(np.ravel(row.r)[0]))
        if row.eigenvalue_1 is not None:
            record.update(eig1_re=row.eigenvalue_1.real, eig1_im=row.eigenvalue_1.imag,
                          eig2_re=row.eigenvalue_2.real, eig2_im=row.eigenvalue_2.imag)
        records.append(record)
    frame = pd.DataFrame(records, columns=list(REPORT_COLUMNS))
    return _to_csv(frame)


def write_text(path: Union[str, Path], text: str):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {path}")
