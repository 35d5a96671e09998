# src/pendulum_control/control_framework/sysid/logs.py

"""Actuator logs in the recorded-quantities schema (one row per feedback sample)."""

import io
import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from pendulum_control.control_framework.core.errors import InsufficientDataError, LogParseError

logger = logging.getLogger(__name__)

MANDATORY_COLUMNS = ("t", "position_fbk", "velocity_fbk", "effort_fbk")
OPTIONAL_COLUMNS = (
    "position_cmd",
    "velocity_cmd",
    "effort_cmd",
    "pwm_cmd",
    "motor_current",
    "winding_current",
)
LOG_COLUMNS = MANDATORY_COLUMNS + OPTIONAL_COLUMNS


@dataclass(frozen=True)
class LogRecord:
    t: float                                  # s
    position_fbk: float                       # rad
    velocity_fbk: float                       # rad/s
    effort_fbk: float                         # N m
    position_cmd: Optional[float] = None      # rad
    velocity_cmd: Optional[float] = None      # rad/s
    effort_cmd: Optional[float] = None        # N m
    pwm_cmd: Optional[float] = None           # [-1, 1]
    motor_current: Optional[float] = None     # A
    winding_current: Optional[float] = None   # A


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return math.nan


def parse_log(text: str) -> List[LogRecord]:
    """Parse CSV log text. Optional columns may be omitted entirely or left blank per row."""
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise LogParseError("log has no header row") from e
    except pd.errors.ParserError as e:
        raise LogParseError(f"malformed CSV: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    unknown = [c for c in frame.columns if c not in LOG_COLUMNS]
    if unknown:
        raise LogParseError(f"unknown column(s): {', '.join(unknown)}")
    missing = [c for c in MANDATORY_COLUMNS if c not in frame.columns]
    if missing:
        raise LogParseError(f"missing mandatory column(s): {', '.join(missing)}")

    columns: Dict[str, np.ndarray] = {}
    for name in frame.columns:
        raw = frame[name].str.strip()
        values = raw.map(_to_float).to_numpy(dtype=float)
        blank = (raw == "").to_numpy()
        if name in MANDATORY_COLUMNS:
            bad = ~np.isfinite(values)
        else:
            bad = np.isnan(values) & ~blank
        if bad.any():
            i = int(np.argmax(bad))
            raise LogParseError(f"column '{name}' has invalid value {frame[name].iloc[i]!r}", row=i + 1)
        if name == "pwm_cmd":
            out_of_range = np.abs(np.nan_to_num(values)) > 1.0
            if out_of_range.any():
                i = int(np.argmax(out_of_range))
                raise LogParseError(f"pwm_cmd {values[i]} outside [-1, 1]", row=i + 1)
        columns[name] = values

    t = columns["t"]
    backwards = np.diff(t) < 0
    if backwards.any():
        i = int(np.argmax(backwards)) + 1
        raise LogParseError(f"time goes backwards ({t[i - 1]} -> {t[i]})", row=i + 1)

    records = []
    for i in range(len(frame)):
        row = {}
        for name, values in columns.items():
            v = values[i]
            row[name] = None if math.isnan(v) else float(v)
        records.append(LogRecord(**row))
    logger.debug(f"Parsed {len(records)} log records with columns {list(frame.columns)}")
    return records


def read_log(path: Union[str, Path]) -> List[LogRecord]:
    return parse_log(Path(path).read_text())


def write_log(records: Sequence[LogRecord]) -> str:
    """Serialize records; optional columns are written only if some record carries them."""
    present = [c for c in OPTIONAL_COLUMNS if any(getattr(r, c) is not None for r in records)]
    names = list(MANDATORY_COLUMNS) + present
    frame = pd.DataFrame(
        [[getattr(r, c) for c in names] for r in records], columns=names, dtype=float,
    )
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


def log_arrays(records: Sequence[LogRecord], *names: str) -> Tuple[np.ndarray, ...]:
    """Column arrays for the given field names; missing optional values become NaN."""
    known = {f.name for f in fields(LogRecord)}
    out = []
    for name in names:
        if name not in known:
            raise KeyError(name)
        out.append(np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in records], dtype=float,
        ))
    return tuple(out)


def finite_difference_acceleration(records: Sequence[LogRecord]) -> List[Tuple[float, float]]:
    """Forward difference a_k = (v_{k+1} - v_k) / (t_{k+1} - t_k), stamped at t_k."""
    if len(records) < 2:
        raise InsufficientDataError(f"need at least 2 records, got {len(records)}")
    t, v = log_arrays(records, "t", "velocity_fbk")
    dt = np.diff(t)
    repeated = dt <= 0
    if repeated.any():
        i = int(np.argmax(repeated)) + 1
        raise LogParseError(f"repeated timestamp {t[i]}", row=i + 1)
    a = np.diff(v) / dt
    return list(zip(t[:-1].tolist(), a.tolist()))
